#include "liftlab/constants.hpp"

#include <cstdlib>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include "json.hpp"

namespace liftlab {

namespace {

Thresholds load_thresholds() {
  Thresholds t;
  const char* path = std::getenv("LIFTLAB_CONSTANTS");
  if (!path) return t;

  std::ifstream in(path);
  if (!in) throw std::runtime_error(std::string("cannot open constants file ") + path);
  nlohmann::json j;
  in >> j;

  for (const auto& [key, value] : j.items()) {
    if (key == "version") t.version = value.get<std::string>();
    else if (key == "pilot_seed") t.pilot_seed = value.get<std::uint64_t>();
    else if (key == "dictator_identity_tol") t.dictator_identity_tol = value.get<double>();
    else if (key == "dictator_constant_divisor") t.dictator_constant_divisor = value.get<double>();
    else if (key == "concentration_n") t.concentration_n = value.get<int>();
    else if (key == "concentration_k") t.concentration_k = value.get<int>();
    else if (key == "concentration_trials") t.concentration_trials = value.get<std::uint64_t>();
    else if (key == "concentration_tail_t_factor") t.concentration_tail_t_factor = value.get<double>();
    else if (key == "concentration_tail_max") t.concentration_tail_max = value.get<double>();
    else if (key == "covering_n") t.covering_n = value.get<int>();
    else if (key == "covering_k") t.covering_k = value.get<int>();
    else if (key == "covering_trials") t.covering_trials = value.get<std::uint64_t>();
    else if (key == "covering_mc_inputs") t.covering_mc_inputs = value.get<std::uint64_t>();
    else if (key == "covering_distance_threshold") t.covering_distance_threshold = value.get<double>();
    else if (key == "covering_upper95_max") t.covering_upper95_max = value.get<double>();
    else if (key == "covering_mean_center") t.covering_mean_center = value.get<double>();
    else if (key == "covering_mean_tol") t.covering_mean_tol = value.get<double>();
    else if (key == "wl_uniform_n") t.wl_uniform_n = value.get<int>();
    else if (key == "wl_uniform_k") t.wl_uniform_k = value.get<int>();
    else if (key == "wl_uniform_m") t.wl_uniform_m = value.get<std::uint64_t>();
    else if (key == "wl_uniform_trials") t.wl_uniform_trials = value.get<std::uint64_t>();
    else if (key == "wl_diag_samples") t.wl_diag_samples = value.get<std::uint64_t>();
    else if (key == "wl_uniform_positive_min") t.wl_uniform_positive_min = value.get<std::int64_t>();
    else if (key == "wl_uniform_mean_advantage_min") t.wl_uniform_mean_advantage_min = value.get<double>();
    else if (key == "wl_gcorr_mean_min") t.wl_gcorr_mean_min = value.get<double>();
    else if (key == "wl_tail_ok_min") t.wl_tail_ok_min = value.get<std::int64_t>();
    else if (key == "wl_adv_n") t.wl_adv_n = value.get<int>();
    else if (key == "wl_adv_k") t.wl_adv_k = value.get<int>();
    else if (key == "wl_adv_m") t.wl_adv_m = value.get<std::uint64_t>();
    else if (key == "wl_adv_trials") t.wl_adv_trials = value.get<std::uint64_t>();
    else if (key == "wl_adv_cert_draws") t.wl_adv_cert_draws = value.get<std::uint64_t>();
    else if (key == "wl_adv_kappa_max") t.wl_adv_kappa_max = value.get<double>();
    else if (key == "wl_adv_qualitative_min") t.wl_adv_qualitative_min = value.get<std::int64_t>();
    else if (key == "memorize_trials") t.memorize_trials = value.get<std::uint64_t>();
    else if (key == "memorize_tie_draws") t.memorize_tie_draws = value.get<std::uint64_t>();
    else if (key == "sandwich_k") t.sandwich_k = value.get<int>();
    else if (key == "sandwich_trials") t.sandwich_trials = value.get<std::uint64_t>();
    else if (key == "rounding_k_max") t.rounding_k_max = value.get<int>();
    else if (key == "rounding_trials") t.rounding_trials = value.get<std::uint64_t>();
    else throw std::runtime_error("unknown constants key: " + key);
  }
  return t;
}

}  // namespace

const Thresholds& thresholds() {
  static const Thresholds t = load_thresholds();
  return t;
}

}  // namespace liftlab
