#include "liftlab/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "liftlab/boolfn.hpp"
#include "liftlab/junta.hpp"
#include "liftlab/lift.hpp"
#include "liftlab/numeric.hpp"
#include "liftlab/smoothdist.hpp"
#include "liftlab/weaklearn.hpp"

namespace liftlab {

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc;
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string format_value(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot open " + tmp);
      out << content;
      if (!out.flush()) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

ThresholdCheck make_check(std::string id, double observed, double threshold,
                          std::string cmp) {
  ThresholdCheck c;
  c.id = std::move(id);
  c.observed = observed;
  c.threshold = threshold;
  c.cmp = std::move(cmp);
  if (c.cmp == "<=") {
    c.pass = observed <= threshold;
  } else if (c.cmp == ">=") {
    c.pass = observed >= threshold;
  } else if (c.cmp == "==") {
    c.pass = observed == threshold;
  } else {
    throw std::logic_error("unknown comparator " + c.cmp);
  }
  return c;
}

void finish_checks(RunRecord& record) {
  for (const auto& c : record.checks) record.pass = record.pass && c.pass;
}

// density-c pmf: iid exponentials normalized, then capped at 1/(c·2^k) with
// the clipped mass redistributed over uncapped entries until feasible
std::vector<double> random_density_pmf(int bits, double c, Rng& rng) {
  const std::size_t size = std::size_t{1} << bits;
  const double cap = 1.0 / (c * static_cast<double>(size));
  std::vector<double> p(size);
  for (double& v : p) v = -std::log(1.0 - rng.uniform());
  double total = kahan_sum(p);
  for (double& v : p) v /= total;
  for (int round = 0; round < 200; ++round) {
    double clipped = 0, open = 0;
    for (double v : p) {
      if (v >= cap) {
        clipped += cap;
      } else {
        open += v;
      }
    }
    bool any_above = false;
    for (double v : p) any_above = any_above || v > cap;
    if (!any_above) break;
    const double scale = open > 0 ? (1.0 - clipped) / open : 0.0;
    for (double& v : p) v = v >= cap ? cap : v * scale;
  }
  // exact renormalization; the slack stays far below the density tolerance
  total = kahan_sum(p);
  for (double& v : p) v /= total;
  return p;
}

// all the mass as low in |Σ x_i| as the cap allows; the adversarial case for
// the dictator advantage bound
std::vector<double> lowest_magnitude_pmf(int bits, double c) {
  const std::size_t size = std::size_t{1} << bits;
  const double cap = 1.0 / (c * static_cast<double>(size));
  std::vector<std::uint32_t> order(size);
  for (std::uint32_t x = 0; x < size; ++x) order[x] = x;
  std::sort(order.begin(), order.end(), [bits](std::uint32_t a, std::uint32_t b) {
    const int ma = std::abs(2 * std::popcount(a) - bits);
    const int mb = std::abs(2 * std::popcount(b) - bits);
    return ma != mb ? ma < mb : a < b;
  });
  std::vector<double> p(size, 0.0);
  double remaining = 1.0;
  for (std::uint32_t x : order) {
    const double take = std::min(cap, remaining);
    p[x] = take;
    remaining -= take;
    if (remaining <= 0.0) break;
  }
  return p;
}

std::uint64_t sample_index(const std::vector<double>& pmf, Rng& rng) {
  double u = rng.uniform();
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    u -= pmf[i];
    if (u < 0.0) return i;
  }
  return pmf.size() - 1;
}

nlohmann::json quantile_summary(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const std::size_t i = static_cast<std::size_t>(q * (values.size() - 1));
    return values[i];
  };
  return nlohmann::json{{"min", values.front()}, {"q25", at(0.25)},
                        {"median", at(0.5)},    {"q75", at(0.75)},
                        {"max", values.back()}};
}

// ---------------------------------------------------------------------------
// experiment bodies
// ---------------------------------------------------------------------------

void run_junta_maj(const ExperimentConfig& cfg, RunRecord& record) {
  const int k_top = cfg.k > 0 ? cfg.k : 10;
  if (k_top % 2 != 0 || k_top < 4) {
    throw std::invalid_argument("junta-maj needs an even k of at least 4");
  }
  record.columns = {"k", "agreement"};
  std::vector<double> agreements;
  for (int k = 4; k <= k_top; k += 2) {
    const double agreement = maj_best_halfjunta_agreement(k);
    agreements.push_back(agreement);
    record.rows.push_back({static_cast<double>(k), agreement});
  }
  const auto [j_quarter, cert_q] = junta_complexity(majority(3), 0.25);
  const auto [j_below, cert_b] = junta_complexity(majority(3), 0.24);

  record.summary["agreements"] = agreements;
  record.summary["best_agreement"] = agreements.back();
  record.summary["maj3_j_at_0.25"] = j_quarter;
  record.summary["maj3_j_at_0.24"] = j_below;

  record.checks.push_back(make_check("maj3_j_at_quarter", j_quarter, 1, "=="));
  record.checks.push_back(make_check("maj3_j_below_quarter", j_below, 3, "=="));
  if (k_top >= 6) {
    record.checks.push_back(make_check("agreement6", agreements[1], 0.75, "=="));
  }
  bool nonincreasing = true;
  for (std::size_t i = 1; i < agreements.size(); ++i) {
    nonincreasing = nonincreasing && agreements[i] <= agreements[i - 1];
  }
  record.checks.push_back(
      make_check("agreement_nonincreasing", nonincreasing ? 1 : 0, 1, "=="));
}

void run_dictator_identity(const ExperimentConfig& cfg, RunRecord& record) {
  const Thresholds& T = thresholds();
  std::vector<int> ks;
  if (cfg.k > 0) {
    if (cfg.k % 2 == 0) throw std::invalid_argument("dictator identity needs odd k");
    ks = {cfg.k};
  } else {
    ks = {3, 5, 7};
  }
  const double kappa = cfg.kappa > 0 ? cfg.kappa : 2.0;
  const double c = 1.0 / kappa;
  const std::uint64_t trials = cfg.trials >= 0 ? cfg.trials : 100;
  record.columns = {"k", "trial", "avg", "mean_corr", "max_corr", "identity_gap",
                    "bound"};
  if (trials == 0) {
    record.no_data = true;
    record.summary["status"] = "no data";
    return;
  }

  double max_gap = 0;
  double min_margin = 1e300;
  double min_avg_margin = 1e300;
  for (int k : ks) {
    const double bound =
        c * std::sqrt(static_cast<double>(k)) / T.dictator_constant_divisor;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
      Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(k), trial);
      // trial 0 is the adversarial pile-up distribution, the rest random
      std::vector<double> pmf = trial == 0 ? lowest_magnitude_pmf(k, c)
                                           : random_density_pmf(k, c, rng);
      const DensityDistribution H(k, std::move(pmf), c);
      const DictatorAdvantage adv = dictator_advantage(H);
      const double gap = std::abs(adv.average - adv.mean_corr);
      max_gap = std::max(max_gap, gap);
      min_margin = std::min(min_margin, adv.max_corr - bound);
      min_avg_margin = std::min(min_avg_margin, adv.average - bound);
      record.rows.push_back({static_cast<double>(k), static_cast<double>(trial),
                             adv.average, adv.mean_corr, adv.max_corr, gap, bound});
    }
  }
  record.summary["max_identity_gap"] = max_gap;
  record.summary["min_margin"] = min_margin;
  record.summary["min_avg_margin"] = min_avg_margin;
  record.checks.push_back(
      make_check("identity_gap_max", max_gap, T.dictator_identity_tol, "<="));
  record.checks.push_back(make_check("advantage_margin_min", min_margin, 0.0, ">="));
  record.checks.push_back(
      make_check("avg_advantage_margin_min", min_avg_margin, 0.0, ">="));
}

void run_soft_sandwich(const ExperimentConfig& cfg, RunRecord& record) {
  const Thresholds& T = thresholds();
  const int k = cfg.k > 0 ? cfg.k : T.sandwich_k;
  const std::uint64_t trials = cfg.trials >= 0 ? static_cast<std::uint64_t>(cfg.trials)
                                               : T.sandwich_trials;
  std::vector<double> deltas =
      cfg.delta >= 0 ? std::vector<double>{cfg.delta}
                     : std::vector<double>{0.05, 0.1, 0.2};
  SoftSearchConfig search;
  if (cfg.grid > 0) search.grid = cfg.grid;

  record.columns = {"trial",   "delta",    "soft_value",  "j_delta",
                    "j_4delta", "z_size",  "ok_upper",    "ok_sandwich"};
  if (trials == 0) {
    record.no_data = true;
    record.summary["status"] = "no data";
    return;
  }

  std::uint64_t upper_violations = 0, sandwich_violations = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::substream(cfg.seed, trial);
    std::vector<int> values(std::size_t{1} << k);
    for (auto& v : values) v = rng.sign();
    const BooleanFunction g = BooleanFunction::from_values(k, values);
    for (double delta : deltas) {
      const SoftJuntaBound soft = soft_junta_upper(g, delta, search);
      const auto [j_delta, cert_d] = junta_complexity(g, delta);
      const auto [j_4delta, cert_4d] =
          junta_complexity(g, std::min(1.0, 4.0 * delta));
      const auto z = sandwich_support(g, delta, soft.alpha);
      const bool ok_upper = soft.value <= static_cast<double>(j_delta) + 1e-9;
      const bool ok_sandwich =
          z.has_value() &&
          std::popcount(*z) <= 2.0 * soft.value + 1e-9 &&
          static_cast<double>(j_4delta) <= 2.0 * soft.value + 1e-9;
      upper_violations += !ok_upper;
      sandwich_violations += !ok_sandwich;
      record.rows.push_back({static_cast<double>(trial), delta, soft.value,
                             static_cast<double>(j_delta),
                             static_cast<double>(j_4delta),
                             z ? static_cast<double>(std::popcount(*z)) : -1.0,
                             ok_upper ? 1.0 : 0.0, ok_sandwich ? 1.0 : 0.0});
    }
  }
  record.summary["upper_violations"] = upper_violations;
  record.summary["sandwich_violations"] = sandwich_violations;
  record.checks.push_back(make_check("upper_violations",
                                     static_cast<double>(upper_violations), 0, "=="));
  record.checks.push_back(make_check(
      "sandwich_violations", static_cast<double>(sandwich_violations), 0, "=="));
}

void run_rounding(const ExperimentConfig& cfg, RunRecord& record) {
  const Thresholds& T = thresholds();
  const int k_max = cfg.k > 0 ? cfg.k : T.rounding_k_max;
  const std::uint64_t trials = cfg.trials >= 0 ? static_cast<std::uint64_t>(cfg.trials)
                                               : T.rounding_trials;
  record.columns = {"trial", "k", "alpha_error", "rounded_error", "ratio"};
  if (trials == 0) {
    record.no_data = true;
    record.summary["status"] = "no data";
    return;
  }

  std::uint64_t violations = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::substream(cfg.seed, trial);
    const int k = 1 + static_cast<int>(rng.below(k_max));
    std::vector<int> values(std::size_t{1} << k);
    for (auto& v : values) v = rng.sign();
    const BooleanFunction g = BooleanFunction::from_values(k, values);
    std::vector<double> alpha(k);
    for (double& a : alpha) a = 2.0 * rng.uniform() - 1.0;
    const CorrelationVector v(k, alpha);
    const double err = alpha_correlated_error(g, v);
    const double rounded = rounding_expected_error(g, v);
    if (rounded > 2.0 * err + 1e-9) ++violations;
    record.rows.push_back({static_cast<double>(trial), static_cast<double>(k), err,
                           rounded, err > 0 ? rounded / err : 0.0});
  }
  record.summary["violations"] = violations;
  record.checks.push_back(
      make_check("violations", static_cast<double>(violations), 0, "=="));
}

void run_concentration(const ExperimentConfig& cfg, RunRecord& record) {
  const Thresholds& T = thresholds();
  const int n = cfg.n > 0 ? cfg.n : T.concentration_n;
  const int k = cfg.k > 0 ? cfg.k : T.concentration_k;
  const std::uint64_t trials = cfg.trials >= 0 ? static_cast<std::uint64_t>(cfg.trials)
                                               : T.concentration_trials;
  record.columns = {"trial", "sum_alpha_sq", "flips_total", "max_abs_stage_corr"};
  if (trials == 0) {
    record.no_data = true;
    record.summary["status"] = "no data";
    return;
  }

  const double base = static_cast<double>(k) / static_cast<double>(std::uint64_t{1} << n);
  std::vector<double> grid;
  for (double factor : {1.0, 2.0, 3.0, 4.0, 6.0, 8.0}) grid.push_back(factor * base);
  const ConcentrationResult result =
      concentration_experiment(n, k, trials, cfg.seed, cfg.fix_inner, grid);

  KahanSum sq;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const auto& row = result.trials[trial];
    record.rows.push_back({static_cast<double>(trial), row.sum_alpha_sq,
                           static_cast<double>(row.flips_total),
                           row.max_abs_stage_corr});
    const double d = row.sum_alpha_sq - result.mean;
    sq.add(d * d);
  }
  const double sd = std::sqrt(sq.value() / std::max<double>(1.0, trials - 1.0));
  const double stderr_mean = sd / std::sqrt(static_cast<double>(trials));

  record.summary["mean"] = result.mean;
  record.summary["expected_mean"] = result.expected_mean;
  record.summary["stderr"] = stderr_mean;
  std::vector<double> stats;
  for (const auto& row : result.trials) stats.push_back(row.sum_alpha_sq);
  record.summary["quantiles"] = quantile_summary(std::move(stats));
  nlohmann::json tail_table = nlohmann::json::array();
  double tail_at_factor = 0.0;
  for (const auto& [t, p] : result.tail) {
    tail_table.push_back({{"t", t}, {"tail", p}});
    if (std::abs(t - T.concentration_tail_t_factor * base) < 1e-12) tail_at_factor = p;
  }
  record.summary["tail"] = tail_table;

  const double sigmas =
      stderr_mean > 0 ? std::abs(result.mean - result.expected_mean) / stderr_mean : 0.0;
  record.checks.push_back(make_check("mean_sigmas", sigmas, 3.0, "<="));
  record.checks.push_back(
      make_check("tail_at_4k_over_2n", tail_at_factor, T.concentration_tail_max, "<="));
}

void run_covering(const ExperimentConfig& cfg, RunRecord& record) {
  const Thresholds& T = thresholds();
  const int n = cfg.n > 0 ? cfg.n : T.covering_n;
  const int k = cfg.k > 0 ? cfg.k : T.covering_k;
  const std::uint64_t trials = cfg.trials >= 0 ? static_cast<std::uint64_t>(cfg.trials)
                                               : T.covering_trials;
  const std::uint64_t mc_inputs =
      cfg.m > 0 ? static_cast<std::uint64_t>(cfg.m) : T.covering_mc_inputs;

  record.columns = {"trial", "distance", "hit"};
  const BooleanFunction outer = majority(k);
  Rng fixed_rng = Rng::substream(cfg.seed, 0xF0CA1ull);
  const LiftedFunction fixed_member = random_lift(outer, n, fixed_rng);
  auto h = [&fixed_member](const BlockInput& X) { return fixed_member.evaluate(X); };

  const CoveringResult result = covering_statistic(
      outer, n, h, trials, cfg.seed, mc_inputs, T.covering_distance_threshold);
  if (result.no_data) {
    record.no_data = true;
    record.summary["status"] = "no data";
    return;
  }
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const double dist = result.distances[trial];
    record.rows.push_back({static_cast<double>(trial), dist,
                           dist <= result.threshold ? 1.0 : 0.0});
  }
  record.summary["hits"] = result.hits;
  record.summary["upper95"] = result.upper95;
  record.summary["mean_distance"] = result.mean_distance;
  record.summary["quantiles"] = quantile_summary(result.distances);
  record.summary["exact_distances"] = result.exact;

  record.checks.push_back(
      make_check("hits", static_cast<double>(result.hits), 0, "=="));
  record.checks.push_back(
      make_check("upper95", result.upper95, T.covering_upper95_max, "<="));
  record.checks.push_back(make_check(
      "mean_distance_gap", std::abs(result.mean_distance - T.covering_mean_center),
      T.covering_mean_tol, "<="));
}

void run_weak_learn(const ExperimentConfig& cfg, RunRecord& record, bool adversarial) {
  const Thresholds& T = thresholds();
  const int n = cfg.n > 0 ? cfg.n : (adversarial ? T.wl_adv_n : T.wl_uniform_n);
  const int k = cfg.k > 0 ? cfg.k : (adversarial ? T.wl_adv_k : T.wl_uniform_k);
  const std::uint64_t m =
      cfg.m >= 0 ? static_cast<std::uint64_t>(cfg.m)
                 : (adversarial ? T.wl_adv_m : T.wl_uniform_m);
  const std::uint64_t trials =
      cfg.trials >= 0 ? static_cast<std::uint64_t>(cfg.trials)
                      : (adversarial ? T.wl_adv_trials : T.wl_uniform_trials);

  record.columns = {"trial", "advantage", "advantage_stderr", "g_correlation",
                    "tail",  "kind",      "tau",              "u",
                    "block1_corr", "kappa"};
  if (trials == 0) {
    record.no_data = true;
    record.summary["status"] = "no data";
    return;
  }

  WeakLearnOptions options;
  if (cfg.u_override >= 0) options.u_override = cfg.u_override;
  options.diagnostic_samples = T.wl_diag_samples;

  const BooleanFunction outer = majority(k);
  std::uint64_t positive = 0, tail_ok = 0, qualitative = 0;
  KahanSum adv_sum, gcorr_sum;
  double kappa_max_seen = 0;
  const double tail_bound = 1.0 / (static_cast<double>(k) * static_cast<double>(k));

  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed = Rng::derive_seed(cfg.seed, trial);
    Rng lift_rng = Rng::substream(trial_seed, 0xFull);
    const LiftedFunction F = random_lift(outer, n, lift_rng);

    double kappa;
    WeakLearnResult result = [&] {
      if (adversarial) {
        const SmoothDistribution D =
            anti_block_distribution(F, T.wl_adv_cert_draws, trial_seed);
        kappa = D.kappa();
        return weak_learn(F, D, m, kappa, trial_seed, options);
      }
      const SmoothDistribution D = SmoothDistribution::uniform_blocks(n, k);
      kappa = cfg.kappa > 0 ? cfg.kappa : 1.0;
      return weak_learn(F, D, m, kappa, trial_seed, options);
    }();

    const auto& d = result.diagnostics;
    const double block1 = d.per_block_correlations.empty()
                              ? 0.0
                              : d.per_block_correlations.front();
    const double kind =
        result.hypothesis.kind == ThresholdHypothesis::Kind::kThreshold   ? 0.0
        : result.hypothesis.kind == ThresholdHypothesis::Kind::kConstPlus ? 1.0
                                                                          : 2.0;
    record.rows.push_back({static_cast<double>(trial), d.advantage,
                           d.advantage_stderr, d.g_correlation, d.g_tail, kind,
                           static_cast<double>(d.tau), static_cast<double>(d.u),
                           block1, kappa});
    positive += d.advantage > 0;
    tail_ok += d.g_tail <= tail_bound;
    qualitative += block1 < 0 && d.advantage > 0;
    adv_sum.add(d.advantage);
    gcorr_sum.add(d.g_correlation);
    kappa_max_seen = std::max(kappa_max_seen, kappa);
  }

  const double mean_adv = adv_sum.value() / static_cast<double>(trials);
  const double mean_gcorr = gcorr_sum.value() / static_cast<double>(trials);
  record.summary["positive_runs"] = positive;
  record.summary["mean_advantage"] = mean_adv;
  record.summary["mean_g_correlation"] = mean_gcorr;
  record.summary["tail_ok_runs"] = tail_ok;
  record.summary["qualitative_runs"] = qualitative;
  record.summary["kappa_max"] = kappa_max_seen;

  if (adversarial) {
    record.checks.push_back(
        make_check("kappa_max", kappa_max_seen, T.wl_adv_kappa_max, "<="));
    record.checks.push_back(make_check("qualitative_runs",
                                       static_cast<double>(qualitative),
                                       static_cast<double>(T.wl_adv_qualitative_min),
                                       ">="));
  } else {
    record.checks.push_back(make_check(
        "positive_runs", static_cast<double>(positive),
        static_cast<double>(T.wl_uniform_positive_min), ">="));
    record.checks.push_back(make_check("mean_advantage", mean_adv,
                                       T.wl_uniform_mean_advantage_min, ">="));
    record.checks.push_back(
        make_check("mean_g_correlation", mean_gcorr, T.wl_gcorr_mean_min, ">="));
    record.checks.push_back(make_check("tail_ok_runs",
                                       static_cast<double>(tail_ok),
                                       static_cast<double>(T.wl_tail_ok_min), ">="));
  }
}

void run_memorize(const ExperimentConfig& cfg, RunRecord& record) {
  const Thresholds& T = thresholds();
  const std::uint64_t trials = cfg.trials >= 0 ? static_cast<std::uint64_t>(cfg.trials)
                                               : T.memorize_trials;
  std::optional<int> fixed_tie;
  if (cfg.tie_rule == "fixed+1") {
    fixed_tie = 1;
  } else if (cfg.tie_rule == "fixed-1") {
    fixed_tie = -1;
  } else if (cfg.tie_rule != "randomized") {
    throw std::invalid_argument("tie rule must be randomized, fixed+1, or fixed-1");
  }

  record.columns = {"trial", "domain", "distinct", "expected_advantage",
                    "mc_mean", "mc_stderr", "ok"};
  if (trials == 0) {
    record.no_data = true;
    record.summary["status"] = "no data";
    return;
  }

  double max_gap = 0;
  std::uint64_t sigma_ok = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::substream(cfg.seed, trial);
    const std::size_t domain = 4 + rng.below(61);
    std::vector<double> pmf(domain);
    for (double& p : pmf) p = -std::log(1.0 - rng.uniform());
    const double total = kahan_sum(pmf);
    for (double& p : pmf) p /= total;
    std::vector<int> target(domain);
    for (int& t : target) t = rng.sign();

    const std::size_t draws = 1 + rng.below(domain);
    std::vector<std::pair<std::size_t, int>> sample;
    for (std::size_t i = 0; i < draws; ++i) {
      const std::size_t x = sample_index(pmf, rng);
      sample.emplace_back(x, target[x]);
    }
    const MemorizeResult result = memorizing_weak_learner(sample, pmf);

    // independent recomputation from the raw sample
    std::vector<bool> seen(domain, false);
    for (const auto& [x, y] : sample) seen[x] = true;
    KahanSum oracle;
    std::size_t distinct = 0;
    for (std::size_t x = 0; x < domain; ++x) {
      if (seen[x]) {
        oracle.add(pmf[x]);
        ++distinct;
      }
    }
    const double gap = std::abs(result.expected_advantage - oracle.value());
    max_gap = std::max(max_gap, gap);

    // Monte Carlo over the tie randomness
    KahanSum mc, mc_sq;
    for (std::uint64_t rep = 0; rep < T.memorize_tie_draws; ++rep) {
      const std::vector<int> h = result.materialize(fixed_tie, rng);
      KahanSum adv;
      for (std::size_t x = 0; x < domain; ++x) adv.add(pmf[x] * h[x] * target[x]);
      mc.add(adv.value());
      mc_sq.add(adv.value() * adv.value());
    }
    const double mc_mean = mc.value() / static_cast<double>(T.memorize_tie_draws);
    const double var = std::max(
        0.0, mc_sq.value() / static_cast<double>(T.memorize_tie_draws) - mc_mean * mc_mean);
    const double mc_stderr = std::sqrt(var / static_cast<double>(T.memorize_tie_draws));
    const bool ok = !fixed_tie
                        ? std::abs(mc_mean - result.expected_advantage) <=
                              3.0 * mc_stderr + 1e-12
                        : true;
    sigma_ok += ok;
    record.rows.push_back({static_cast<double>(trial), static_cast<double>(domain),
                           static_cast<double>(distinct), result.expected_advantage,
                           mc_mean, mc_stderr, ok ? 1.0 : 0.0});
  }
  record.summary["max_identity_gap"] = max_gap;
  record.summary["mc_ok_runs"] = sigma_ok;
  record.checks.push_back(make_check("identity_gap_max", max_gap, 1e-12, "<="));
  if (!fixed_tie) {
    record.checks.push_back(make_check("mc_within_3sigma_runs",
                                       static_cast<double>(sigma_ok),
                                       static_cast<double>(trials), "=="));
  }
}

}  // namespace

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> kAll = {
      Experiment::kJuntaMaj,          Experiment::kSoftSandwich,
      Experiment::kRounding,          Experiment::kConcentration,
      Experiment::kCovering,          Experiment::kWeakLearnUniform,
      Experiment::kWeakLearnAdversarial, Experiment::kMemorizeBaseline,
      Experiment::kDictatorIdentity};
  return kAll;
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::kJuntaMaj: return "junta-maj";
    case Experiment::kSoftSandwich: return "soft-sandwich";
    case Experiment::kRounding: return "rounding";
    case Experiment::kConcentration: return "concentration";
    case Experiment::kCovering: return "covering";
    case Experiment::kWeakLearnUniform: return "weak-learn-uniform";
    case Experiment::kWeakLearnAdversarial: return "weak-learn-adversarial";
    case Experiment::kMemorizeBaseline: return "memorize-baseline";
    case Experiment::kDictatorIdentity: return "dictator-identity";
  }
  throw std::logic_error("unknown experiment");
}

Experiment experiment_from_name(const std::string& name) {
  for (Experiment e : all_experiments()) {
    if (experiment_name(e) == name) return e;
  }
  throw std::invalid_argument("unknown experiment: " + name);
}

nlohmann::json ExperimentConfig::to_json() const {
  return nlohmann::json{{"experiment", experiment_name(experiment)},
                        {"k", k},
                        {"n", n},
                        {"m", m},
                        {"kappa", kappa},
                        {"trials", trials},
                        {"delta", delta},
                        {"grid", grid},
                        {"u_override", u_override},
                        {"seed", seed},
                        {"out", out},
                        {"format", format},
                        {"fix_inner", fix_inner},
                        {"tie_rule", tie_rule}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") cfg.experiment = experiment_from_name(value.get<std::string>());
    else if (key == "k") cfg.k = value.get<int>();
    else if (key == "n") cfg.n = value.get<int>();
    else if (key == "m") cfg.m = value.get<std::int64_t>();
    else if (key == "kappa") cfg.kappa = value.get<double>();
    else if (key == "trials") cfg.trials = value.get<std::int64_t>();
    else if (key == "delta") cfg.delta = value.get<double>();
    else if (key == "grid") cfg.grid = value.get<int>();
    else if (key == "u_override") cfg.u_override = value.get<int>();
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "out") cfg.out = value.get<std::string>();
    else if (key == "format") cfg.format = value.get<std::string>();
    else if (key == "fix_inner") cfg.fix_inner = value.get<bool>();
    else if (key == "tie_rule") cfg.tie_rule = value.get<std::string>();
    else throw std::invalid_argument("unknown config field: " + key);
  }
  return cfg;
}

std::string RunRecord::rows_csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << (i ? "," : "") << columns[i];
  }
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_value(row[i]);
    }
    out << "\n";
  }
  return out.str();
}

nlohmann::json RunRecord::to_json() const {
  nlohmann::json checks_json = nlohmann::json::array();
  for (const auto& c : checks) {
    checks_json.push_back({{"id", c.id},
                           {"observed", c.observed},
                           {"threshold", c.threshold},
                           {"cmp", c.cmp},
                           {"pass", c.pass}});
  }
  return nlohmann::json{{"config", config.to_json()},
                        {"version", version},
                        {"started", started},
                        {"finished", finished},
                        {"columns", columns},
                        {"summary", summary},
                        {"checks", checks_json},
                        {"pass", pass},
                        {"no_data", no_data}};
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
  RunRecord r;
  r.config = ExperimentConfig::from_json(j.at("config"));
  r.version = j.at("version").get<std::string>();
  r.started = j.value("started", "");
  r.finished = j.value("finished", "");
  r.columns = j.at("columns").get<std::vector<std::string>>();
  r.summary = j.value("summary", nlohmann::json::object());
  for (const auto& c : j.at("checks")) {
    r.checks.push_back(ThresholdCheck{c.at("id").get<std::string>(),
                                      c.at("observed").get<double>(),
                                      c.at("threshold").get<double>(),
                                      c.at("cmp").get<std::string>(),
                                      c.at("pass").get<bool>()});
  }
  r.pass = j.at("pass").get<bool>();
  r.no_data = j.value("no_data", false);
  return r;
}

RunRecord run(const ExperimentConfig& config) {
  RunRecord record;
  record.config = config;
  record.version = kVersion;
  record.started = now_iso8601();

  switch (config.experiment) {
    case Experiment::kJuntaMaj: run_junta_maj(config, record); break;
    case Experiment::kSoftSandwich: run_soft_sandwich(config, record); break;
    case Experiment::kRounding: run_rounding(config, record); break;
    case Experiment::kConcentration: run_concentration(config, record); break;
    case Experiment::kCovering: run_covering(config, record); break;
    case Experiment::kWeakLearnUniform: run_weak_learn(config, record, false); break;
    case Experiment::kWeakLearnAdversarial: run_weak_learn(config, record, true); break;
    case Experiment::kMemorizeBaseline: run_memorize(config, record); break;
    case Experiment::kDictatorIdentity: run_dictator_identity(config, record); break;
  }

  finish_checks(record);
  record.finished = now_iso8601();
  record.summary["config"] = config.to_json();
  record.summary["version"] = record.version;

  if (!config.out.empty()) {
    atomic_write(config.out + ".csv", record.rows_csv());
    atomic_write(config.out + ".json", record.to_json().dump(2) + "\n");
  }
  return record;
}

std::vector<std::string> expected_checks(Experiment e) {
  switch (e) {
    case Experiment::kJuntaMaj:
      return {"maj3_j_at_quarter", "maj3_j_below_quarter", "agreement6",
              "agreement_nonincreasing"};
    case Experiment::kSoftSandwich:
      return {"upper_violations", "sandwich_violations"};
    case Experiment::kRounding:
      return {"violations"};
    case Experiment::kConcentration:
      return {"mean_sigmas", "tail_at_4k_over_2n"};
    case Experiment::kCovering:
      return {"hits", "upper95", "mean_distance_gap"};
    case Experiment::kWeakLearnUniform:
      return {"positive_runs", "mean_advantage", "mean_g_correlation",
              "tail_ok_runs"};
    case Experiment::kWeakLearnAdversarial:
      return {"kappa_max", "qualitative_runs"};
    case Experiment::kMemorizeBaseline:
      return {"identity_gap_max", "mc_within_3sigma_runs"};
    case Experiment::kDictatorIdentity:
      return {"identity_gap_max", "advantage_margin_min", "avg_advantage_margin_min"};
  }
  throw std::logic_error("unknown experiment");
}

std::vector<ReportRow> report(const std::vector<RunRecord>& records) {
  for (const auto& r : records) {
    if (r.version != records.front().version) {
      throw std::runtime_error("refusing to merge records from versions " +
                               records.front().version + " and " + r.version);
    }
  }
  std::vector<ReportRow> rows;
  for (Experiment e : all_experiments()) {
    const RunRecord* latest = nullptr;
    for (const auto& r : records) {
      if (r.config.experiment == e) latest = &r;
    }
    for (const std::string& id : expected_checks(e)) {
      ReportRow row;
      row.criterion = experiment_name(e) + "." + id;
      if (!latest) {
        row.status = "not run";
        rows.push_back(std::move(row));
        continue;
      }
      const ThresholdCheck* found = nullptr;
      for (const auto& c : latest->checks) {
        if (c.id == id) found = &c;
      }
      if (!found) {
        row.status = "not run";
      } else {
        row.observed = format_value(found->observed);
        row.threshold = found->cmp + " " + format_value(found->threshold);
        row.status = found->pass ? "pass" : "fail";
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string render_report(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "criterion,observed,threshold,status\n";
  for (const auto& r : rows) {
    out << r.criterion << "," << r.observed << "," << r.threshold << "," << r.status
        << "\n";
  }
  return out.str();
}

}  // namespace liftlab
