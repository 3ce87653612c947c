// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance below is pinned here or in the constants file;
// nothing is calibrated at run time.

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "liftlab/boolfn.hpp"
#include "liftlab/constants.hpp"
#include "liftlab/harness.hpp"
#include "liftlab/junta.hpp"
#include "liftlab/lift.hpp"
#include "liftlab/numeric.hpp"
#include "liftlab/smoothdist.hpp"
#include "liftlab/weaklearn.hpp"

using namespace liftlab;

namespace {

BooleanFunction random_function(int n, Rng& rng) {
  std::vector<int> values(std::uint64_t{1} << n);
  for (auto& v : values) v = rng.sign();
  return BooleanFunction::from_values(n, values);
}

double oracle_coefficient(const BooleanFunction& f, std::uint32_t mask) {
  std::int64_t sum = 0;
  for (std::uint64_t x = 0; x < f.table_size(); ++x) {
    int chi = 1;
    for (int i = 0; i < f.arity(); ++i) {
      if (mask & (1u << i)) chi *= ((x >> i) & 1) ? 1 : -1;
    }
    sum += chi * f.evaluate(x);
  }
  return static_cast<double>(sum) / static_cast<double>(f.table_size());
}

// --------------------------------------------------------------------------

bool spectral_correctness(std::string& detail) {
  Rng rng(1001);
  for (int k = 1; k <= 10; ++k) {
    for (int trial = 0; trial < 200; ++trial) {
      const BooleanFunction f = random_function(k, rng);
      const FourierSpectrum s = fourier(f);
      if (std::abs(s.parseval_sum() - 1.0) >= 1e-9) {
        detail = "parseval violation at k=" + std::to_string(k);
        return false;
      }
      if (!(inverse_fourier(s) == f)) {
        detail = "round trip violation at k=" + std::to_string(k);
        return false;
      }
    }
  }
  const FourierSpectrum maj = fourier(majority(3));
  for (std::uint32_t mask = 0; mask < 8; ++mask) {
    const double expected = oracle_coefficient(majority(3), mask);
    const double pattern =
        std::popcount(mask) == 1 ? 0.5 : (mask == 7 ? -0.5 : 0.0);
    if (expected != pattern || std::abs(maj.coeffs[mask] - pattern) > 1e-12) {
      detail = "majority spectrum mismatch at mask " + std::to_string(mask);
      return false;
    }
  }
  detail = "2000 functions, parseval and round trip within 1e-9";
  return true;
}

bool junta_tightness(std::string& detail) {
  bool ok = true;
  std::ostringstream out;
  const int j_quarter = junta_complexity(majority(3), 0.25).first;
  const int j_below = junta_complexity(majority(3), 0.24).first;
  ok = ok && j_quarter == 1 && j_below == 3;
  out << "J(MAJ3,0.25)=" << j_quarter << " J(MAJ3,0.24)=" << j_below;

  std::vector<double> agreements;
  for (int k = 4; k <= 10; k += 2) agreements.push_back(maj_best_halfjunta_agreement(k));
  ok = ok && agreements[1] == 0.75;
  out << " agreement(4..10)=";
  bool nonincreasing = true;
  for (std::size_t i = 0; i < agreements.size(); ++i) {
    out << (i ? "," : "") << agreements[i];
    if (i > 0) nonincreasing = nonincreasing && agreements[i] <= agreements[i - 1];
  }
  ok = ok && nonincreasing;
  if (!nonincreasing) out << " (not non-increasing)";
  detail = out.str();
  return ok;
}

bool dictator_identity(std::string& detail) {
  const Thresholds& T = thresholds();
  const double c = 0.5;
  double worst_gap = 0, worst_margin = 1e300;
  for (int k : {3, 5, 7}) {
    const double bound = c * std::sqrt(static_cast<double>(k)) /
                         T.dictator_constant_divisor;
    for (int trial = 0; trial < 100; ++trial) {
      Rng rng = Rng::substream(1003, static_cast<std::uint64_t>(k), trial);
      const std::size_t size = std::size_t{1} << k;
      const double cap = 1.0 / (c * static_cast<double>(size));
      std::vector<double> pmf(size);
      double total = 0;
      for (double& p : pmf) {
        p = -std::log(1.0 - rng.uniform());
        total += p;
      }
      for (double& p : pmf) p /= total;
      for (int round = 0; round < 200; ++round) {
        double clipped = 0, open = 0;
        bool any = false;
        for (double p : pmf) {
          if (p >= cap) clipped += cap;
          else open += p;
          any = any || p > cap;
        }
        if (!any) break;
        const double scale = open > 0 ? (1.0 - clipped) / open : 0.0;
        for (double& p : pmf) p = p >= cap ? cap : p * scale;
      }
      total = kahan_sum(pmf);
      for (double& p : pmf) p /= total;
      const DensityDistribution H(k, pmf, c);
      const DictatorAdvantage adv = dictator_advantage(H);
      worst_gap = std::max(worst_gap, std::abs(adv.average - adv.mean_corr));
      worst_margin = std::min(worst_margin, adv.max_corr - bound);
    }
  }
  std::ostringstream out;
  out << "max identity gap " << worst_gap << ", min margin over the bound "
      << worst_margin;
  detail = out.str();
  return worst_gap <= T.dictator_identity_tol && worst_margin >= 0.0;
}

bool variance_sandwich(std::string& detail) {
  Rng rng(1004);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(6));
    const BooleanFunction g = random_function(k, rng);
    std::vector<double> a(k);
    for (double& v : a) v = 2.0 * rng.uniform() - 1.0;
    const CorrelationVector alpha(k, a);
    const double err = alpha_correlated_error(g, alpha);
    CorrelatedVariance var;
    try {
      var = alpha_correlated_variance(g, alpha);  // throws beyond 1e-9
    } catch (const std::logic_error&) {
      detail = "spectral and direct variance disagree";
      return false;
    }
    if (var.direct < 2.0 * err - 1e-9 || var.direct > 4.0 * err + 1e-9) {
      detail = "sandwich violated at trial " + std::to_string(trial);
      return false;
    }
  }
  detail = "100 instances, both routes within 1e-9 and sandwiched";
  return true;
}

bool rounding_bound(std::string& detail) {
  Rng rng(1005);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(8));
    const BooleanFunction g = random_function(k, rng);
    std::vector<double> a(k);
    for (double& v : a) v = 2.0 * rng.uniform() - 1.0;
    const CorrelationVector alpha(k, a);
    if (rounding_expected_error(g, alpha) >
        2.0 * alpha_correlated_error(g, alpha) + 1e-9) {
      detail = "violation at trial " + std::to_string(trial);
      return false;
    }
  }
  detail = "200 instances, zero violations";
  return true;
}

bool sandwich_lemma(std::string& detail) {
  Rng rng(1006);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(4));
    const BooleanFunction g = random_function(k, rng);
    for (double delta : {0.05, 0.1, 0.2}) {
      const SoftJuntaBound soft = soft_junta_upper(g, delta);
      const int j_delta = junta_complexity(g, delta).first;
      if (soft.value > static_cast<double>(j_delta) + 1e-9) {
        detail = "soft bound above the junta complexity at trial " +
                 std::to_string(trial);
        return false;
      }
      const auto z = sandwich_support(g, delta, soft.alpha);
      const int j_4delta = junta_complexity(g, std::min(1.0, 4 * delta)).first;
      const bool z_ok =
          z.has_value() && std::popcount(*z) <= 2.0 * soft.value + 1e-9 &&
          alpha_correlated_error(g, CorrelationVector::from_support(k, *z)) <=
              4.0 * delta + 1e-9;
      if (!z_ok || static_cast<double>(j_4delta) > 2.0 * soft.value + 1e-9) {
        detail = "certificate chain failed at trial " + std::to_string(trial);
        return false;
      }
    }
  }
  detail = "50 functions x 3 deltas, zero violations";
  return true;
}

bool concentration(std::string& detail) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kConcentration;
  cfg.seed = 1007;
  const RunRecord record = run(cfg);
  std::ostringstream out;
  out << "mean " << record.summary.at("mean").get<double>() << " vs "
      << record.summary.at("expected_mean").get<double>();
  for (const auto& check : record.checks) {
    out << "; " << check.id << (check.pass ? " ok" : " FAILED");
  }
  detail = out.str();
  return record.pass;
}

bool covering_evidence(std::string& detail) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kCovering;
  cfg.seed = 1008;
  const RunRecord record = run(cfg);
  std::ostringstream out;
  out << "hits " << record.summary.at("hits").get<std::uint64_t>() << ", upper95 "
      << record.summary.at("upper95").get<double>() << ", mean distance "
      << record.summary.at("mean_distance").get<double>();
  detail = out.str();
  return record.pass;
}

bool weak_learner_uniform(std::string& detail) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kWeakLearnUniform;
  cfg.seed = 1009;
  const RunRecord record = run(cfg);
  std::ostringstream out;
  out << "positive " << record.summary.at("positive_runs").get<std::uint64_t>()
      << "/100, mean advantage "
      << record.summary.at("mean_advantage").get<double>() << ", mean g-corr "
      << record.summary.at("mean_g_correlation").get<double>() << ", tail ok "
      << record.summary.at("tail_ok_runs").get<std::uint64_t>() << "/100";
  detail = out.str();
  return record.pass;
}

bool weak_learner_adversarial(std::string& detail) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kWeakLearnAdversarial;
  cfg.seed = 1010;
  const RunRecord record = run(cfg);
  std::ostringstream out;
  out << "kappa_max " << record.summary.at("kappa_max").get<double>()
      << ", qualitative " << record.summary.at("qualitative_runs").get<std::uint64_t>()
      << "/" << record.rows.size();
  for (const auto& check : record.checks) {
    out << "; " << check.id << (check.pass ? " ok" : " FAILED");
  }
  detail = out.str();
  return record.pass;
}

bool memorizing_baseline(std::string& detail) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kMemorizeBaseline;
  cfg.seed = 1011;
  const RunRecord record = run(cfg);
  std::ostringstream out;
  out << "max identity gap "
      << record.summary.at("max_identity_gap").get<double>() << ", 3-sigma ok "
      << record.summary.at("mc_ok_runs").get<std::uint64_t>() << "/"
      << record.rows.size();
  detail = out.str();
  return record.pass;
}

bool uniform_convergence(std::string& detail) {
  // fixed small setting with exact advantages; the envelope must hold
  // simultaneously over the whole family in at least 90% of trials
  Rng rng(1012);
  const int n = 3, k = 5;
  const LiftedFunction F = random_lift(majority(k), n, rng);
  const SmoothDistribution U = SmoothDistribution::uniform_blocks(n, k);
  const LabeledSample train_set = draw_sample(F, U, 48, rng, "train");
  auto tables = std::make_shared<BlockTables>(train_tables(train_set, n, k));
  const auto family = hypothesis_family(tables, weak_learner_u(k, 1.0));

  std::vector<double> true_adv;
  Rng r(1013);
  for (const auto& h : family) {
    true_adv.push_back(advantage(h, F, U, EvalMode::exact_mode(), r).value);
  }

  const double eps = 0.1, delta = 0.1;
  const std::uint64_t sample_size =
      uniform_convergence_sample_size(family.size(), eps, delta);
  const int trials = 1000;
  int ok = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng tr = Rng::substream(1014, trial);
    const LabeledSample validation = draw_sample(F, U, sample_size, tr, "val");
    bool within = true;
    for (std::size_t i = 0; i < family.size(); ++i) {
      std::uint64_t mistakes = 0;
      for (const auto& [X, y] : validation.points) {
        mistakes += family[i].evaluate(X) != y;
      }
      // the envelope is on the 0/1 loss; advantage = 1 - 2·loss
      const double empirical_loss =
          static_cast<double>(mistakes) / static_cast<double>(validation.points.size());
      const double true_loss = (1.0 - true_adv[i]) / 2.0;
      within = within && std::abs(empirical_loss - true_loss) <= eps;
    }
    ok += within;
  }
  std::ostringstream out;
  out << "envelope held in " << ok << "/" << trials << " trials at |S|="
      << sample_size << ", |H|=" << family.size();
  detail = out.str();
  return ok >= static_cast<int>(0.9 * trials);
}

bool reproducibility(std::string& detail) {
  const auto dir = std::filesystem::temp_directory_path() / "liftlab_acceptance";
  std::filesystem::create_directories(dir);
  struct Setup {
    Experiment experiment;
    int k, n;
    std::int64_t m, trials;
  };
  const std::vector<Setup> setups = {
      {Experiment::kJuntaMaj, 6, -1, -1, -1},
      {Experiment::kSoftSandwich, 3, -1, -1, 3},
      {Experiment::kRounding, 4, -1, -1, 10},
      {Experiment::kConcentration, 6, 5, -1, 30},
      {Experiment::kCovering, -1, -1, 500, 10},
      {Experiment::kWeakLearnUniform, 5, 6, 64, 2},
      {Experiment::kWeakLearnAdversarial, 5, 5, 64, 2},
      {Experiment::kMemorizeBaseline, -1, -1, -1, 5},
      {Experiment::kDictatorIdentity, 3, -1, -1, 10},
  };
  for (const auto& setup : setups) {
    ExperimentConfig cfg;
    cfg.experiment = setup.experiment;
    cfg.k = setup.k;
    cfg.n = setup.n;
    cfg.m = setup.m;
    cfg.trials = setup.trials;
    cfg.seed = 1015;
    cfg.out = (dir / (experiment_name(setup.experiment) + "_a")).string();
    run(cfg);
    cfg.out = (dir / (experiment_name(setup.experiment) + "_b")).string();
    run(cfg);
    std::ifstream a(cfg.out + ".csv", std::ios::binary);
    std::ifstream b((dir / (experiment_name(setup.experiment) + "_a.csv")).string(),
                    std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(a)),
                              std::istreambuf_iterator<char>());
    const std::string bytes_b((std::istreambuf_iterator<char>(b)),
                              std::istreambuf_iterator<char>());
    if (bytes_a.empty() || bytes_a != bytes_b) {
      detail = "csv mismatch for " + experiment_name(setup.experiment);
      std::filesystem::remove_all(dir);
      return false;
    }
  }
  std::filesystem::remove_all(dir);
  detail = "all nine experiments byte-identical across reruns";
  return true;
}

struct Criterion {
  int id;
  std::string name;
  std::function<bool(std::string&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "spectral correctness", spectral_correctness},
      {2, "junta tightness for majority", junta_tightness},
      {3, "dictator advantage identity", dictator_identity},
      {4, "correlated-variance sandwich", variance_sandwich},
      {5, "rounding expectation bound", rounding_bound},
      {6, "soft/standard sandwich certificates", sandwich_lemma},
      {7, "concentration of summed squared correlations", concentration},
      {8, "covering evidence", covering_evidence},
      {9, "weak learner on the uniform distribution", weak_learner_uniform},
      {10, "weak learner on the adversarial smooth distribution",
       weak_learner_adversarial},
      {11, "memorizing baseline", memorizing_baseline},
      {12, "uniform convergence of selection", uniform_convergence},
      {13, "seeded reproducibility", reproducibility},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    failures += !ok;
    std::printf("[%s] criterion %2d: %s — %s\n", ok ? "PASS" : "FAIL", criterion.id,
                criterion.name.c_str(), detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
