#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "liftlab/lift.hpp"
#include "liftlab/smoothdist.hpp"

namespace liftlab {

struct LabeledSample {
  int n = 0;
  int k = 0;
  std::vector<std::pair<BlockInput, int>> points;  // (X, y) with y = ±1
  std::string source;
  std::uint64_t seed = 0;

  // rows "x_hex,y"
  std::string to_csv() const;
  static LabeledSample from_csv(std::istream& in, int n, int k);
};

// labels from D drawn with an explicit stream, y = F(X)
LabeledSample draw_sample(const LiftedFunction& F, const SmoothDistribution& D,
                          std::uint64_t count, Rng& rng, std::string source);

// The per-block memorization tables g_i: 2^n entries in {-1, 0, +1}, 0
// meaning never written. Training is a sequential fold: later points
// overwrite earlier ones.
class BlockTables {
 public:
  BlockTables(int n, int k);

  int n() const { return n_; }
  int k() const { return k_; }
  void write(int i, std::uint32_t x, int y);
  int value(int i, std::uint32_t x) const { return tables_[i][x]; }
  const std::vector<std::uint64_t>& writes() const { return writes_; }

  // G_S(X) = Σ_i g_i(X^{(i)}) ∈ [-k, k]
  int g_sum(const BlockInput& X) const;
  // number of blocks of X whose entry was ever written
  int written_blocks(const BlockInput& X) const;

  // exact E_{x uniform}[f_i(x)·g_i(x)] per block against reference inner functions
  std::vector<double> block_correlations(const std::vector<BooleanFunction>& inner) const;

 private:
  int n_, k_;
  std::vector<std::vector<signed char>> tables_;
  std::vector<std::uint64_t> writes_;
};

BlockTables train_tables(const LabeledSample& sample, int n, int k);

// h_τ(X) = sign(G_S(X) ≥ τ) (+1 on equality), plus the two constants
struct ThresholdHypothesis {
  enum class Kind { kConstPlus, kConstMinus, kThreshold };

  Kind kind = Kind::kConstPlus;
  int tau = 0;
  std::shared_ptr<const BlockTables> tables;

  int evaluate(const BlockInput& X) const;
  std::string describe() const;
};

// {const +1, const -1, h_{-u}, ..., h_{u}} in the selection tie-break order;
// 2u + 3 hypotheses
std::vector<ThresholdHypothesis> hypothesis_family(
    std::shared_ptr<const BlockTables> tables, int u);

struct Advantage {
  double value = 0;
  double stderr_value = 0;  // 0 in exact mode
  bool exact = false;
};

struct EvalMode {
  bool exact = false;
  std::uint64_t samples = 20000;

  static EvalMode exact_mode() { return EvalMode{true, 0}; }
  static EvalMode monte_carlo(std::uint64_t samples) { return EvalMode{false, samples}; }
};

// E_D[h·F]; exact mode needs an exact-pmf D on at most 20 bits
Advantage advantage(const ThresholdHypothesis& h, const LiftedFunction& F,
                    const SmoothDistribution& D, const EvalMode& mode, Rng& rng);

// E_D[F(X)·G_S(X)]
Advantage g_correlation(const BlockTables& tables, const LiftedFunction& F,
                        const SmoothDistribution& D, const EvalMode& mode, Rng& rng);

// Pr_D[|G_S(X)| > u]
Advantage g_tail(const BlockTables& tables, const SmoothDistribution& D, int u,
                 const EvalMode& mode, Rng& rng);

// argmax of empirical advantage on the validation set; ties go to the
// earlier hypothesis in family order (const +1, const -1, ascending τ)
const ThresholdHypothesis& select(const std::vector<ThresholdHypothesis>& family,
                                  const LabeledSample& validation);

// u = ⌈√(k·ln(2k²κ)) + √(κk)⌉
int weak_learner_u(int k, double kappa);

struct WeakLearnDiagnostics {
  double advantage = 0;
  double advantage_stderr = 0;
  double g_correlation = 0;
  double g_tail = 0;
  int u = 0;
  std::string selected;  // describe() of the chosen hypothesis
  int tau = 0;
  std::vector<double> per_block_correlations;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

struct WeakLearnResult {
  ThresholdHypothesis hypothesis;
  WeakLearnDiagnostics diagnostics;
};

struct WeakLearnOptions {
  std::optional<int> u_override;
  std::uint64_t diagnostic_samples = 20000;
};

// Draws 2m points from D (first m train, last m validation), trains the
// block tables, forms the threshold family, and returns the hypothesis with
// maximum validation advantage along with the analysis diagnostics.
WeakLearnResult weak_learn(const LiftedFunction& F, const SmoothDistribution& D,
                           std::uint64_t m, double kappa, std::uint64_t seed,
                           const WeakLearnOptions& options = {});

// E_{τ ~ Uniform[-a, a]}[sign(y ≥ τ)] = clamp(y/a, -1, 1); the averaging
// oracle behind the threshold family
double threshold_smoothing_value(double y, double a);

// Memorizing baseline over an abstract explicit domain {0, ..., |D|-1}:
// predicts the memorized label on seen points and the tie rule elsewhere.
// The expected advantage over a randomized tie is Σ_{distinct seen x} D(x).
struct MemorizeResult {
  std::vector<int> labels;  // ±1 on seen points, 0 where the tie rule applies
  double expected_advantage = 0;

  // resolve unseen entries: the fixed tie if given, otherwise fresh ±1 draws
  std::vector<int> materialize(std::optional<int> fixed_tie, Rng& rng) const;
};

MemorizeResult memorizing_weak_learner(
    const std::vector<std::pair<std::size_t, int>>& sample,
    const std::vector<double>& domain_pmf);

// ⌈ln(2|H|/δ) / (2ε²)⌉
std::uint64_t uniform_convergence_sample_size(std::size_t family_size, double eps,
                                              double delta);

}  // namespace liftlab
