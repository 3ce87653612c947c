#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "liftlab/boolfn.hpp"
#include "liftlab/junta.hpp"
#include "liftlab/rng.hpp"

namespace liftlab {

// An n·k-bit input viewed as k blocks of n bits; block i covers input bits
// [i·n, (i+1)·n), and within a block the usual index convention applies.
struct BlockInput {
  int n = 0;
  int k = 0;
  std::vector<std::uint32_t> blocks;

  BlockInput() = default;
  BlockInput(int n_, int k_, std::vector<std::uint32_t> blocks_);
  static BlockInput from_index(int n, int k, std::uint64_t index);  // n·k ≤ 63
  std::uint64_t to_index() const;

  // packed n·k-bit string, most-significant bit first
  std::string to_hex() const;
  static BlockInput from_hex(int n, int k, const std::string& hex);

  bool operator==(const BlockInput&) const = default;
};

BlockInput random_block_input(int n, int k, Rng& rng);

// A member of Lift_n(g): the outer g on k bits applied blockwise to k
// balanced inner functions on n bits.
class LiftedFunction {
 public:
  LiftedFunction(BooleanFunction outer, std::vector<BooleanFunction> inner);

  int n() const { return inner_.front().arity(); }
  int k() const { return outer_.arity(); }
  const BooleanFunction& outer() const { return outer_; }
  const std::vector<BooleanFunction>& inner() const { return inner_; }

  // the k-bit string (f_1(X^{(1)}), ..., f_k(X^{(k)}))
  std::uint32_t inner_image(const BlockInput& X) const;
  int evaluate(const BlockInput& X) const;

 private:
  BooleanFunction outer_;
  std::vector<BooleanFunction> inner_;
};

LiftedFunction random_lift(const BooleanFunction& outer, int n, Rng& rng);

// α_i = E_x[f_i(x) f_i'(x)] per block, exact
CorrelationVector inner_correlations(const LiftedFunction& F, const LiftedFunction& G);

// dist(F, F') without enumerating 2^{nk} inputs: per block, balancedness
// makes the four joint cell counts of (f_i, f_i') determine the conditional
// channel y_i -> y_i' exactly; the outer disagreement probability is then an
// exact expectation over 2^k channel-smoothed inputs. Requires equal outers.
double exact_lift_distance(const LiftedFunction& F, const LiftedFunction& G);

// brute-force oracle companions
double exhaustive_lift_distance(const LiftedFunction& F, const LiftedFunction& G);
double mc_lift_distance(const LiftedFunction& F, const LiftedFunction& G,
                        std::uint64_t samples, Rng& rng);

// pushforward of an explicit pmf over n·k bits through the inner functions;
// the result provably keeps the input's density and is validated as such
DensityDistribution induced_distribution(const DensityDistribution& H, int n,
                                         const std::vector<BooleanFunction>& inner);

struct ConcentrationTrial {
  double sum_alpha_sq = 0;
  std::uint64_t flips_total = 0;      // two-stage coupling: entries flipped
  double max_abs_stage_corr = 0;      // largest |correlation| at the unbalanced stage
};

struct ConcentrationResult {
  int n = 0;
  int k = 0;
  std::vector<ConcentrationTrial> trials;
  double mean = 0;
  double expected_mean = 0;  // closed form k/(2^n - 1)
  std::vector<std::pair<double, double>> tail;  // (t, empirical Pr[Σα² ≥ t])
};

// Per trial, draw the reference inner functions (fresh per trial unless
// fix_inner), then independent random balanced partners via the two-stage
// sampler, and record Σ_i α_i². Substream per trial: (seed, trial).
ConcentrationResult concentration_experiment(int n, int k, std::uint64_t trials,
                                             std::uint64_t seed, bool fix_inner,
                                             const std::vector<double>& t_grid);

struct CoveringResult {
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;            // dist ≤ threshold
  double threshold = 0.01;
  double upper95 = 1.0;              // Clopper-Pearson upper bound on the hit rate
  double mean_distance = 0;
  bool exact = false;                // distances enumerated rather than sampled
  bool no_data = false;
  std::vector<double> distances;
};

// Fraction of random Lift_n(outer) members within distance `threshold` of h.
// Distances are exact when n·k ≤ 20 and Monte Carlo otherwise.
CoveringResult covering_statistic(const BooleanFunction& outer, int n,
                                  const std::function<int(const BlockInput&)>& h,
                                  std::uint64_t trials, std::uint64_t seed,
                                  std::uint64_t mc_inputs = 10000,
                                  double threshold = 0.01);

// one-sided upper confidence bound for a binomial proportion
double clopper_pearson_upper(std::uint64_t hits, std::uint64_t trials,
                             double confidence = 0.95);

}  // namespace liftlab
