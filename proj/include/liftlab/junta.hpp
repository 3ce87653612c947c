#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "liftlab/boolfn.hpp"
#include "liftlab/rng.hpp"

namespace liftlab {

// α ∈ [-1,1]^k: per-coordinate correlations of the noisy channel in which
// y_i equals x_i with probability (1+α_i)/2, independently per coordinate.
struct CorrelationVector {
  int k = 0;
  std::vector<double> alpha;

  CorrelationVector() = default;
  CorrelationVector(int k_, std::vector<double> alpha_);
  static CorrelationVector constant(int k, double value);
  static CorrelationVector from_support(int k, std::uint32_t mask);

  double squared_norm() const;
};

void to_json(nlohmann::json& j, const CorrelationVector& v);
void from_json(const nlohmann::json& j, CorrelationVector& v);

// Witness that some junta on `support` is within `achieved_distance` of the
// target. For an empty support the (0-bit) constant inner function is stored
// as a 1-bit constant table.
struct JuntaCertificate {
  std::uint32_t support = 0;
  BooleanFunction inner;
  double achieved_distance = 0.0;

  // the junta's value at a full input index
  int evaluate(std::uint32_t x) const;
};

void to_json(nlohmann::json& j, const JuntaCertificate& c);
JuntaCertificate junta_certificate_from_json(const nlohmann::json& j);

// Explicit pmf over k-bit strings with a certified density c ∈ (0,1]:
// every entry is at most 1/(c·2^k). Density c equals smoothness 1/c.
class DensityDistribution {
 public:
  DensityDistribution(int bits, std::vector<double> pmf, double density);
  static DensityDistribution uniform(int bits);

  int bits() const { return bits_; }
  double density() const { return density_; }
  bool is_uniform() const { return uniform_; }
  const std::vector<double>& pmf() const { return pmf_; }
  double at(std::uint32_t x) const { return pmf_[x]; }

  // rows "index,probability"; density is validated on load
  static DensityDistribution from_csv(std::istream& in, int bits, double density);
  std::string to_csv() const;

 private:
  int bits_;
  std::vector<double> pmf_;
  double density_;
  bool uniform_ = false;
};

// Best junta supported on `support` against g under H (uniform when null):
// inner(y) = sign(E_H[g(x) | x_support = y]) with sign(0) = +1, which is
// optimal among all functions on the support. Zero-probability conditioning
// cells fall back to +1 by the same sign convention.
JuntaCertificate best_junta_on(const BooleanFunction& g, std::uint32_t support,
                               const DensityDistribution* H = nullptr);

// Smallest support size whose best junta is within delta of g, searching
// sizes ascending and subset masks in ascending order; first witness wins.
std::pair<int, JuntaCertificate> junta_complexity(
    const BooleanFunction& g, double delta,
    const DensityDistribution* H = nullptr);

// max over size-k/2 subsets of the agreement of the best junta with MAJ_k
// under uniform; k must be even and at most 16
double maj_best_halfjunta_agreement(int k);

struct DictatorAdvantage {
  double average = 0;      // (1/k)·E_H[|Σ_i x_i|]
  double mean_corr = 0;    // mean over i of E_H[MAJ_k(x)·x_i]; equals average
  double max_corr = 0;
  int argmax = 0;
  std::vector<double> per_coordinate;
};

// requires odd arity so that MAJ_k(x)·Σx_i = |Σx_i| pointwise
DictatorAdvantage dictator_advantage(const DensityDistribution& H);

// E_{y|x}[g(y)] = Σ_S ĝ(S) ∏_{i∈S} x_i α_i for the α-correlated channel
double conditional_mean(const BooleanFunction& g, const CorrelationVector& alpha,
                        std::uint32_t x);
std::vector<double> conditional_mean_table(const BooleanFunction& g,
                                           const CorrelationVector& alpha);

// Pr[g(y) != h(x)] over the α-correlated channel
double alpha_correlated_distance(const BooleanFunction& g,
                                 const BooleanFunction& h,
                                 const CorrelationVector& alpha);

// min over all h of dist_α(g, h) = E_x[(1 - |E_{y|x}[g(y)]|)/2]
double alpha_correlated_error(const BooleanFunction& g,
                              const CorrelationVector& alpha);

// E_x[Var_{y|x}[g(y)]], evaluated by both routes; they must agree to 1e-9
struct CorrelatedVariance {
  double direct = 0;    // E_x[1 - E_{y|x}[g]^2]
  double spectral = 0;  // 1 - Σ_S ĝ(S)² ∏_{i∈S} α_i²
};
CorrelatedVariance alpha_correlated_variance(const BooleanFunction& g,
                                             const CorrelationVector& alpha);

// exact E over z_i ~ Ber(α_i²) of the z-correlated-error of g; arity ≤ 12
double rounding_expected_error(const BooleanFunction& g,
                               const CorrelationVector& alpha);

struct SoftSearchConfig {
  int grid = 32;
  int restarts = 16;
  std::uint64_t seed = 0x50f7a11ull;  // frozen so results are reproducible
  int max_sweeps = 24;
  double tol = 1e-9;  // feasibility slack on the error constraint
};

struct SoftJuntaBound {
  double value = 0;  // Σ α_i² of the certificate; an upper bound on J̃(g, δ)
  CorrelationVector alpha;
};

// Feasible α with error_α(g) ≤ delta minimizing Σα_i² over the search family
// (multi-start coordinate descent on α_i² over the grid {0, 1/G, ..., 1},
// then local refinement). The 0/1 junta witness is always in the family, so
// the returned value never exceeds the exact junta complexity at delta.
SoftJuntaBound soft_junta_upper(const BooleanFunction& g, double delta,
                                const SoftSearchConfig& config = {});

// Derandomized rounding of a feasible α: the first subset z (ascending by
// size, then mask) with |z| ≤ 2·Σα_i² and z-correlated-error ≤ 4·delta.
std::optional<std::uint32_t> sandwich_support(const BooleanFunction& g,
                                              double delta,
                                              const CorrelationVector& alpha);

}  // namespace liftlab
