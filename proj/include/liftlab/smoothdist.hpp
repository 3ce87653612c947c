#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "liftlab/junta.hpp"
#include "liftlab/lift.hpp"
#include "liftlab/rng.hpp"

namespace liftlab {

// sampling failures carry the predicate name so rejection exhaustion is
// diagnosable rather than silent
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// κ-smooth distribution over n·k-bit block inputs. A universal pmf table is
// infeasible at the shapes the experiments use, so the representation is one
// of three variants and the smoothness certificate travels with it:
//   Uniform          κ = 1 by definition.
//   Explicit         pmf table (small domains), κ validated on construction.
//   Filtered         uniform conditioned on a named predicate with
//                    acceptance probability p; κ = 1/p, where p is exact on
//                    small domains and otherwise a Monte Carlo estimate with
//                    a Wilson interval. Consumers of an estimated κ must use
//                    the interval's upper end, which kappa() returns.
class SmoothDistribution {
 public:
  enum class Kind { kUniform, kExplicit, kFiltered };

  struct FilterCertificate {
    bool exact = false;
    double p = 0;              // point estimate (exact value when exact)
    double p_lo = 0, p_hi = 0; // Wilson 95% interval (equal to p when exact)
    std::uint64_t draws = 0;
  };

  static SmoothDistribution uniform_blocks(int n, int k);
  static SmoothDistribution explicit_pmf(int n, int k, std::vector<double> pmf,
                                         double kappa);
  // predicate acceptance probability below this is rejected outright
  static constexpr double kMinAcceptance = 1e-4;
  static constexpr std::uint64_t kRejectionCap = 1000000;
  static SmoothDistribution filtered(int n, int k, std::string predicate_name,
                                     std::function<bool(const BlockInput&)> predicate,
                                     FilterCertificate certificate);

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  int k() const { return k_; }
  int domain_bits() const { return n_ * k_; }
  const std::string& predicate_name() const { return predicate_name_; }
  const std::optional<FilterCertificate>& certificate() const { return certificate_; }

  // certified smoothness parameter; for Monte Carlo certificates this is the
  // conservative upper end 1/p_lo
  double kappa() const;
  // κ as an interval [1/p_hi, 1/p_lo]; degenerate for exact certificates
  std::pair<double, double> kappa_interval() const;

  BlockInput sample(Rng& rng) const;

  // exact pmf access, available for Uniform, Explicit, and exact Filtered
  bool has_exact_pmf() const;
  double exact_pmf(std::uint64_t index) const;
  double pmf(const BlockInput& X) const { return exact_pmf(X.to_index()); }

  bool accepts(const BlockInput& X) const;  // Filtered only

 private:
  SmoothDistribution() = default;

  Kind kind_ = Kind::kUniform;
  int n_ = 0, k_ = 0;
  std::vector<double> pmf_;  // Explicit
  double declared_kappa_ = 1.0;
  std::string predicate_name_;
  std::function<bool(const BlockInput&)> predicate_;
  std::optional<FilterCertificate> certificate_;
  std::uint64_t accepted_count_ = 0;  // exact Filtered: |accepted set|
};

// Uniform over X with F(X) != f_1(X^{(1)}). Requires an odd-majority outer
// with k ≥ 3 (k = 1 makes the event impossible). p is exact when n·k ≤ 20
// and otherwise Monte Carlo estimated from `cert_draws` fresh inputs.
SmoothDistribution anti_block_distribution(const LiftedFunction& F,
                                           std::uint64_t cert_draws,
                                           std::uint64_t seed);

// Uniform conditioned on the sign of the total ±1 sum over all n·k bits.
SmoothDistribution majority_tilt_distribution(int n, int k,
                                              std::uint64_t cert_draws,
                                              std::uint64_t seed);

// Uniform conditioned on X agreeing with `value` on the bits of `mask`.
SmoothDistribution mask_condition_distribution(int n, int k, const BlockInput& mask,
                                               const BlockInput& value,
                                               std::uint64_t cert_draws,
                                               std::uint64_t seed);

struct MarginalEstimate {
  bool exact = false;
  std::vector<double> probs;          // D_i(x) for x in [0, 2^n)
  std::vector<std::uint64_t> counts;  // Monte Carlo only
  std::uint64_t draws = 0;
};

// marginal law of block i; exact for Uniform/Explicit, Monte Carlo counts
// for Filtered distributions
MarginalEstimate block_marginal(const SmoothDistribution& D, int i,
                                std::uint64_t mc_draws = 100000,
                                std::uint64_t seed = 0);

struct SmoothnessReport {
  bool exact = false;
  double observed = 0;                   // max pmf × 2^bits (exact case)
  std::optional<bool> pass;              // against the declared κ
  double interval_lo = 0, interval_hi = 0;  // estimate-only case
};

// observed smoothness against `declared` (the distribution's own certified κ
// when omitted); estimate-only distributions report the κ interval instead
// of a verdict
SmoothnessReport smoothness_check(const SmoothDistribution& D,
                                  std::optional<double> declared = std::nullopt);

}  // namespace liftlab
