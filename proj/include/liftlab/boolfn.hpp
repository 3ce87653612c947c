#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "liftlab/rng.hpp"

namespace liftlab {

// Truth tables above this arity would no longer be desk-scale for the
// exhaustive loops used throughout; raise with care.
inline constexpr int kMaxArity = 22;

// A ±1-valued function on n input bits, stored as a bit-packed truth table.
// Input strings are identified with indices in [0, 2^n): bit i of the index
// is coordinate x_i, with a set bit meaning x_i = +1. A set table bit means
// the value +1, a clear bit means -1. Values are immutable after
// construction, so instances can be shared freely between workers.
class BooleanFunction {
 public:
  BooleanFunction(int n, std::vector<std::uint64_t> table);

  static BooleanFunction constant(int n, int value);
  static BooleanFunction from_values(int n, const std::vector<int>& values);
  // f(x) = x_i
  static BooleanFunction dictator(int n, int i);
  // product of all n coordinates
  static BooleanFunction parity(int n);

  int arity() const { return n_; }
  std::uint64_t table_size() const { return std::uint64_t{1} << n_; }

  // value at input index x, as ±1; out-of-range x is a contract violation
  int evaluate(std::uint64_t x) const;
  bool bit(std::uint64_t x) const {
    return (words_[x >> 6] >> (x & 63)) & 1u;
  }

  // Σ_x f(x), exact
  std::int64_t value_sum() const;
  std::uint64_t ones_count() const;
  bool is_balanced() const { return ones_count() * 2 == table_size(); }
  BooleanFunction negated() const;

  const std::vector<std::uint64_t>& words() const { return words_; }
  bool operator==(const BooleanFunction& other) const = default;

  // canonical lowercase hex of the packed table, most-significant index first
  std::string to_hex() const;
  static BooleanFunction from_hex(int n, const std::string& hex);

 private:
  int n_;
  std::vector<std::uint64_t> words_;
};

// MAJ_k(x) = sign(Σ_i x_i), with sign(0) = +1 so even k is total.
BooleanFunction majority(int k);

// number of inputs where f and g disagree, exact
std::uint64_t disagreement_count(const BooleanFunction& f, const BooleanFunction& g);
// E_{x uniform}[f(x) g(x)], an exact multiple of 2^{1-n}
double correlation(const BooleanFunction& f, const BooleanFunction& g);
// Pr_{x uniform}[f(x) != g(x)] = (1 - correlation)/2, exact
double distance(const BooleanFunction& f, const BooleanFunction& g);

// 2^k real coefficients of a k-bit function, indexed by the subset S ⊆ [k]
// encoded as a bitmask.
struct FourierSpectrum {
  int k = 0;
  std::vector<double> coeffs;

  double parseval_sum() const;
};

// full Walsh-Hadamard transform: coeffs[S] = E_x[f(x) ∏_{i∈S} x_i]
FourierSpectrum fourier(const BooleanFunction& f);
// real-valued table x ↦ Σ_S coeffs[S] ∏_{i∈S} x_i
std::vector<double> inverse_transform(const FourierSpectrum& spectrum);
// signs of the reconstructed table; round-trips fourier() exactly
BooleanFunction inverse_fourier(const FourierSpectrum& spectrum);
// CSV rows (mask, coefficient)
std::string spectrum_csv(const FourierSpectrum& spectrum);

// uniform over tables of Hamming weight exactly 2^{n-1}
BooleanFunction random_balanced(int n, Rng& rng);

// The two-stage sampler: draw a uniform table, then flip a uniformly chosen
// half of the excess-sign entries to rebalance. The balanced output is again
// uniform over balanced tables; the intermediate table and flip count are
// kept for the concentration experiment's coupling diagnostics.
struct TwoStageSample {
  BooleanFunction unbalanced;
  BooleanFunction balanced;
  std::int64_t unbalanced_sum = 0;  // Σ_x u(x) of the first stage
  std::uint64_t flipped = 0;        // always |unbalanced_sum| / 2
};
TwoStageSample random_balanced_two_stage(int n, Rng& rng);

}  // namespace liftlab
