#include "liftlab/boolfn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace liftlab {

namespace {

std::uint64_t word_count(int n) {
  const std::uint64_t bits = std::uint64_t{1} << n;
  return bits < 64 ? 1 : bits / 64;
}

void check_arity(int n) {
  if (n < 1 || n > kMaxArity) {
    throw std::invalid_argument("arity must be in [1, " +
                                std::to_string(kMaxArity) + "], got " +
                                std::to_string(n));
  }
}

// zero any bits beyond the 2^n used entries so popcounts stay exact
void mask_tail(int n, std::vector<std::uint64_t>& words) {
  const std::uint64_t bits = std::uint64_t{1} << n;
  if (bits < 64) words.back() &= (std::uint64_t{1} << bits) - 1;
}

}  // namespace

BooleanFunction::BooleanFunction(int n, std::vector<std::uint64_t> table)
    : n_(n), words_(std::move(table)) {
  check_arity(n);
  if (words_.size() != word_count(n)) {
    throw std::invalid_argument("table has wrong length for arity " +
                                std::to_string(n));
  }
  mask_tail(n_, words_);
}

BooleanFunction BooleanFunction::constant(int n, int value) {
  check_arity(n);
  std::vector<std::uint64_t> words(word_count(n),
                                   value > 0 ? ~std::uint64_t{0} : 0);
  return BooleanFunction(n, std::move(words));
}

BooleanFunction BooleanFunction::from_values(int n, const std::vector<int>& values) {
  check_arity(n);
  if (values.size() != (std::uint64_t{1} << n)) {
    throw std::invalid_argument("value list has wrong length");
  }
  std::vector<std::uint64_t> words(word_count(n), 0);
  for (std::uint64_t x = 0; x < values.size(); ++x) {
    if (values[x] != 1 && values[x] != -1) {
      throw std::invalid_argument("values must be ±1");
    }
    if (values[x] > 0) words[x >> 6] |= std::uint64_t{1} << (x & 63);
  }
  return BooleanFunction(n, std::move(words));
}

BooleanFunction BooleanFunction::dictator(int n, int i) {
  check_arity(n);
  if (i < 0 || i >= n) throw std::invalid_argument("dictator coordinate out of range");
  std::vector<std::uint64_t> words(word_count(n), 0);
  const std::uint64_t size = std::uint64_t{1} << n;
  for (std::uint64_t x = 0; x < size; ++x) {
    if ((x >> i) & 1) words[x >> 6] |= std::uint64_t{1} << (x & 63);
  }
  return BooleanFunction(n, std::move(words));
}

BooleanFunction BooleanFunction::parity(int n) {
  check_arity(n);
  std::vector<std::uint64_t> words(word_count(n), 0);
  const std::uint64_t size = std::uint64_t{1} << n;
  for (std::uint64_t x = 0; x < size; ++x) {
    // ∏ x_i = +1 iff the number of -1 coordinates (clear bits) is even
    const int minus_ones = n - std::popcount(x);
    if (minus_ones % 2 == 0) words[x >> 6] |= std::uint64_t{1} << (x & 63);
  }
  return BooleanFunction(n, std::move(words));
}

int BooleanFunction::evaluate(std::uint64_t x) const {
  if (x >= table_size()) throw std::out_of_range("input index out of range");
  return bit(x) ? 1 : -1;
}

std::uint64_t BooleanFunction::ones_count() const {
  std::uint64_t total = 0;
  for (std::uint64_t w : words_) total += std::popcount(w);
  return total;
}

std::int64_t BooleanFunction::value_sum() const {
  return 2 * static_cast<std::int64_t>(ones_count()) -
         static_cast<std::int64_t>(table_size());
}

BooleanFunction BooleanFunction::negated() const {
  std::vector<std::uint64_t> words(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) words[i] = ~words_[i];
  return BooleanFunction(n_, std::move(words));
}

std::string BooleanFunction::to_hex() const {
  const std::uint64_t bits = table_size();
  const std::uint64_t digits = bits < 4 ? 1 : bits / 4;
  std::string out(digits, '0');
  static const char* kHex = "0123456789abcdef";
  for (std::uint64_t d = 0; d < digits; ++d) {
    // digit d (from the right) covers indices [4d, 4d+4)
    unsigned nibble = 0;
    for (unsigned b = 0; b < 4; ++b) {
      const std::uint64_t x = 4 * d + b;
      if (x < bits && bit(x)) nibble |= 1u << b;
    }
    out[digits - 1 - d] = kHex[nibble];
  }
  return out;
}

BooleanFunction BooleanFunction::from_hex(int n, const std::string& hex) {
  check_arity(n);
  const std::uint64_t bits = std::uint64_t{1} << n;
  const std::uint64_t digits = bits < 4 ? 1 : bits / 4;
  if (hex.size() != digits) {
    throw std::invalid_argument("hex string has wrong length for arity " +
                                std::to_string(n));
  }
  std::vector<std::uint64_t> words(word_count(n), 0);
  for (std::uint64_t d = 0; d < digits; ++d) {
    const char c = hex[digits - 1 - d];
    unsigned nibble;
    if (c >= '0' && c <= '9') {
      nibble = static_cast<unsigned>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      nibble = static_cast<unsigned>(c - 'a') + 10;
    } else {
      throw std::invalid_argument("hex string must be lowercase hex");
    }
    for (unsigned b = 0; b < 4; ++b) {
      const std::uint64_t x = 4 * d + b;
      if (nibble & (1u << b)) {
        if (x >= bits) throw std::invalid_argument("hex sets bits beyond the table");
        words[x >> 6] |= std::uint64_t{1} << (x & 63);
      }
    }
  }
  return BooleanFunction(n, std::move(words));
}

BooleanFunction majority(int k) {
  check_arity(k);
  std::vector<std::uint64_t> words(word_count(k), 0);
  const std::uint64_t size = std::uint64_t{1} << k;
  for (std::uint64_t x = 0; x < size; ++x) {
    // Σ x_i = 2·popcount(x) - k; sign(0) = +1
    if (2 * std::popcount(x) >= k) words[x >> 6] |= std::uint64_t{1} << (x & 63);
  }
  return BooleanFunction(k, std::move(words));
}

std::uint64_t disagreement_count(const BooleanFunction& f, const BooleanFunction& g) {
  if (f.arity() != g.arity()) throw std::invalid_argument("arity mismatch");
  std::uint64_t diff = 0;
  for (std::size_t i = 0; i < f.words().size(); ++i) {
    diff += std::popcount(f.words()[i] ^ g.words()[i]);
  }
  return diff;
}

double correlation(const BooleanFunction& f, const BooleanFunction& g) {
  const std::int64_t size = static_cast<std::int64_t>(f.table_size());
  const std::int64_t diff = static_cast<std::int64_t>(disagreement_count(f, g));
  return static_cast<double>(size - 2 * diff) / static_cast<double>(size);
}

double distance(const BooleanFunction& f, const BooleanFunction& g) {
  return static_cast<double>(disagreement_count(f, g)) /
         static_cast<double>(f.table_size());
}

double FourierSpectrum::parseval_sum() const {
  double total = 0, comp = 0;
  for (double c : coeffs) {
    // Kahan
    const double y = c * c - comp;
    const double t = total + y;
    comp = (t - total) - y;
    total = t;
  }
  return total;
}

FourierSpectrum fourier(const BooleanFunction& f) {
  const std::uint64_t size = f.table_size();
  std::vector<double> a(size);
  for (std::uint64_t x = 0; x < size; ++x) a[x] = f.bit(x) ? 1.0 : -1.0;
  // butterfly per index bit; low half is x_i = -1, high half x_i = +1
  for (std::uint64_t len = 1; len < size; len <<= 1) {
    for (std::uint64_t block = 0; block < size; block += len << 1) {
      for (std::uint64_t j = block; j < block + len; ++j) {
        const double lo = a[j];
        const double hi = a[j + len];
        a[j] = lo + hi;
        a[j + len] = hi - lo;
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(size);
  for (double& c : a) c *= scale;
  return FourierSpectrum{f.arity(), std::move(a)};
}

std::vector<double> inverse_transform(const FourierSpectrum& spectrum) {
  const std::uint64_t size = std::uint64_t{1} << spectrum.k;
  if (spectrum.coeffs.size() != size) {
    throw std::invalid_argument("spectrum has wrong length");
  }
  std::vector<double> a = spectrum.coeffs;
  for (std::uint64_t len = 1; len < size; len <<= 1) {
    for (std::uint64_t block = 0; block < size; block += len << 1) {
      for (std::uint64_t j = block; j < block + len; ++j) {
        const double without = a[j];
        const double with_bit = a[j + len];
        a[j] = without - with_bit;
        a[j + len] = without + with_bit;
      }
    }
  }
  return a;
}

BooleanFunction inverse_fourier(const FourierSpectrum& spectrum) {
  const std::vector<double> values = inverse_transform(spectrum);
  std::vector<int> signs(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) signs[i] = values[i] >= 0 ? 1 : -1;
  return BooleanFunction::from_values(spectrum.k, signs);
}

std::string spectrum_csv(const FourierSpectrum& spectrum) {
  std::ostringstream out;
  out << "mask,coefficient\n";
  out.precision(17);
  for (std::size_t mask = 0; mask < spectrum.coeffs.size(); ++mask) {
    out << mask << "," << spectrum.coeffs[mask] << "\n";
  }
  return out.str();
}

BooleanFunction random_balanced(int n, Rng& rng) {
  check_arity(n);
  const std::uint64_t size = std::uint64_t{1} << n;
  std::vector<int> values(size, -1);
  std::fill(values.begin(), values.begin() + size / 2, 1);
  // Fisher-Yates with the library stream
  for (std::uint64_t i = size - 1; i > 0; --i) {
    std::swap(values[i], values[rng.below(i + 1)]);
  }
  return BooleanFunction::from_values(n, values);
}

TwoStageSample random_balanced_two_stage(int n, Rng& rng) {
  check_arity(n);
  const std::uint64_t size = std::uint64_t{1} << n;
  std::vector<std::uint64_t> words(word_count(n));
  for (auto& w : words) w = rng.next();
  mask_tail(n, words);
  BooleanFunction unbalanced(n, words);

  const std::int64_t excess = unbalanced.value_sum();
  const std::uint64_t to_flip = static_cast<std::uint64_t>(std::abs(excess)) / 2;
  // indices currently holding the majority sign
  const bool flip_ones = excess > 0;
  std::vector<std::uint64_t> pool;
  pool.reserve(size / 2 + to_flip);
  for (std::uint64_t x = 0; x < size; ++x) {
    if (unbalanced.bit(x) == flip_ones) pool.push_back(x);
  }
  // choose to_flip distinct entries uniformly (partial Fisher-Yates)
  for (std::uint64_t j = 0; j < to_flip; ++j) {
    std::swap(pool[j], pool[j + rng.below(pool.size() - j)]);
  }
  std::vector<std::uint64_t> flipped_words = unbalanced.words();
  for (std::uint64_t j = 0; j < to_flip; ++j) {
    flipped_words[pool[j] >> 6] ^= std::uint64_t{1} << (pool[j] & 63);
  }
  BooleanFunction balanced(n, std::move(flipped_words));
  return TwoStageSample{std::move(unbalanced), std::move(balanced), excess, to_flip};
}

}  // namespace liftlab
