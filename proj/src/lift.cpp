#include "liftlab/lift.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "liftlab/numeric.hpp"

namespace liftlab {

namespace {

void check_shape_match(const LiftedFunction& F, const LiftedFunction& G) {
  if (F.n() != G.n() || F.k() != G.k()) {
    throw std::invalid_argument("lifted functions have different shapes");
  }
}

}  // namespace

BlockInput::BlockInput(int n_, int k_, std::vector<std::uint32_t> blocks_)
    : n(n_), k(k_), blocks(std::move(blocks_)) {
  if (n < 1 || n > kMaxArity || k < 1) throw std::invalid_argument("bad block shape");
  if (blocks.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("wrong number of blocks");
  }
  for (std::uint32_t b : blocks) {
    if (b >= (std::uint32_t{1} << n)) throw std::invalid_argument("block value out of range");
  }
}

BlockInput BlockInput::from_index(int n, int k, std::uint64_t index) {
  if (n * k > 63) throw std::invalid_argument("index form needs n·k ≤ 63");
  std::vector<std::uint32_t> blocks(k);
  const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
  for (int i = 0; i < k; ++i) {
    blocks[i] = static_cast<std::uint32_t>((index >> (i * n)) & mask);
  }
  return BlockInput(n, k, std::move(blocks));
}

std::uint64_t BlockInput::to_index() const {
  if (n * k > 63) throw std::invalid_argument("index form needs n·k ≤ 63");
  std::uint64_t index = 0;
  for (int i = 0; i < k; ++i) {
    index |= static_cast<std::uint64_t>(blocks[i]) << (i * n);
  }
  return index;
}

std::string BlockInput::to_hex() const {
  const int bits = n * k;
  const int digits = (bits + 3) / 4;
  static const char* kHex = "0123456789abcdef";
  std::string out(digits, '0');
  for (int d = 0; d < digits; ++d) {
    unsigned nibble = 0;
    for (int b = 0; b < 4; ++b) {
      const int bit = 4 * d + b;
      if (bit >= bits) continue;
      if ((blocks[bit / n] >> (bit % n)) & 1u) nibble |= 1u << b;
    }
    out[digits - 1 - d] = kHex[nibble];
  }
  return out;
}

BlockInput BlockInput::from_hex(int n, int k, const std::string& hex) {
  const int bits = n * k;
  const int digits = (bits + 3) / 4;
  if (hex.size() != static_cast<std::size_t>(digits)) {
    throw std::invalid_argument("hex string has wrong length");
  }
  std::vector<std::uint32_t> blocks(k, 0);
  for (int d = 0; d < digits; ++d) {
    const char c = hex[digits - 1 - d];
    unsigned nibble;
    if (c >= '0' && c <= '9') {
      nibble = static_cast<unsigned>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      nibble = static_cast<unsigned>(c - 'a') + 10;
    } else {
      throw std::invalid_argument("hex string must be lowercase hex");
    }
    for (int b = 0; b < 4; ++b) {
      const int bit = 4 * d + b;
      if (nibble & (1u << b)) {
        if (bit >= bits) throw std::invalid_argument("hex sets bits beyond the input");
        blocks[bit / n] |= 1u << (bit % n);
      }
    }
  }
  return BlockInput(n, k, std::move(blocks));
}

BlockInput random_block_input(int n, int k, Rng& rng) {
  std::vector<std::uint32_t> blocks(k);
  for (auto& b : blocks) {
    b = static_cast<std::uint32_t>(rng.next() >> (64 - n));
  }
  return BlockInput(n, k, std::move(blocks));
}

LiftedFunction::LiftedFunction(BooleanFunction outer,
                               std::vector<BooleanFunction> inner)
    : outer_(std::move(outer)), inner_(std::move(inner)) {
  if (inner_.size() != static_cast<std::size_t>(outer_.arity())) {
    throw std::invalid_argument("need one inner function per outer coordinate");
  }
  const int n = inner_.front().arity();
  for (std::size_t i = 0; i < inner_.size(); ++i) {
    if (inner_[i].arity() != n) {
      throw std::invalid_argument("inner function " + std::to_string(i) +
                                  " has mismatched arity");
    }
    if (!inner_[i].is_balanced()) {
      throw std::invalid_argument("inner function " + std::to_string(i) +
                                  " is not balanced");
    }
  }
}

std::uint32_t LiftedFunction::inner_image(const BlockInput& X) const {
  if (X.n != n() || X.k != k()) throw std::invalid_argument("input has wrong shape");
  std::uint32_t y = 0;
  for (int i = 0; i < k(); ++i) {
    if (inner_[i].bit(X.blocks[i])) y |= 1u << i;
  }
  return y;
}

int LiftedFunction::evaluate(const BlockInput& X) const {
  return outer_.evaluate(inner_image(X));
}

LiftedFunction random_lift(const BooleanFunction& outer, int n, Rng& rng) {
  std::vector<BooleanFunction> inner;
  inner.reserve(outer.arity());
  for (int i = 0; i < outer.arity(); ++i) inner.push_back(random_balanced(n, rng));
  return LiftedFunction(outer, std::move(inner));
}

CorrelationVector inner_correlations(const LiftedFunction& F, const LiftedFunction& G) {
  check_shape_match(F, G);
  std::vector<double> alpha(F.k());
  for (int i = 0; i < F.k(); ++i) {
    alpha[i] = correlation(F.inner()[i], G.inner()[i]);
  }
  return CorrelationVector(F.k(), std::move(alpha));
}

double exact_lift_distance(const LiftedFunction& F, const LiftedFunction& G) {
  check_shape_match(F, G);
  if (!(F.outer() == G.outer())) {
    throw std::invalid_argument("exact distance requires equal outer functions");
  }
  const int n = F.n();
  const int k = F.k();
  const double half = static_cast<double>(std::uint64_t{1} << (n - 1));

  // conditional channels P[y_i' | y_i] from the per-block joint cell counts;
  // balancedness fixes both marginals at 1/2, so rows are counts / 2^{n-1}
  struct Channel {
    double plus_to_plus, minus_to_plus;
  };
  std::vector<Channel> channels(k);
  for (int i = 0; i < k; ++i) {
    const BooleanFunction& f = F.inner()[i];
    const BooleanFunction& g = G.inner()[i];
    std::uint64_t both_plus = 0;
    for (std::size_t w = 0; w < f.words().size(); ++w) {
      both_plus += std::popcount(f.words()[w] & g.words()[w]);
    }
    const std::uint64_t g_plus = g.ones_count();  // = 2^{n-1}
    channels[i] = Channel{static_cast<double>(both_plus) / half,
                          static_cast<double>(g_plus - both_plus) / half};
  }

  // E[g(y') | y] for all y: contract the outer table with each channel
  const std::uint64_t size = std::uint64_t{1} << k;
  std::vector<double> mean(size);
  for (std::uint64_t y = 0; y < size; ++y) {
    mean[y] = F.outer().bit(y) ? 1.0 : -1.0;
  }
  for (int i = 0; i < k; ++i) {
    const std::uint64_t stride = std::uint64_t{1} << i;
    for (std::uint64_t block = 0; block < size; block += stride << 1) {
      for (std::uint64_t j = block; j < block + stride; ++j) {
        const double when_minus = mean[j];            // y_i = -1
        const double when_plus = mean[j + stride];    // y_i = +1
        const double p_plus = channels[i].plus_to_plus;
        const double p_minus = channels[i].minus_to_plus;
        mean[j] = p_minus * when_plus + (1.0 - p_minus) * when_minus;
        mean[j + stride] = p_plus * when_plus + (1.0 - p_plus) * when_minus;
      }
    }
  }

  KahanSum dist;
  for (std::uint64_t y = 0; y < size; ++y) {
    const double gy = F.outer().bit(y) ? 1.0 : -1.0;
    dist.add((1.0 - gy * mean[y]) / 2.0);
  }
  return dist.value() / static_cast<double>(size);
}

double exhaustive_lift_distance(const LiftedFunction& F, const LiftedFunction& G) {
  check_shape_match(F, G);
  const int bits = F.n() * F.k();
  if (bits > 25) throw std::invalid_argument("exhaustive distance capped at 25 bits");
  const std::uint64_t size = std::uint64_t{1} << bits;
  std::uint64_t disagreements = 0;
  for (std::uint64_t index = 0; index < size; ++index) {
    const BlockInput X = BlockInput::from_index(F.n(), F.k(), index);
    if (F.evaluate(X) != G.evaluate(X)) ++disagreements;
  }
  return static_cast<double>(disagreements) / static_cast<double>(size);
}

double mc_lift_distance(const LiftedFunction& F, const LiftedFunction& G,
                        std::uint64_t samples, Rng& rng) {
  check_shape_match(F, G);
  std::uint64_t disagreements = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const BlockInput X = random_block_input(F.n(), F.k(), rng);
    if (F.evaluate(X) != G.evaluate(X)) ++disagreements;
  }
  return static_cast<double>(disagreements) / static_cast<double>(samples);
}

DensityDistribution induced_distribution(const DensityDistribution& H, int n,
                                         const std::vector<BooleanFunction>& inner) {
  const int k = static_cast<int>(inner.size());
  if (H.bits() != n * k) throw std::invalid_argument("pmf does not match n·k bits");
  if (n * k > 20) throw std::invalid_argument("explicit pushforward capped at 20 bits");
  for (const auto& f : inner) {
    if (f.arity() != n || !f.is_balanced()) {
      throw std::invalid_argument("inner functions must be balanced with arity n");
    }
  }
  std::vector<KahanSum> out(std::size_t{1} << k);
  const std::uint64_t size = std::uint64_t{1} << (n * k);
  const std::uint64_t block_mask = (std::uint64_t{1} << n) - 1;
  for (std::uint64_t index = 0; index < size; ++index) {
    std::uint32_t y = 0;
    for (int i = 0; i < k; ++i) {
      if (inner[i].bit((index >> (i * n)) & block_mask)) y |= 1u << i;
    }
    out[y].add(H.at(static_cast<std::uint32_t>(index)));
  }
  std::vector<double> pmf(out.size());
  for (std::size_t y = 0; y < out.size(); ++y) pmf[y] = out[y].value();
  // the density bound is re-validated by the constructor
  return DensityDistribution(k, std::move(pmf), H.density());
}

ConcentrationResult concentration_experiment(int n, int k, std::uint64_t trials,
                                             std::uint64_t seed, bool fix_inner,
                                             const std::vector<double>& t_grid) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  ConcentrationResult result;
  result.n = n;
  result.k = k;
  result.trials.reserve(trials);

  std::vector<BooleanFunction> fixed;
  if (fix_inner) {
    Rng rng = Rng::substream(seed, 0xf1dull);
    for (int i = 0; i < k; ++i) fixed.push_back(random_balanced(n, rng));
  }

  KahanSum mean;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::substream(seed, trial);
    ConcentrationTrial row;
    KahanSum sum_sq;
    for (int i = 0; i < k; ++i) {
      const BooleanFunction reference =
          fix_inner ? fixed[i] : random_balanced(n, rng);
      const TwoStageSample partner = random_balanced_two_stage(n, rng);
      const double alpha = correlation(reference, partner.balanced);
      sum_sq.add(alpha * alpha);
      row.flips_total += partner.flipped;
      if (partner.flipped * 2 >
          static_cast<std::uint64_t>(std::abs(partner.unbalanced_sum))) {
        throw std::logic_error("two-stage sampler flipped more than the excess");
      }
      row.max_abs_stage_corr = std::max(
          row.max_abs_stage_corr, std::abs(correlation(reference, partner.unbalanced)));
    }
    row.sum_alpha_sq = sum_sq.value();
    mean.add(row.sum_alpha_sq);
    result.trials.push_back(row);
  }

  result.mean = mean.value() / static_cast<double>(trials);
  result.expected_mean =
      static_cast<double>(k) / (static_cast<double>(std::uint64_t{1} << n) - 1.0);
  for (double t : t_grid) {
    std::uint64_t count = 0;
    for (const auto& row : result.trials) {
      if (row.sum_alpha_sq >= t) ++count;
    }
    result.tail.emplace_back(t, static_cast<double>(count) / static_cast<double>(trials));
  }
  return result;
}

CoveringResult covering_statistic(const BooleanFunction& outer, int n,
                                  const std::function<int(const BlockInput&)>& h,
                                  std::uint64_t trials, std::uint64_t seed,
                                  std::uint64_t mc_inputs, double threshold) {
  CoveringResult result;
  result.threshold = threshold;
  result.trials = trials;
  if (trials == 0) {
    result.no_data = true;
    return result;
  }
  const int k = outer.arity();
  result.exact = n * k <= 20;
  KahanSum mean;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::substream(seed, trial);
    const LiftedFunction F = random_lift(outer, n, rng);
    double dist;
    if (result.exact) {
      const std::uint64_t size = std::uint64_t{1} << (n * k);
      std::uint64_t disagreements = 0;
      for (std::uint64_t index = 0; index < size; ++index) {
        const BlockInput X = BlockInput::from_index(n, k, index);
        if (F.evaluate(X) != h(X)) ++disagreements;
      }
      dist = static_cast<double>(disagreements) / static_cast<double>(size);
    } else {
      std::uint64_t disagreements = 0;
      for (std::uint64_t s = 0; s < mc_inputs; ++s) {
        const BlockInput X = random_block_input(n, k, rng);
        if (F.evaluate(X) != h(X)) ++disagreements;
      }
      dist = static_cast<double>(disagreements) / static_cast<double>(mc_inputs);
    }
    result.distances.push_back(dist);
    mean.add(dist);
    if (dist <= threshold) ++result.hits;
  }
  result.mean_distance = mean.value() / static_cast<double>(trials);
  result.upper95 = clopper_pearson_upper(result.hits, result.trials);
  return result;
}

namespace {

// log Pr[Bin(n, p) ≤ x] via direct summation in log space
double log_binomial_cdf(std::uint64_t x, std::uint64_t n, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return x >= n ? 0.0 : -1e300;
  double log_term = static_cast<double>(n) * std::log1p(-p);  // Pr[0]
  double log_sum = log_term;
  for (std::uint64_t i = 1; i <= x; ++i) {
    log_term += std::log(static_cast<double>(n - i + 1)) -
                std::log(static_cast<double>(i)) + std::log(p) - std::log1p(-p);
    log_sum = std::max(log_sum, log_term) +
              std::log1p(std::exp(std::min(log_sum, log_term) -
                                  std::max(log_sum, log_term)));
  }
  return log_sum;
}

}  // namespace

double clopper_pearson_upper(std::uint64_t hits, std::uint64_t trials,
                             double confidence) {
  if (trials == 0) return 1.0;
  if (hits >= trials) return 1.0;
  const double alpha = 1.0 - confidence;
  if (hits == 0) return 1.0 - std::pow(alpha, 1.0 / static_cast<double>(trials));
  // smallest p with Pr[Bin(trials, p) ≤ hits] ≤ alpha
  double lo = static_cast<double>(hits) / static_cast<double>(trials);
  double hi = 1.0;
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = (lo + hi) / 2.0;
    if (log_binomial_cdf(hits, trials, mid) > std::log(alpha)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace liftlab
