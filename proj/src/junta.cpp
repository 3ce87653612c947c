#include "liftlab/junta.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "liftlab/numeric.hpp"

namespace liftlab {

namespace {

// compress the coordinates of x selected by support into a dense index,
// ascending coordinate order
std::uint32_t extract_subset(std::uint32_t x, std::uint32_t support) {
  std::uint32_t y = 0;
  int out = 0;
  while (support) {
    const int i = std::countr_zero(support);
    y |= ((x >> i) & 1u) << out;
    ++out;
    support &= support - 1;
  }
  return y;
}

// per-mask products ∏_{i∈S} alpha_i, built by peeling the lowest set bit
std::vector<double> subset_products(const std::vector<double>& alpha) {
  const std::size_t size = std::size_t{1} << alpha.size();
  std::vector<double> prod(size);
  prod[0] = 1.0;
  for (std::size_t mask = 1; mask < size; ++mask) {
    const int low = std::countr_zero(mask);
    prod[mask] = prod[mask & (mask - 1)] * alpha[low];
  }
  return prod;
}

std::vector<double> scaled_inverse_transform(const FourierSpectrum& spectrum,
                                             const std::vector<double>& alpha) {
  const std::vector<double> prod = subset_products(alpha);
  FourierSpectrum scaled = spectrum;
  for (std::size_t mask = 0; mask < scaled.coeffs.size(); ++mask) {
    scaled.coeffs[mask] *= prod[mask];
  }
  return inverse_transform(scaled);
}

double error_from_spectrum(const FourierSpectrum& spectrum,
                           const std::vector<double>& alpha) {
  const std::vector<double> mean = scaled_inverse_transform(spectrum, alpha);
  KahanSum sum;
  for (double t : mean) sum.add((1.0 - std::abs(t)) / 2.0);
  return sum.value() / static_cast<double>(mean.size());
}

void check_alpha(const BooleanFunction& g, const CorrelationVector& alpha) {
  if (alpha.k != g.arity()) throw std::invalid_argument("arity mismatch");
  for (double a : alpha.alpha) {
    if (!(a >= -1.0 && a <= 1.0)) {
      throw std::invalid_argument("correlation entries must lie in [-1, 1]");
    }
  }
}

}  // namespace

CorrelationVector::CorrelationVector(int k_, std::vector<double> alpha_)
    : k(k_), alpha(std::move(alpha_)) {
  if (k < 1 || static_cast<std::size_t>(k) != alpha.size()) {
    throw std::invalid_argument("correlation vector has wrong length");
  }
  for (double a : alpha) {
    if (!(a >= -1.0 && a <= 1.0)) {
      throw std::invalid_argument("correlation entries must lie in [-1, 1]");
    }
  }
}

CorrelationVector CorrelationVector::constant(int k, double value) {
  return CorrelationVector(k, std::vector<double>(k, value));
}

CorrelationVector CorrelationVector::from_support(int k, std::uint32_t mask) {
  std::vector<double> alpha(k, 0.0);
  for (int i = 0; i < k; ++i) {
    if (mask & (1u << i)) alpha[i] = 1.0;
  }
  return CorrelationVector(k, std::move(alpha));
}

double CorrelationVector::squared_norm() const {
  KahanSum sum;
  for (double a : alpha) sum.add(a * a);
  return sum.value();
}

void to_json(nlohmann::json& j, const CorrelationVector& v) {
  j = nlohmann::json{{"k", v.k}, {"alpha", v.alpha}};
}

void from_json(const nlohmann::json& j, CorrelationVector& v) {
  v = CorrelationVector(j.at("k").get<int>(),
                        j.at("alpha").get<std::vector<double>>());
}

int JuntaCertificate::evaluate(std::uint32_t x) const {
  if (support == 0) return inner.evaluate(0);
  return inner.evaluate(extract_subset(x, support));
}

void to_json(nlohmann::json& j, const JuntaCertificate& c) {
  j = nlohmann::json{{"support", c.support},
                     {"inner_arity", c.inner.arity()},
                     {"inner_hex", c.inner.to_hex()},
                     {"achieved_distance", c.achieved_distance}};
}

JuntaCertificate junta_certificate_from_json(const nlohmann::json& j) {
  return JuntaCertificate{
      j.at("support").get<std::uint32_t>(),
      BooleanFunction::from_hex(j.at("inner_arity").get<int>(),
                                j.at("inner_hex").get<std::string>()),
      j.at("achieved_distance").get<double>()};
}

DensityDistribution::DensityDistribution(int bits, std::vector<double> pmf,
                                         double density)
    : bits_(bits), pmf_(std::move(pmf)), density_(density) {
  if (bits < 1 || bits > kMaxArity) throw std::invalid_argument("bad arity");
  if (pmf_.size() != (std::size_t{1} << bits)) {
    throw std::invalid_argument("pmf has wrong length");
  }
  if (!(density > 0.0 && density <= 1.0)) {
    throw std::invalid_argument("density must lie in (0, 1]");
  }
  KahanSum sum;
  const double cap = 1.0 / (density * static_cast<double>(pmf_.size()));
  for (double p : pmf_) {
    if (!(p >= 0.0)) throw std::invalid_argument("pmf entries must be nonnegative");
    if (p > cap + 1e-12) {
      throw std::invalid_argument("pmf violates the declared density bound");
    }
    sum.add(p);
  }
  if (std::abs(sum.value() - 1.0) > 1e-12) {
    throw std::invalid_argument("pmf must sum to 1");
  }
}

DensityDistribution DensityDistribution::uniform(int bits) {
  if (bits < 1 || bits > kMaxArity) throw std::invalid_argument("bad arity");
  const std::size_t size = std::size_t{1} << bits;
  DensityDistribution d(bits, std::vector<double>(size, 1.0 / static_cast<double>(size)), 1.0);
  d.uniform_ = true;
  return d;
}

DensityDistribution DensityDistribution::from_csv(std::istream& in, int bits,
                                                  double density) {
  const std::size_t size = std::size_t{1} << bits;
  std::vector<double> pmf(size, 0.0);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "index,probability") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("malformed csv row");
    const std::size_t index = std::stoull(line.substr(0, comma));
    if (index >= size) throw std::invalid_argument("csv index out of range");
    pmf[index] = std::stod(line.substr(comma + 1));
  }
  return DensityDistribution(bits, std::move(pmf), density);
}

std::string DensityDistribution::to_csv() const {
  std::ostringstream out;
  out << "index,probability\n";
  out.precision(17);
  for (std::size_t x = 0; x < pmf_.size(); ++x) {
    out << x << "," << pmf_[x] << "\n";
  }
  return out.str();
}

JuntaCertificate best_junta_on(const BooleanFunction& g, std::uint32_t support,
                               const DensityDistribution* H) {
  const int k = g.arity();
  const std::uint32_t size = std::uint32_t{1} << k;
  if (support >= size) throw std::invalid_argument("support is not a subset of [k]");
  if (H && H->bits() != k) throw std::invalid_argument("distribution arity mismatch");

  const int r = std::popcount(support);
  const std::uint32_t cells = std::uint32_t{1} << r;
  std::vector<KahanSum> signed_mass(cells);
  const double uniform_weight = 1.0 / static_cast<double>(size);
  for (std::uint32_t x = 0; x < size; ++x) {
    const double w = H ? H->at(x) : uniform_weight;
    signed_mass[extract_subset(x, support)].add(g.bit(x) ? w : -w);
  }

  std::vector<int> inner_values(std::max<std::uint32_t>(cells, 2), 1);
  for (std::uint32_t y = 0; y < cells; ++y) {
    inner_values[y] = signed_mass[y].value() >= 0.0 ? 1 : -1;
  }
  if (r == 0) inner_values[1] = inner_values[0];
  BooleanFunction inner = BooleanFunction::from_values(std::max(r, 1), inner_values);

  KahanSum dist;
  for (std::uint32_t x = 0; x < size; ++x) {
    const int predicted = inner_values[extract_subset(x, support)];
    if (predicted != g.evaluate(x)) dist.add(H ? H->at(x) : uniform_weight);
  }
  return JuntaCertificate{support, std::move(inner), dist.value()};
}

std::pair<int, JuntaCertificate> junta_complexity(const BooleanFunction& g,
                                                  double delta,
                                                  const DensityDistribution* H) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("delta must lie in [0, 1]");
  }
  if (g.arity() > 20) throw std::invalid_argument("exhaustive search capped at arity 20");
  const int k = g.arity();
  const std::uint32_t size = std::uint32_t{1} << k;
  for (int junta_size = 0; junta_size <= k; ++junta_size) {
    for (std::uint32_t mask = 0; mask < size; ++mask) {
      if (std::popcount(mask) != junta_size) continue;
      JuntaCertificate cert = best_junta_on(g, mask, H);
      if (cert.achieved_distance <= delta) return {junta_size, std::move(cert)};
    }
  }
  // unreachable: the full support always achieves distance 0
  throw std::logic_error("no junta found");
}

double maj_best_halfjunta_agreement(int k) {
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("k must be even");
  if (k > 16) throw std::invalid_argument("k capped at 16");
  const BooleanFunction maj = majority(k);
  const std::uint32_t size = std::uint32_t{1} << k;
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < size; ++mask) {
    if (std::popcount(mask) != k / 2) continue;
    best = std::max(best, 1.0 - best_junta_on(maj, mask).achieved_distance);
  }
  return best;
}

DictatorAdvantage dictator_advantage(const DensityDistribution& H) {
  const int k = H.bits();
  if (k % 2 == 0) throw std::invalid_argument("arity must be odd");
  const std::uint32_t size = std::uint32_t{1} << k;

  KahanSum abs_sum;
  std::vector<KahanSum> per_coord(k);
  for (std::uint32_t x = 0; x < size; ++x) {
    const double w = H.at(x);
    if (w == 0.0) continue;
    const int coord_sum = 2 * std::popcount(x) - k;
    const int maj = coord_sum >= 0 ? 1 : -1;
    abs_sum.add(w * std::abs(coord_sum));
    for (int i = 0; i < k; ++i) {
      const int xi = (x >> i) & 1 ? 1 : -1;
      per_coord[i].add(w * maj * xi);
    }
  }

  DictatorAdvantage out;
  out.average = abs_sum.value() / k;
  out.per_coordinate.resize(k);
  KahanSum mean;
  for (int i = 0; i < k; ++i) {
    out.per_coordinate[i] = per_coord[i].value();
    mean.add(out.per_coordinate[i]);
    if (i == 0 || out.per_coordinate[i] > out.max_corr) {
      out.max_corr = out.per_coordinate[i];
      out.argmax = i;
    }
  }
  out.mean_corr = mean.value() / k;
  return out;
}

double conditional_mean(const BooleanFunction& g, const CorrelationVector& alpha,
                        std::uint32_t x) {
  check_alpha(g, alpha);
  if (x >= g.table_size()) throw std::out_of_range("input index out of range");
  const FourierSpectrum spectrum = fourier(g);
  const std::vector<double> prod = subset_products(alpha.alpha);
  KahanSum sum;
  for (std::uint32_t mask = 0; mask < g.table_size(); ++mask) {
    int chi = 1;
    // χ_S(x) over the support of the mask
    if (std::popcount(mask & ~x) % 2 == 1) chi = -1;
    sum.add(spectrum.coeffs[mask] * prod[mask] * chi);
  }
  return sum.value();
}

std::vector<double> conditional_mean_table(const BooleanFunction& g,
                                           const CorrelationVector& alpha) {
  check_alpha(g, alpha);
  return scaled_inverse_transform(fourier(g), alpha.alpha);
}

double alpha_correlated_distance(const BooleanFunction& g,
                                 const BooleanFunction& h,
                                 const CorrelationVector& alpha) {
  if (h.arity() != g.arity()) throw std::invalid_argument("arity mismatch");
  const std::vector<double> mean = conditional_mean_table(g, alpha);
  KahanSum sum;
  for (std::uint32_t x = 0; x < g.table_size(); ++x) {
    sum.add((1.0 - h.evaluate(x) * mean[x]) / 2.0);
  }
  return sum.value() / static_cast<double>(g.table_size());
}

double alpha_correlated_error(const BooleanFunction& g,
                              const CorrelationVector& alpha) {
  check_alpha(g, alpha);
  return error_from_spectrum(fourier(g), alpha.alpha);
}

CorrelatedVariance alpha_correlated_variance(const BooleanFunction& g,
                                             const CorrelationVector& alpha) {
  check_alpha(g, alpha);
  const FourierSpectrum spectrum = fourier(g);
  const std::vector<double> mean = scaled_inverse_transform(spectrum, alpha.alpha);
  KahanSum direct;
  for (double t : mean) direct.add(1.0 - t * t);

  const std::vector<double> prod = subset_products(alpha.alpha);
  KahanSum weighted_power;
  for (std::uint32_t mask = 0; mask < g.table_size(); ++mask) {
    const double c = spectrum.coeffs[mask];
    weighted_power.add(c * c * prod[mask] * prod[mask]);
  }

  CorrelatedVariance out;
  out.direct = direct.value() / static_cast<double>(mean.size());
  out.spectral = 1.0 - weighted_power.value();
  if (std::abs(out.direct - out.spectral) > 1e-9) {
    throw std::logic_error("correlated-variance routes disagree");
  }
  return out;
}

double rounding_expected_error(const BooleanFunction& g,
                               const CorrelationVector& alpha) {
  check_alpha(g, alpha);
  const int k = g.arity();
  if (k > 12) throw std::invalid_argument("exact rounding enumeration capped at arity 12");
  const FourierSpectrum spectrum = fourier(g);
  std::vector<double> weight_on(k), weight_off(k);
  for (int i = 0; i < k; ++i) {
    weight_on[i] = alpha.alpha[i] * alpha.alpha[i];
    weight_off[i] = 1.0 - weight_on[i];
  }
  KahanSum expectation;
  const std::uint32_t size = std::uint32_t{1} << k;
  std::vector<double> z(k);
  for (std::uint32_t mask = 0; mask < size; ++mask) {
    double weight = 1.0;
    for (int i = 0; i < k; ++i) {
      weight *= (mask & (1u << i)) ? weight_on[i] : weight_off[i];
      z[i] = (mask & (1u << i)) ? 1.0 : 0.0;
    }
    if (weight == 0.0) continue;
    expectation.add(weight * error_from_spectrum(spectrum, z));
  }
  return expectation.value();
}

namespace {

class SoftSearch {
 public:
  SoftSearch(const BooleanFunction& g, double delta, const SoftSearchConfig& cfg)
      : spectrum_(fourier(g)), k_(g.arity()), delta_(delta), cfg_(cfg) {}

  double error_of(const std::vector<double>& s) const {
    std::vector<double> alpha(k_);
    for (int i = 0; i < k_; ++i) alpha[i] = std::sqrt(s[i]);
    return error_from_spectrum(spectrum_, alpha);
  }

  bool feasible(const std::vector<double>& s) const {
    return error_of(s) <= delta_ + cfg_.tol;
  }

  // error is non-increasing in each s_i (a weaker channel can be simulated
  // from a stronger one), so one-dimensional feasibility is monotone and
  // bisection applies
  void minimize_coordinate(std::vector<double>& s, int i) const {
    if (s[i] == 0.0) return;
    const double original = s[i];
    s[i] = 0.0;
    if (feasible(s)) return;
    // grid descent from the largest grid value below the current one
    double lo = 0.0, hi = original;
    const double step = 1.0 / cfg_.grid;
    for (int level = static_cast<int>(std::floor(original * cfg_.grid - 1e-12));
         level >= 0; --level) {
      s[i] = level * step;
      if (feasible(s)) {
        hi = s[i];
      } else {
        lo = s[i];
        break;
      }
    }
    // local refinement
    for (int iter = 0; iter < 40; ++iter) {
      const double mid = (lo + hi) / 2.0;
      s[i] = mid;
      if (feasible(s)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    s[i] = hi;
  }

  // shrink all coordinates by a common factor while staying feasible
  bool shrink_uniformly(std::vector<double>& s) const {
    std::vector<double> trial(k_);
    auto scaled = [&](double t) -> const std::vector<double>& {
      for (int i = 0; i < k_; ++i) trial[i] = t * s[i];
      return trial;
    };
    if (feasible(scaled(0.0))) {
      bool changed = false;
      for (double& v : s) {
        changed = changed || v != 0.0;
        v = 0.0;
      }
      return changed;
    }
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 50; ++iter) {
      const double mid = (lo + hi) / 2.0;
      if (feasible(scaled(mid))) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    if (hi >= 1.0 - 1e-15) return false;
    for (int i = 0; i < k_; ++i) s[i] *= hi;
    return true;
  }

  std::vector<double> optimize(std::vector<double> s) const {
    for (int sweep = 0; sweep < cfg_.max_sweeps; ++sweep) {
      const double before = sum(s);
      shrink_uniformly(s);
      for (int i = 0; i < k_; ++i) minimize_coordinate(s, i);
      if (before - sum(s) < 1e-12) break;
    }
    return s;
  }

  static double sum(const std::vector<double>& s) {
    KahanSum total;
    for (double v : s) total.add(v);
    return total.value();
  }

 private:
  FourierSpectrum spectrum_;
  int k_;
  double delta_;
  SoftSearchConfig cfg_;
};

}  // namespace

SoftJuntaBound soft_junta_upper(const BooleanFunction& g, double delta,
                                const SoftSearchConfig& config) {
  if (delta < 0.0) throw std::invalid_argument("delta must be nonnegative");
  const int k = g.arity();
  SoftSearch search(g, delta, config);

  std::vector<std::vector<double>> candidates;
  std::vector<double> ones(k, 1.0);
  candidates.push_back(search.optimize(ones));

  // the exact 0/1 witness keeps the bound at or below the junta complexity
  const auto [junta_size, cert] = junta_complexity(g, delta);
  std::vector<double> witness(k, 0.0);
  for (int i = 0; i < k; ++i) {
    if (cert.support & (1u << i)) witness[i] = 1.0;
  }
  candidates.push_back(witness);
  candidates.push_back(search.optimize(witness));

  Rng rng(config.seed);
  for (int restart = 0; restart < std::max(0, config.restarts - 2); ++restart) {
    std::vector<double> target(k);
    for (double& v : target) {
      v = static_cast<double>(rng.below(config.grid + 1)) / config.grid;
    }
    // blend from the all-ones point toward the random target as far as
    // feasibility allows, then descend from there
    std::vector<double> start(k);
    auto blend = [&](double w) -> const std::vector<double>& {
      for (int i = 0; i < k; ++i) start[i] = (1.0 - w) + w * target[i];
      return start;
    };
    double lo = 0.0, hi = 1.0;
    if (search.feasible(blend(1.0))) {
      lo = 1.0;
    } else {
      for (int iter = 0; iter < 30; ++iter) {
        const double mid = (lo + hi) / 2.0;
        if (search.feasible(blend(mid))) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
    }
    blend(lo);
    candidates.push_back(search.optimize(start));
  }

  const std::vector<double>* best = &candidates.front();
  for (const auto& c : candidates) {
    if (SoftSearch::sum(c) < SoftSearch::sum(*best)) best = &c;
  }
  std::vector<double> alpha(k);
  for (int i = 0; i < k; ++i) alpha[i] = std::sqrt((*best)[i]);
  CorrelationVector v(k, std::move(alpha));
  return SoftJuntaBound{v.squared_norm(), std::move(v)};
}

std::optional<std::uint32_t> sandwich_support(const BooleanFunction& g,
                                              double delta,
                                              const CorrelationVector& alpha) {
  check_alpha(g, alpha);
  const int k = g.arity();
  const double budget = 2.0 * alpha.squared_norm() + 1e-9;
  const std::uint32_t size = std::uint32_t{1} << k;
  for (int z_size = 0; z_size <= k; ++z_size) {
    if (z_size > budget) break;
    for (std::uint32_t mask = 0; mask < size; ++mask) {
      if (std::popcount(mask) != z_size) continue;
      const CorrelationVector z = CorrelationVector::from_support(k, mask);
      if (alpha_correlated_error(g, z) <= 4.0 * delta + 1e-9) return mask;
    }
  }
  return std::nullopt;
}

}  // namespace liftlab
