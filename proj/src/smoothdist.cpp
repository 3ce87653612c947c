#include "liftlab/smoothdist.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "liftlab/numeric.hpp"

namespace liftlab {

namespace {

std::pair<double, double> wilson_interval(std::uint64_t successes,
                                          std::uint64_t draws) {
  const double z = 1.959963984540054;  // 95%
  const double nn = static_cast<double>(draws);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// exact acceptance probability by enumerating the (small) domain
SmoothDistribution::FilterCertificate exact_certificate(
    int n, int k, const std::function<bool(const BlockInput&)>& predicate,
    std::uint64_t* accepted_out) {
  const std::uint64_t size = std::uint64_t{1} << (n * k);
  std::uint64_t accepted = 0;
  for (std::uint64_t index = 0; index < size; ++index) {
    if (predicate(BlockInput::from_index(n, k, index))) ++accepted;
  }
  if (accepted_out) *accepted_out = accepted;
  const double p = static_cast<double>(accepted) / static_cast<double>(size);
  return SmoothDistribution::FilterCertificate{true, p, p, p, size};
}

SmoothDistribution::FilterCertificate mc_certificate(
    int n, int k, const std::function<bool(const BlockInput&)>& predicate,
    std::uint64_t draws, std::uint64_t seed) {
  Rng rng = Rng::substream(seed, 0xce7ull);
  std::uint64_t accepted = 0;
  for (std::uint64_t d = 0; d < draws; ++d) {
    if (predicate(random_block_input(n, k, rng))) ++accepted;
  }
  const double p = static_cast<double>(accepted) / static_cast<double>(draws);
  const auto [lo, hi] = wilson_interval(accepted, draws);
  return SmoothDistribution::FilterCertificate{false, p, lo, hi, draws};
}

SmoothDistribution::FilterCertificate certify(
    int n, int k, const std::function<bool(const BlockInput&)>& predicate,
    std::uint64_t cert_draws, std::uint64_t seed) {
  if (n * k <= 20) return exact_certificate(n, k, predicate, nullptr);
  return mc_certificate(n, k, predicate, cert_draws, seed);
}

}  // namespace

SmoothDistribution SmoothDistribution::uniform_blocks(int n, int k) {
  if (n < 1 || n > kMaxArity || k < 1) throw std::invalid_argument("bad block shape");
  SmoothDistribution d;
  d.kind_ = Kind::kUniform;
  d.n_ = n;
  d.k_ = k;
  d.declared_kappa_ = 1.0;
  return d;
}

SmoothDistribution SmoothDistribution::explicit_pmf(int n, int k,
                                                    std::vector<double> pmf,
                                                    double kappa) {
  if (n < 1 || k < 1 || n * k > 20) {
    throw std::invalid_argument("explicit pmfs are capped at 20 bits");
  }
  const std::uint64_t size = std::uint64_t{1} << (n * k);
  if (pmf.size() != size) throw std::invalid_argument("pmf has wrong length");
  if (kappa < 1.0) throw std::invalid_argument("kappa must be at least 1");
  KahanSum sum;
  const double cap = kappa / static_cast<double>(size);
  for (double p : pmf) {
    if (!(p >= 0.0)) throw std::invalid_argument("pmf entries must be nonnegative");
    if (p > cap + 1e-12) {
      throw std::invalid_argument("pmf violates the declared smoothness");
    }
    sum.add(p);
  }
  if (std::abs(sum.value() - 1.0) > 1e-9) {
    throw std::invalid_argument("pmf must sum to 1");
  }
  SmoothDistribution d;
  d.kind_ = Kind::kExplicit;
  d.n_ = n;
  d.k_ = k;
  d.pmf_ = std::move(pmf);
  d.declared_kappa_ = kappa;
  return d;
}

SmoothDistribution SmoothDistribution::filtered(
    int n, int k, std::string predicate_name,
    std::function<bool(const BlockInput&)> predicate,
    FilterCertificate certificate) {
  if (n < 1 || n > kMaxArity || k < 1) throw std::invalid_argument("bad block shape");
  const double p_floor = certificate.exact ? certificate.p : certificate.p_lo;
  if (p_floor < kMinAcceptance) {
    throw std::invalid_argument("predicate '" + predicate_name +
                                "' accepts too rarely (p below " +
                                std::to_string(kMinAcceptance) + ")");
  }
  SmoothDistribution d;
  d.kind_ = Kind::kFiltered;
  d.n_ = n;
  d.k_ = k;
  d.predicate_name_ = std::move(predicate_name);
  d.predicate_ = std::move(predicate);
  d.certificate_ = certificate;
  if (certificate.exact && n * k <= 20) {
    d.accepted_count_ = static_cast<std::uint64_t>(
        std::llround(certificate.p * static_cast<double>(std::uint64_t{1} << (n * k))));
  }
  return d;
}

double SmoothDistribution::kappa() const {
  switch (kind_) {
    case Kind::kUniform:
      return 1.0;
    case Kind::kExplicit:
      return declared_kappa_;
    case Kind::kFiltered:
      return 1.0 / (certificate_->exact ? certificate_->p : certificate_->p_lo);
  }
  return 1.0;
}

std::pair<double, double> SmoothDistribution::kappa_interval() const {
  if (kind_ != Kind::kFiltered || certificate_->exact) {
    const double k = kappa();
    return {k, k};
  }
  return {1.0 / certificate_->p_hi, 1.0 / certificate_->p_lo};
}

BlockInput SmoothDistribution::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::kUniform:
      return random_block_input(n_, k_, rng);
    case Kind::kExplicit: {
      // inverse-CDF walk; exact and platform independent
      double u = rng.uniform();
      for (std::uint64_t index = 0; index < pmf_.size(); ++index) {
        u -= pmf_[index];
        if (u < 0.0) return BlockInput::from_index(n_, k_, index);
      }
      return BlockInput::from_index(n_, k_, pmf_.size() - 1);
    }
    case Kind::kFiltered: {
      for (std::uint64_t attempt = 0; attempt < kRejectionCap; ++attempt) {
        BlockInput X = random_block_input(n_, k_, rng);
        if (predicate_(X)) return X;
      }
      throw SamplingError("rejection budget exhausted for predicate '" +
                          predicate_name_ + "'");
    }
  }
  throw std::logic_error("unreachable");
}

bool SmoothDistribution::has_exact_pmf() const {
  switch (kind_) {
    case Kind::kUniform:
      return true;
    case Kind::kExplicit:
      return true;
    case Kind::kFiltered:
      return certificate_->exact && domain_bits() <= 20;
  }
  return false;
}

double SmoothDistribution::exact_pmf(std::uint64_t index) const {
  switch (kind_) {
    case Kind::kUniform:
      return 1.0 / static_cast<double>(std::uint64_t{1} << domain_bits());
    case Kind::kExplicit:
      return pmf_[index];
    case Kind::kFiltered: {
      if (!has_exact_pmf()) {
        throw std::logic_error("pmf of an estimate-only filtered distribution");
      }
      const BlockInput X = BlockInput::from_index(n_, k_, index);
      return predicate_(X) ? 1.0 / static_cast<double>(accepted_count_) : 0.0;
    }
  }
  throw std::logic_error("unreachable");
}

bool SmoothDistribution::accepts(const BlockInput& X) const {
  if (kind_ != Kind::kFiltered) throw std::logic_error("not a filtered distribution");
  return predicate_(X);
}

SmoothDistribution anti_block_distribution(const LiftedFunction& F,
                                           std::uint64_t cert_draws,
                                           std::uint64_t seed) {
  const int k = F.k();
  if (k % 2 == 0 || !(F.outer() == majority(k))) {
    throw std::invalid_argument("anti-block conditioning needs an odd majority outer");
  }
  if (k == 1) {
    throw std::invalid_argument("k = 1 makes the anti-block event impossible");
  }
  // copy the lift by value so the distribution owns its predicate
  auto predicate = [F](const BlockInput& X) {
    return F.evaluate(X) != F.inner()[0].evaluate(X.blocks[0]);
  };
  const auto cert = certify(F.n(), k, predicate, cert_draws, seed);
  return SmoothDistribution::filtered(F.n(), k, "anti-block", predicate, cert);
}

SmoothDistribution majority_tilt_distribution(int n, int k,
                                              std::uint64_t cert_draws,
                                              std::uint64_t seed) {
  auto predicate = [n, k](const BlockInput& X) {
    int sum = 0;
    for (int i = 0; i < k; ++i) sum += 2 * std::popcount(X.blocks[i]);
    return sum >= n * k;  // Σ ±1 over all bits ≥ 0
  };
  const auto cert = certify(n, k, predicate, cert_draws, seed);
  return SmoothDistribution::filtered(n, k, "majority-tilt", predicate, cert);
}

SmoothDistribution mask_condition_distribution(int n, int k, const BlockInput& mask,
                                               const BlockInput& value,
                                               std::uint64_t cert_draws,
                                               std::uint64_t seed) {
  if (mask.n != n || mask.k != k || value.n != n || value.k != k) {
    throw std::invalid_argument("mask and value must match the block shape");
  }
  auto predicate = [mask, value](const BlockInput& X) {
    for (std::size_t i = 0; i < X.blocks.size(); ++i) {
      if ((X.blocks[i] & mask.blocks[i]) != (value.blocks[i] & mask.blocks[i])) {
        return false;
      }
    }
    return true;
  };
  const auto cert = certify(n, k, predicate, cert_draws, seed);
  return SmoothDistribution::filtered(n, k, "mask-condition", predicate, cert);
}

MarginalEstimate block_marginal(const SmoothDistribution& D, int i,
                                std::uint64_t mc_draws, std::uint64_t seed) {
  if (i < 0 || i >= D.k()) throw std::out_of_range("block index out of range");
  const std::uint64_t block_size = std::uint64_t{1} << D.n();
  MarginalEstimate out;
  out.probs.assign(block_size, 0.0);

  if (D.kind() == SmoothDistribution::Kind::kUniform) {
    out.exact = true;
    std::fill(out.probs.begin(), out.probs.end(),
              1.0 / static_cast<double>(block_size));
    return out;
  }
  if (D.has_exact_pmf()) {
    out.exact = true;
    std::vector<KahanSum> sums(block_size);
    const std::uint64_t size = std::uint64_t{1} << D.domain_bits();
    const std::uint64_t mask = block_size - 1;
    for (std::uint64_t index = 0; index < size; ++index) {
      sums[(index >> (i * D.n())) & mask].add(D.exact_pmf(index));
    }
    for (std::uint64_t x = 0; x < block_size; ++x) out.probs[x] = sums[x].value();
    return out;
  }

  // Monte Carlo estimates with raw counts
  Rng rng = Rng::substream(seed, 0x3a6ull, static_cast<std::uint64_t>(i));
  out.counts.assign(block_size, 0);
  out.draws = mc_draws;
  for (std::uint64_t d = 0; d < mc_draws; ++d) {
    out.counts[D.sample(rng).blocks[i]] += 1;
  }
  for (std::uint64_t x = 0; x < block_size; ++x) {
    out.probs[x] = static_cast<double>(out.counts[x]) / static_cast<double>(mc_draws);
  }
  return out;
}

SmoothnessReport smoothness_check(const SmoothDistribution& D,
                                  std::optional<double> declared) {
  SmoothnessReport report;
  if (D.has_exact_pmf()) {
    report.exact = true;
    double max_pmf = 0.0;
    const std::uint64_t size = std::uint64_t{1} << D.domain_bits();
    for (std::uint64_t index = 0; index < size; ++index) {
      max_pmf = std::max(max_pmf, D.exact_pmf(index));
    }
    report.observed = max_pmf * static_cast<double>(size);
    report.pass = report.observed <= declared.value_or(D.kappa()) + 1e-12;
    report.interval_lo = report.interval_hi = report.observed;
    return report;
  }
  // estimate-only: report the κ interval instead of a verdict
  const auto [lo, hi] = D.kappa_interval();
  report.exact = false;
  report.interval_lo = lo;
  report.interval_hi = hi;
  report.observed = (lo + hi) / 2.0;
  return report;
}

}  // namespace liftlab
