#include <stdexcept>
#include <bit>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "liftlab/junta.hpp"

using namespace liftlab;

namespace {

BooleanFunction random_function(int n, Rng& rng) {
  std::vector<int> values(std::uint64_t{1} << n);
  for (auto& v : values) v = rng.sign();
  return BooleanFunction::from_values(n, values);
}

std::uint32_t extract(std::uint32_t x, std::uint32_t support) {
  std::uint32_t y = 0;
  int out = 0;
  for (int i = 0; i < 32; ++i) {
    if (support & (1u << i)) {
      y |= ((x >> i) & 1u) << out;
      ++out;
    }
  }
  return y;
}

// brute force over every inner function on the support
double best_junta_distance_exhaustive(const BooleanFunction& g, std::uint32_t support,
                                      const DensityDistribution& H) {
  const int r = std::popcount(support);
  const std::uint64_t inner_count = std::uint64_t{1} << (std::uint64_t{1} << r);
  double best = 2.0;
  for (std::uint64_t table = 0; table < inner_count; ++table) {
    double dist = 0;
    for (std::uint32_t x = 0; x < g.table_size(); ++x) {
      const int predicted = (table >> extract(x, support)) & 1 ? 1 : -1;
      if (predicted != g.evaluate(x)) dist += H.at(x);
    }
    best = std::min(best, dist);
  }
  return best;
}

DensityDistribution random_density(int bits, Rng& rng) {
  const std::size_t size = std::size_t{1} << bits;
  std::vector<double> pmf(size);
  double total = 0;
  for (double& p : pmf) {
    p = rng.uniform() + 0.01;
    total += p;
  }
  double max_p = 0;
  for (double& p : pmf) {
    p /= total;
    max_p = std::max(max_p, p);
  }
  const double density = std::min(1.0, 1.0 / (max_p * static_cast<double>(size)));
  return DensityDistribution(bits, std::move(pmf), density);
}

// E_{y|x}[g(y)] by enumerating the channel outcomes directly
double channel_mean_oracle(const BooleanFunction& g, const CorrelationVector& alpha,
                           std::uint32_t x) {
  double mean = 0;
  for (std::uint32_t y = 0; y < g.table_size(); ++y) {
    double p = 1.0;
    for (int i = 0; i < g.arity(); ++i) {
      const bool same = ((x >> i) & 1u) == ((y >> i) & 1u);
      p *= same ? (1.0 + alpha.alpha[i]) / 2.0 : (1.0 - alpha.alpha[i]) / 2.0;
    }
    mean += p * g.evaluate(y);
  }
  return mean;
}

}  // namespace

TEST_SUITE("junta") {

TEST_CASE("best junta on a subset") {
  const BooleanFunction maj3 = majority(3);

  SUBCASE("single coordinate of majority is the dictator") {
    const JuntaCertificate cert = best_junta_on(maj3, 0b001);
    CHECK(cert.achieved_distance == 0.25);
    CHECK(cert.inner == BooleanFunction::dictator(1, 0));
  }
  SUBCASE("full support reproduces the function") {
    const JuntaCertificate cert = best_junta_on(maj3, 0b111);
    CHECK(cert.achieved_distance == 0.0);
  }
  SUBCASE("two coordinates of majority still err on a quarter") {
    CHECK(best_junta_on(maj3, 0b011).achieved_distance == 0.25);
  }
  SUBCASE("empty support gives the best constant") {
    const JuntaCertificate cert = best_junta_on(maj3, 0);
    CHECK(cert.achieved_distance == 0.5);
    CHECK(cert.evaluate(5) == 1);  // sign(0) tie goes to +1 for balanced g
  }
  SUBCASE("zero-probability conditioning cells fall back to +1") {
    // mass only on inputs with x_0 = +1, so the y = -1 cell is empty
    std::vector<double> pmf = {0.0, 0.5, 0.0, 0.5};
    const DensityDistribution H(2, pmf, 0.5);
    const JuntaCertificate cert = best_junta_on(BooleanFunction::parity(2), 0b01, &H);
    CHECK(cert.inner.evaluate(0) == 1);
  }
  SUBCASE("matches the exhaustive search over all inner functions") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
      const int k = 1 + static_cast<int>(rng.below(4));
      const BooleanFunction g = random_function(k, rng);
      const std::uint32_t support =
          static_cast<std::uint32_t>(rng.below(std::uint64_t{1} << k));
      const DensityDistribution H = random_density(k, rng);
      const JuntaCertificate cert = best_junta_on(g, support, &H);
      const double oracle = best_junta_distance_exhaustive(g, support, H);
      CHECK(cert.achieved_distance == doctest::Approx(oracle).epsilon(1e-12));
      // the certificate's distance is reproducible from its own junta
      double recomputed = 0;
      for (std::uint32_t x = 0; x < g.table_size(); ++x) {
        if (cert.evaluate(x) != g.evaluate(x)) recomputed += H.at(x);
      }
      CHECK(cert.achieved_distance == doctest::Approx(recomputed).epsilon(1e-12));
    }
  }
}

TEST_CASE("junta complexity of majority") {
  const BooleanFunction maj3 = majority(3);
  const auto [j_quarter, cert_q] = junta_complexity(maj3, 0.25);
  CHECK(j_quarter == 1);
  CHECK(cert_q.achieved_distance == 0.25);
  // first witness in ascending (size, mask) order
  CHECK(cert_q.support == 0b001);

  // every 1- and 2-subset achieves exactly 0.25, so 0.24 forces all three bits
  const auto [j_tight, cert_t] = junta_complexity(maj3, 0.24);
  CHECK(j_tight == 3);
  CHECK(cert_t.achieved_distance == 0.0);

  // a constant errs on exactly half for any balanced target
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const BooleanFunction g = random_balanced(3, rng);
    CHECK(junta_complexity(g, 0.5).first == 0);
  }
}

TEST_CASE("junta complexity is invariant under coordinate permutations") {
  Rng rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(3));
    const BooleanFunction g = random_function(k, rng);
    // random permutation of coordinates
    std::vector<int> perm(k);
    for (int i = 0; i < k; ++i) perm[i] = i;
    for (int i = k - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<int> permuted(g.table_size());
    for (std::uint32_t x = 0; x < g.table_size(); ++x) {
      std::uint32_t px = 0;
      for (int i = 0; i < k; ++i) {
        if ((x >> i) & 1u) px |= 1u << perm[i];
      }
      permuted[px] = g.evaluate(x);
    }
    const BooleanFunction gp = BooleanFunction::from_values(k, permuted);
    const double delta = rng.uniform() * 0.5;
    const auto [j1, c1] = junta_complexity(g, delta);
    const auto [j2, c2] = junta_complexity(gp, delta);
    CHECK(j1 == j2);
  }
}

TEST_CASE("half-junta agreement with majority") {
  // exhaustive oracle values; the sign(0) = +1 convention makes the k ≡ 0
  // (mod 4) cases benefit from ties, so the sequence is not monotone
  CHECK(maj_best_halfjunta_agreement(4) == 0.8125);
  CHECK(maj_best_halfjunta_agreement(6) == 0.75);
  CHECK(maj_best_halfjunta_agreement(8) == 0.78515625);
  CHECK(maj_best_halfjunta_agreement(10) == 0.75);

  CHECK(maj_best_halfjunta_agreement(4) >= 0.75);
  CHECK(maj_best_halfjunta_agreement(4) <= 0.9);
  CHECK_THROWS_AS(maj_best_halfjunta_agreement(5), std::invalid_argument);
}

TEST_CASE("dictator advantage identity") {
  SUBCASE("uniform on three bits") {
    const DictatorAdvantage adv = dictator_advantage(DensityDistribution::uniform(3));
    CHECK(adv.average == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(adv.max_corr == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(adv.average - adv.mean_corr) < 1e-15);
  }
  SUBCASE("point mass on the all-ones input") {
    const int k = 3;
    std::vector<double> pmf(8, 0.0);
    pmf[7] = 1.0;
    const DensityDistribution H(k, pmf, 1.0 / 8.0);
    CHECK(dictator_advantage(H).average == doctest::Approx(1.0));
  }
  SUBCASE("even arity is rejected") {
    CHECK_THROWS_AS(dictator_advantage(DensityDistribution::uniform(4)),
                    std::invalid_argument);
  }
  SUBCASE("identity holds exactly on random densities") {
    Rng rng(301);
    for (int trial = 0; trial < 50; ++trial) {
      const int k = 3 + 2 * static_cast<int>(rng.below(3));  // 3, 5, 7
      const DictatorAdvantage adv = dictator_advantage(random_density(k, rng));
      CHECK(std::abs(adv.average - adv.mean_corr) < 1e-12);
      CHECK(adv.max_corr >= adv.mean_corr - 1e-15);
    }
  }
}

TEST_CASE("conditional mean over the correlated channel") {
  const BooleanFunction parity2 = BooleanFunction::parity(2);

  SUBCASE("all-ones channel is noiseless") {
    const CorrelationVector ones = CorrelationVector::constant(2, 1.0);
    for (std::uint32_t x = 0; x < 4; ++x) {
      CHECK(conditional_mean(parity2, ones, x) ==
            doctest::Approx(parity2.evaluate(x)).epsilon(1e-12));
    }
  }
  SUBCASE("all-zeros channel returns the mean") {
    const BooleanFunction maj3 = majority(3);
    const CorrelationVector zeros = CorrelationVector::constant(3, 0.0);
    CHECK(conditional_mean(maj3, zeros, 5) == doctest::Approx(0.0));
  }
  SUBCASE("worked parity example") {
    const CorrelationVector alpha(2, {0.6, 0.5});
    CHECK(conditional_mean(parity2, alpha, 0b11) == doctest::Approx(0.30));
    CHECK(channel_mean_oracle(parity2, alpha, 0b11) == doctest::Approx(0.30));
  }
  SUBCASE("spectral route equals direct channel enumeration") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
      const int k = 1 + static_cast<int>(rng.below(8));
      const BooleanFunction g = random_function(k, rng);
      std::vector<double> a(k);
      for (double& v : a) v = 2.0 * rng.uniform() - 1.0;
      const CorrelationVector alpha(k, a);
      const std::vector<double> table = conditional_mean_table(g, alpha);
      for (int probe = 0; probe < 8; ++probe) {
        const std::uint32_t x =
            static_cast<std::uint32_t>(rng.below(g.table_size()));
        const double oracle = channel_mean_oracle(g, alpha, x);
        CHECK(std::abs(table[x] - oracle) < 1e-9);
        CHECK(std::abs(conditional_mean(g, alpha, x) - oracle) < 1e-9);
      }
    }
  }
}

TEST_CASE("alpha-correlated error") {
  const BooleanFunction parity2 = BooleanFunction::parity(2);
  CHECK(alpha_correlated_error(parity2, CorrelationVector::constant(2, 1.0)) ==
        doctest::Approx(0.0));
  CHECK(alpha_correlated_error(parity2, CorrelationVector(2, {0.6, 0.5})) ==
        doctest::Approx(0.35));
  CHECK(alpha_correlated_error(majority(3), CorrelationVector::constant(3, 0.0)) ==
        doctest::Approx(0.5));

  SUBCASE("equals the minimum over all hypotheses") {
    Rng rng(55);
    for (int trial = 0; trial < 30; ++trial) {
      const int k = 1 + static_cast<int>(rng.below(3));
      const BooleanFunction g = random_function(k, rng);
      std::vector<double> a(k);
      for (double& v : a) v = 2.0 * rng.uniform() - 1.0;
      const CorrelationVector alpha(k, a);
      double best = 2.0;
      const std::uint64_t hypotheses = std::uint64_t{1} << g.table_size();
      for (std::uint64_t table = 0; table < hypotheses; ++table) {
        std::vector<int> values(g.table_size());
        for (std::uint32_t x = 0; x < g.table_size(); ++x) {
          values[x] = (table >> x) & 1 ? 1 : -1;
        }
        best = std::min(best, alpha_correlated_distance(
                                  g, BooleanFunction::from_values(k, values), alpha));
      }
      CHECK(alpha_correlated_error(g, alpha) == doctest::Approx(best).epsilon(1e-9));
    }
  }
}

TEST_CASE("correlated variance identity and sandwich") {
  const BooleanFunction parity2 = BooleanFunction::parity(2);
  SUBCASE("named values") {
    const CorrelatedVariance zero =
        alpha_correlated_variance(parity2, CorrelationVector::constant(2, 1.0));
    CHECK(zero.direct == doctest::Approx(0.0));
    const CorrelatedVariance v =
        alpha_correlated_variance(parity2, CorrelationVector(2, {0.7, 0.4}));
    CHECK(v.spectral == doctest::Approx(1.0 - 0.49 * 0.16));
  }
  SUBCASE("sandwich between 2x and 4x the error on random instances") {
    Rng rng(81);
    for (int trial = 0; trial < 100; ++trial) {
      const int k = 1 + static_cast<int>(rng.below(6));
      const BooleanFunction g = random_function(k, rng);
      std::vector<double> a(k);
      for (double& v : a) v = 2.0 * rng.uniform() - 1.0;
      const CorrelationVector alpha(k, a);
      const double err = alpha_correlated_error(g, alpha);
      const CorrelatedVariance var = alpha_correlated_variance(g, alpha);
      CHECK(std::abs(var.direct - var.spectral) < 1e-9);
      CHECK(var.direct >= 2.0 * err - 1e-9);
      CHECK(var.direct <= 4.0 * err + 1e-9);
    }
  }
}

TEST_CASE("expected error of the rounded junta") {
  const BooleanFunction parity2 = BooleanFunction::parity(2);
  CHECK(rounding_expected_error(parity2, CorrelationVector::constant(2, 1.0)) ==
        doctest::Approx(0.0));

  SUBCASE("deterministic rounding at 0/1 correlations") {
    Rng rng(121);
    for (int trial = 0; trial < 20; ++trial) {
      const int k = 1 + static_cast<int>(rng.below(5));
      const BooleanFunction g = random_function(k, rng);
      const std::uint32_t mask =
          static_cast<std::uint32_t>(rng.below(std::uint64_t{1} << k));
      const CorrelationVector z = CorrelationVector::from_support(k, mask);
      CHECK(rounding_expected_error(g, z) ==
            doctest::Approx(alpha_correlated_error(g, z)).epsilon(1e-12));
    }
  }
  SUBCASE("never more than double the soft error") {
    Rng rng(122);
    for (int trial = 0; trial < 60; ++trial) {
      const int k = 1 + static_cast<int>(rng.below(8));
      const BooleanFunction g = random_function(k, rng);
      std::vector<double> a(k);
      for (double& v : a) v = 2.0 * rng.uniform() - 1.0;
      const CorrelationVector alpha(k, a);
      CHECK(rounding_expected_error(g, alpha) <=
            2.0 * alpha_correlated_error(g, alpha) + 1e-9);
    }
  }
}

TEST_CASE("soft junta upper bound") {
  SUBCASE("zero error pins the relevant coordinates") {
    Rng rng(200);
    for (int trial = 0; trial < 10; ++trial) {
      const int k = 3 + static_cast<int>(rng.below(2));
      const int r = 1 + static_cast<int>(rng.below(3));
      // g depends on exactly the low r coordinates
      const BooleanFunction h = random_function(r, rng);
      std::vector<int> values(std::uint64_t{1} << k);
      bool constant = true;
      for (std::uint32_t x = 0; x < values.size(); ++x) {
        values[x] = h.evaluate(x & ((1u << r) - 1));
        constant = constant && values[x] == values[0];
      }
      if (constant) continue;  // relevant coordinate count would be lower
      const BooleanFunction g = BooleanFunction::from_values(k, values);
      const int relevant = junta_complexity(g, 0.0).first;
      const SoftJuntaBound bound = soft_junta_upper(g, 0.0);
      CHECK(bound.value == doctest::Approx(relevant).epsilon(1e-6));
    }
  }
  SUBCASE("parity meets the symmetric optimum") {
    for (int k = 2; k <= 4; ++k) {
      const BooleanFunction g = BooleanFunction::parity(k);
      for (double delta : {0.05, 0.1, 0.2}) {
        const SoftJuntaBound bound = soft_junta_upper(g, delta);
        const double symmetric = k * std::pow(1.0 - 2.0 * delta, 2.0 / k);
        CHECK(bound.value <= symmetric + 1e-6);
        CHECK(alpha_correlated_error(g, bound.alpha) <= delta + 1e-9);
      }
    }
  }
  SUBCASE("never above the grid oracle or the junta complexity") {
    Rng rng(201);
    for (int trial = 0; trial < 8; ++trial) {
      const int k = 1 + static_cast<int>(rng.below(3));
      const BooleanFunction g = random_function(k, rng);
      const double delta = 0.05 + 0.1 * static_cast<double>(rng.below(3));
      const SoftJuntaBound bound = soft_junta_upper(g, delta);
      CHECK(bound.value <=
            static_cast<double>(junta_complexity(g, delta).first) + 1e-9);
      // coarse grid oracle: exhaustive search over s ∈ {0..G}^k / G
      const int G = 6;
      double oracle = k + 1.0;
      std::vector<double> s(k);
      const std::uint64_t points = static_cast<std::uint64_t>(std::pow(G + 1, k));
      for (std::uint64_t code = 0; code < points; ++code) {
        std::uint64_t c = code;
        double total = 0;
        for (int i = 0; i < k; ++i) {
          s[i] = static_cast<double>(c % (G + 1)) / G;
          total += s[i];
          c /= (G + 1);
        }
        std::vector<double> a(k);
        for (int i = 0; i < k; ++i) a[i] = std::sqrt(s[i]);
        if (alpha_correlated_error(g, CorrelationVector(k, a)) <= delta + 1e-9) {
          oracle = std::min(oracle, total);
        }
      }
      CHECK(bound.value <= oracle + 1e-9);
    }
  }
}

TEST_CASE("sandwich certificate chain") {
  Rng rng(202);
  for (int trial = 0; trial < 25; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(4));
    const BooleanFunction g = random_function(k, rng);
    for (double delta : {0.05, 0.1, 0.2}) {
      const SoftJuntaBound bound = soft_junta_upper(g, delta);
      const auto z = sandwich_support(g, delta, bound.alpha);
      REQUIRE(z.has_value());
      CHECK(std::popcount(*z) <= 2.0 * bound.value + 1e-9);
      const CorrelationVector zv = CorrelationVector::from_support(k, *z);
      CHECK(alpha_correlated_error(g, zv) <= 4.0 * delta + 1e-9);
      CHECK(static_cast<double>(junta_complexity(g, std::min(1.0, 4 * delta)).first) <=
            2.0 * bound.value + 1e-9);
    }
  }
}

TEST_CASE("serialization of junta types") {
  SUBCASE("correlation vector json round trip") {
    const CorrelationVector v(3, {0.25, -0.5, 1.0});
    nlohmann::json j = v;
    const CorrelationVector back = j.get<CorrelationVector>();
    CHECK(back.k == 3);
    CHECK(back.alpha == v.alpha);
  }
  SUBCASE("certificate json round trip") {
    const JuntaCertificate cert = best_junta_on(majority(3), 0b011);
    nlohmann::json j;
    to_json(j, cert);
    const JuntaCertificate back = junta_certificate_from_json(j);
    CHECK(back.support == cert.support);
    CHECK(back.inner == cert.inner);
    CHECK(back.achieved_distance == cert.achieved_distance);
  }
  SUBCASE("density distribution csv round trip and validation") {
    const DensityDistribution d = DensityDistribution::uniform(3);
    std::istringstream in(d.to_csv());
    const DensityDistribution back = DensityDistribution::from_csv(in, 3, 1.0);
    CHECK(back.pmf() == d.pmf());

    std::vector<double> bad = {0.5, 0.5, 0.0, 0.0};
    CHECK_THROWS_AS(DensityDistribution(2, bad, 1.0), std::invalid_argument);
    std::vector<double> short_sum = {0.25, 0.25, 0.25, 0.1};
    CHECK_THROWS_AS(DensityDistribution(2, short_sum, 0.5), std::invalid_argument);
  }
}

}  // TEST_SUITE
