#include "liftlab/weaklearn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "liftlab/numeric.hpp"

namespace liftlab {

std::string LabeledSample::to_csv() const {
  std::ostringstream out;
  out << "x_hex,y\n";
  for (const auto& [X, y] : points) {
    out << X.to_hex() << "," << y << "\n";
  }
  return out.str();
}

LabeledSample LabeledSample::from_csv(std::istream& in, int n, int k) {
  LabeledSample sample;
  sample.n = n;
  sample.k = k;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "x_hex,y") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("malformed csv row");
    const int y = std::stoi(line.substr(comma + 1));
    if (y != 1 && y != -1) throw std::invalid_argument("labels must be ±1");
    sample.points.emplace_back(BlockInput::from_hex(n, k, line.substr(0, comma)), y);
  }
  return sample;
}

LabeledSample draw_sample(const LiftedFunction& F, const SmoothDistribution& D,
                          std::uint64_t count, Rng& rng, std::string source) {
  if (F.n() != D.n() || F.k() != D.k()) {
    throw std::invalid_argument("concept and distribution shapes differ");
  }
  LabeledSample sample;
  sample.n = F.n();
  sample.k = F.k();
  sample.source = std::move(source);
  sample.points.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    BlockInput X = D.sample(rng);
    const int y = F.evaluate(X);
    sample.points.emplace_back(std::move(X), y);
  }
  return sample;
}

BlockTables::BlockTables(int n, int k) : n_(n), k_(k) {
  if (n < 1 || n > kMaxArity || k < 1) throw std::invalid_argument("bad block shape");
  tables_.assign(k, std::vector<signed char>(std::size_t{1} << n, 0));
  writes_.assign(k, 0);
}

void BlockTables::write(int i, std::uint32_t x, int y) {
  if (i < 0 || i >= k_) throw std::out_of_range("block index out of range");
  if (y != 1 && y != -1) throw std::invalid_argument("labels must be ±1");
  tables_[i][x] = static_cast<signed char>(y);
  writes_[i] += 1;
}

int BlockTables::g_sum(const BlockInput& X) const {
  if (X.n != n_ || X.k != k_) throw std::invalid_argument("input has wrong shape");
  int sum = 0;
  for (int i = 0; i < k_; ++i) sum += tables_[i][X.blocks[i]];
  return sum;
}

int BlockTables::written_blocks(const BlockInput& X) const {
  int count = 0;
  for (int i = 0; i < k_; ++i) count += tables_[i][X.blocks[i]] != 0;
  return count;
}

std::vector<double> BlockTables::block_correlations(
    const std::vector<BooleanFunction>& inner) const {
  if (inner.size() != static_cast<std::size_t>(k_)) {
    throw std::invalid_argument("wrong number of reference functions");
  }
  std::vector<double> out(k_);
  const double size = static_cast<double>(std::uint64_t{1} << n_);
  for (int i = 0; i < k_; ++i) {
    if (inner[i].arity() != n_) throw std::invalid_argument("reference arity mismatch");
    std::int64_t sum = 0;
    for (std::uint32_t x = 0; x < (std::uint32_t{1} << n_); ++x) {
      sum += inner[i].evaluate(x) * tables_[i][x];
    }
    out[i] = static_cast<double>(sum) / size;
  }
  return out;
}

BlockTables train_tables(const LabeledSample& sample, int n, int k) {
  if (sample.n != n || sample.k != k) throw std::invalid_argument("sample shape mismatch");
  BlockTables tables(n, k);
  for (const auto& [X, y] : sample.points) {
    if (X.n != n || X.k != k) throw std::invalid_argument("point shape mismatch");
    for (int i = 0; i < k; ++i) tables.write(i, X.blocks[i], y);
  }
  return tables;
}

int ThresholdHypothesis::evaluate(const BlockInput& X) const {
  switch (kind) {
    case Kind::kConstPlus:
      return 1;
    case Kind::kConstMinus:
      return -1;
    case Kind::kThreshold:
      return tables->g_sum(X) >= tau ? 1 : -1;
  }
  return 1;
}

std::string ThresholdHypothesis::describe() const {
  switch (kind) {
    case Kind::kConstPlus:
      return "const+1";
    case Kind::kConstMinus:
      return "const-1";
    case Kind::kThreshold:
      return "tau=" + std::to_string(tau);
  }
  return "";
}

std::vector<ThresholdHypothesis> hypothesis_family(
    std::shared_ptr<const BlockTables> tables, int u) {
  if (u < 0) throw std::invalid_argument("u must be nonnegative");
  std::vector<ThresholdHypothesis> family;
  family.reserve(2 * u + 3);
  family.push_back({ThresholdHypothesis::Kind::kConstPlus, 0, tables});
  family.push_back({ThresholdHypothesis::Kind::kConstMinus, 0, tables});
  for (int tau = -u; tau <= u; ++tau) {
    family.push_back({ThresholdHypothesis::Kind::kThreshold, tau, tables});
  }
  return family;
}

namespace {

// shared driver for the exact / Monte Carlo expectation modes
template <typename Value>
Advantage expectation(const SmoothDistribution& D, const EvalMode& mode, Rng& rng,
                      Value&& value_of) {
  Advantage out;
  if (mode.exact) {
    if (!D.has_exact_pmf() || D.domain_bits() > 20) {
      throw std::invalid_argument("exact mode needs an explicit pmf on ≤ 20 bits");
    }
    out.exact = true;
    KahanSum sum;
    const std::uint64_t size = std::uint64_t{1} << D.domain_bits();
    for (std::uint64_t index = 0; index < size; ++index) {
      const double w = D.exact_pmf(index);
      if (w == 0.0) continue;
      sum.add(w * value_of(BlockInput::from_index(D.n(), D.k(), index)));
    }
    out.value = sum.value();
    return out;
  }
  if (mode.samples == 0) throw std::invalid_argument("need at least one sample");
  KahanSum sum, sum_sq;
  for (std::uint64_t s = 0; s < mode.samples; ++s) {
    const double v = value_of(D.sample(rng));
    sum.add(v);
    sum_sq.add(v * v);
  }
  const double mean = sum.value() / static_cast<double>(mode.samples);
  const double variance =
      std::max(0.0, sum_sq.value() / static_cast<double>(mode.samples) - mean * mean);
  out.value = mean;
  out.stderr_value = std::sqrt(variance / static_cast<double>(mode.samples));
  return out;
}

}  // namespace

Advantage advantage(const ThresholdHypothesis& h, const LiftedFunction& F,
                    const SmoothDistribution& D, const EvalMode& mode, Rng& rng) {
  return expectation(D, mode, rng, [&](const BlockInput& X) {
    return static_cast<double>(h.evaluate(X) * F.evaluate(X));
  });
}

Advantage g_correlation(const BlockTables& tables, const LiftedFunction& F,
                        const SmoothDistribution& D, const EvalMode& mode, Rng& rng) {
  return expectation(D, mode, rng, [&](const BlockInput& X) {
    return static_cast<double>(F.evaluate(X) * tables.g_sum(X));
  });
}

Advantage g_tail(const BlockTables& tables, const SmoothDistribution& D, int u,
                 const EvalMode& mode, Rng& rng) {
  return expectation(D, mode, rng, [&](const BlockInput& X) {
    return std::abs(tables.g_sum(X)) > u ? 1.0 : 0.0;
  });
}

const ThresholdHypothesis& select(const std::vector<ThresholdHypothesis>& family,
                                  const LabeledSample& validation) {
  if (family.empty()) throw std::invalid_argument("empty hypothesis family");
  if (validation.points.empty()) throw std::invalid_argument("empty validation set");
  const ThresholdHypothesis* best = nullptr;
  std::int64_t best_score = 0;
  for (const auto& h : family) {
    std::int64_t score = 0;
    for (const auto& [X, y] : validation.points) score += h.evaluate(X) * y;
    if (!best || score > best_score) {
      best = &h;
      best_score = score;
    }
  }
  return *best;
}

int weak_learner_u(int k, double kappa) {
  if (k < 1 || kappa < 1.0) throw std::invalid_argument("bad parameters");
  const double kk = static_cast<double>(k);
  return static_cast<int>(
      std::ceil(std::sqrt(kk * std::log(2.0 * kk * kk * kappa)) + std::sqrt(kappa * kk)));
}

nlohmann::json WeakLearnDiagnostics::to_json() const {
  return nlohmann::json{{"advantage", advantage},
                        {"advantage_stderr", advantage_stderr},
                        {"g_correlation", g_correlation},
                        {"tail", g_tail},
                        {"u", u},
                        {"selected", selected},
                        {"tau", tau},
                        {"per_block_correlations", per_block_correlations},
                        {"seeds", {seed}}};
}

WeakLearnResult weak_learn(const LiftedFunction& F, const SmoothDistribution& D,
                           std::uint64_t m, double kappa, std::uint64_t seed,
                           const WeakLearnOptions& options) {
  if (F.n() != D.n() || F.k() != D.k()) {
    throw std::invalid_argument("concept and distribution shapes differ");
  }
  const int k = F.k();
  const int n = F.n();
  const int u = options.u_override.value_or(weak_learner_u(k, kappa));

  Rng draw_rng = Rng::substream(seed, 0);
  const LabeledSample full = draw_sample(F, D, 2 * m, draw_rng, "weak_learn");
  LabeledSample train{n, k, {}, "train", seed};
  LabeledSample validation{n, k, {}, "validation", seed};
  train.points.assign(full.points.begin(), full.points.begin() + m);
  validation.points.assign(full.points.begin() + m, full.points.end());

  auto tables = std::make_shared<BlockTables>(train_tables(train, n, k));
  const std::vector<ThresholdHypothesis> family = hypothesis_family(tables, u);

  // degenerate m = 0: every hypothesis ties at 0, the documented tie rule
  // picks the constant +1
  const ThresholdHypothesis& chosen =
      m == 0 ? family.front() : select(family, validation);

  const bool exact_ok = D.has_exact_pmf() && D.domain_bits() <= 20;
  const EvalMode mode = exact_ok ? EvalMode::exact_mode()
                                 : EvalMode::monte_carlo(options.diagnostic_samples);

  WeakLearnDiagnostics diag;
  diag.u = u;
  diag.seed = seed;
  diag.selected = chosen.describe();
  diag.tau = chosen.kind == ThresholdHypothesis::Kind::kThreshold ? chosen.tau : 0;
  Rng diag_rng = Rng::substream(seed, 1);
  const Advantage adv = advantage(chosen, F, D, mode, diag_rng);
  diag.advantage = adv.value;
  diag.advantage_stderr = adv.stderr_value;
  diag.g_correlation = g_correlation(*tables, F, D, mode, diag_rng).value;
  diag.g_tail = g_tail(*tables, D, u, mode, diag_rng).value;
  diag.per_block_correlations = tables->block_correlations(F.inner());

  return WeakLearnResult{chosen, std::move(diag)};
}

double threshold_smoothing_value(double y, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("interval half-width must be positive");
  return std::clamp(y / a, -1.0, 1.0);
}

std::vector<int> MemorizeResult::materialize(std::optional<int> fixed_tie,
                                             Rng& rng) const {
  std::vector<int> out = labels;
  for (int& v : out) {
    if (v == 0) v = fixed_tie ? *fixed_tie : rng.sign();
  }
  return out;
}

MemorizeResult memorizing_weak_learner(
    const std::vector<std::pair<std::size_t, int>>& sample,
    const std::vector<double>& domain_pmf) {
  MemorizeResult result;
  result.labels.assign(domain_pmf.size(), 0);
  for (const auto& [x, y] : sample) {
    if (x >= domain_pmf.size()) throw std::out_of_range("sample point outside domain");
    if (y != 1 && y != -1) throw std::invalid_argument("labels must be ±1");
    result.labels[x] = y;
  }
  KahanSum seen_mass;
  for (std::size_t x = 0; x < domain_pmf.size(); ++x) {
    if (result.labels[x] != 0) seen_mass.add(domain_pmf[x]);
  }
  result.expected_advantage = seen_mass.value();
  return result;
}

std::uint64_t uniform_convergence_sample_size(std::size_t family_size, double eps,
                                              double delta) {
  if (!(eps > 0.0 && delta > 0.0)) throw std::invalid_argument("bad parameters");
  return static_cast<std::uint64_t>(std::ceil(
      std::log(2.0 * static_cast<double>(family_size) / delta) / (2.0 * eps * eps)));
}

}  // namespace liftlab
