#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "liftlab/constants.hpp"

namespace liftlab {

enum class Experiment {
  kJuntaMaj,
  kSoftSandwich,
  kRounding,
  kConcentration,
  kCovering,
  kWeakLearnUniform,
  kWeakLearnAdversarial,
  kMemorizeBaseline,
  kDictatorIdentity,
};

const std::vector<Experiment>& all_experiments();
std::string experiment_name(Experiment e);
Experiment experiment_from_name(const std::string& name);

// Common experiment configuration. Numeric fields default to -1 meaning
// "use the experiment's default" (from the constants file); the seed always
// applies. The config is echoed verbatim into every output.
struct ExperimentConfig {
  Experiment experiment = Experiment::kJuntaMaj;
  int k = -1;
  int n = -1;
  std::int64_t m = -1;
  double kappa = -1;
  std::int64_t trials = -1;
  double delta = -1;
  int grid = -1;
  int u_override = -1;
  std::uint64_t seed = 1;
  std::string out;              // output stem; "<out>.csv" and "<out>.json"
  std::string format = "json";  // stdout summary format: json | csv
  bool fix_inner = false;
  std::string tie_rule = "randomized";

  nlohmann::json to_json() const;
  // rejects unknown fields
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct ThresholdCheck {
  std::string id;
  double observed = 0;
  double threshold = 0;
  std::string cmp;  // one of "<=", ">=", "=="
  bool pass = false;
};

struct RunRecord {
  ExperimentConfig config;
  std::string version;
  std::string started;
  std::string finished;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json summary;
  std::vector<ThresholdCheck> checks;
  bool pass = true;
  bool no_data = false;

  std::string rows_csv() const;
  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
};

// Dispatches to the owning module and, when config.out is set, writes
// "<out>.csv" (per-trial rows) and "<out>.json" (summary) atomically via a
// temp file and rename. Invalid parameters are rejected before any output
// exists, so failed runs leave nothing behind.
RunRecord run(const ExperimentConfig& config);

// the declared per-experiment check ids, in report order
std::vector<std::string> expected_checks(Experiment e);

struct ReportRow {
  std::string criterion;  // "<experiment>.<check>"
  std::string observed;
  std::string threshold;
  std::string status;  // "pass" | "fail" | "not run"
};

// One row per declared criterion across all experiments. Records from
// mismatched library versions are refused.
std::vector<ReportRow> report(const std::vector<RunRecord>& records);
std::string render_report(const std::vector<ReportRow>& rows);

}  // namespace liftlab
