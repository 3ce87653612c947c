#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "doctest.h"
#include "liftlab/harness.hpp"

using namespace liftlab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() /
          ("liftlab_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string stem(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("junta-maj run reports the frozen agreement") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kJuntaMaj;
  cfg.k = 6;
  const RunRecord record = run(cfg);
  CHECK(record.summary.at("best_agreement").get<double>() == 0.75);
  CHECK(record.summary.at("maj3_j_at_0.25").get<int>() == 1);
  CHECK(record.summary.at("maj3_j_at_0.24").get<int>() == 3);
  CHECK(record.pass);
  CHECK(record.rows.size() == 2);  // k = 4 and k = 6
}

TEST_CASE("zero trials yield an empty run marked no-data") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kWeakLearnUniform;
  cfg.trials = 0;
  const RunRecord record = run(cfg);
  CHECK(record.no_data);
  CHECK(record.rows.empty());
  CHECK(record.summary.at("status").get<std::string>() == "no data");
}

TEST_CASE("identical configs produce byte-identical csv") {
  TempDir tmp;
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kConcentration;
  cfg.n = 5;
  cfg.k = 6;
  cfg.trials = 40;
  cfg.seed = 2023;
  cfg.out = tmp.stem("first");
  const RunRecord a = run(cfg);
  cfg.out = tmp.stem("second");
  const RunRecord b = run(cfg);
  CHECK(slurp(tmp.stem("first") + ".csv") == slurp(tmp.stem("second") + ".csv"));
  CHECK(a.rows == b.rows);
}

TEST_CASE("invalid parameters are rejected before any output appears") {
  TempDir tmp;
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kJuntaMaj;
  cfg.k = 7;  // must be even
  cfg.out = tmp.stem("bad");
  CHECK_THROWS_AS(run(cfg), std::invalid_argument);
  CHECK(!std::filesystem::exists(tmp.stem("bad") + ".csv"));
  CHECK(!std::filesystem::exists(tmp.stem("bad") + ".json"));
}

TEST_CASE("config json round trip rejects unknown fields") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kRounding;
  cfg.k = 5;
  cfg.seed = 99;
  const nlohmann::json j = cfg.to_json();
  const ExperimentConfig back = ExperimentConfig::from_json(j);
  CHECK(back.experiment == Experiment::kRounding);
  CHECK(back.k == 5);
  CHECK(back.seed == 99);

  nlohmann::json bad = j;
  bad["surprise"] = 1;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), std::invalid_argument);
}

TEST_CASE("run records embed the config verbatim") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kRounding;
  cfg.trials = 5;
  cfg.k = 3;
  cfg.seed = 31;
  const RunRecord record = run(cfg);
  CHECK(record.summary.at("config") == cfg.to_json());
  const RunRecord back = RunRecord::from_json(record.to_json());
  CHECK(back.config.to_json() == cfg.to_json());
  CHECK(back.checks.size() == record.checks.size());
  CHECK(back.pass == record.pass);
}

TEST_CASE("report assembles criterion rows") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kRounding;
  cfg.trials = 5;
  cfg.k = 3;
  const RunRecord record = run(cfg);

  SUBCASE("present experiments show pass rows, absent ones not-run") {
    const auto rows = report({record});
    bool saw_rounding = false, saw_missing = false;
    for (const auto& row : rows) {
      if (row.criterion == "rounding.violations") {
        saw_rounding = true;
        CHECK(row.status == "pass");
      }
      if (row.criterion == "covering.hits") {
        saw_missing = true;
        CHECK(row.status == "not run");
      }
    }
    CHECK(saw_rounding);
    CHECK(saw_missing);
  }
  SUBCASE("mixed versions are refused") {
    RunRecord other = record;
    other.version = "different";
    CHECK_THROWS_AS(report({record, other}), std::runtime_error);
  }
  SUBCASE("rendering is csv-shaped") {
    const std::string text = render_report(report({record}));
    CHECK(text.find("criterion,observed,threshold,status\n") == 0);
    CHECK(text.find("rounding.violations") != std::string::npos);
  }
}

TEST_CASE("memorize baseline run passes its identity checks") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kMemorizeBaseline;
  cfg.trials = 10;
  cfg.seed = 7;
  const RunRecord record = run(cfg);
  CHECK(record.pass);
  for (const auto& check : record.checks) CHECK(check.pass);
}

TEST_CASE("dictator identity run passes at small sizes") {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::kDictatorIdentity;
  cfg.k = 3;
  cfg.trials = 20;
  cfg.seed = 11;
  const RunRecord record = run(cfg);
  CHECK(record.pass);
}

}  // TEST_SUITE
