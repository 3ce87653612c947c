#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "liftlab/harness.hpp"

namespace {

void attach_flags(CLI::App* sub, liftlab::ExperimentConfig* cfg) {
  sub->add_option("--k", cfg->k, "outer arity");
  sub->add_option("--n", cfg->n, "inner arity (bits per block)");
  sub->add_option("--m", cfg->m, "sample size");
  sub->add_option("--kappa", cfg->kappa, "smoothness parameter");
  sub->add_option("--trials", cfg->trials, "number of trials");
  sub->add_option("--delta", cfg->delta, "approximation parameter");
  sub->add_option("--grid", cfg->grid, "soft-junta search grid");
  sub->add_option("--u-override", cfg->u_override, "threshold range override");
  sub->add_option("--seed", cfg->seed, "root seed");
  sub->add_option("--out", cfg->out, "output stem (<out>.csv and <out>.json)");
  sub->add_option("--format", cfg->format, "stdout summary format: json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  sub->add_flag("--fix-inner", cfg->fix_inner,
                "keep the reference inner functions fixed across trials");
  sub->add_option("--tie-rule", cfg->tie_rule,
                  "memorize-baseline tie rule: randomized|fixed+1|fixed-1");
}

int run_experiment(const liftlab::ExperimentConfig& cfg) {
  const liftlab::RunRecord record = liftlab::run(cfg);
  if (cfg.format == "csv") {
    std::cout << record.rows_csv();
  } else {
    std::cout << record.to_json().dump(2) << "\n";
  }
  return record.pass ? 0 : 1;
}

int run_report(const std::vector<std::string>& paths) {
  std::vector<liftlab::RunRecord> records;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) {
      std::cerr << "cannot open " << path << "\n";
      return 2;
    }
    nlohmann::json j;
    in >> j;
    records.push_back(liftlab::RunRecord::from_json(j));
  }
  const auto rows = liftlab::report(records);
  std::cout << liftlab::render_report(rows);
  for (const auto& row : rows) {
    if (row.status == "fail") return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"liftlab: seeded experiments for Boolean-function lifting and weak learning"};
  app.require_subcommand(1);

  liftlab::ExperimentConfig cfg;
  std::vector<CLI::App*> experiment_subs;
  for (liftlab::Experiment e : liftlab::all_experiments()) {
    CLI::App* sub = app.add_subcommand(liftlab::experiment_name(e),
                                       "run the " + liftlab::experiment_name(e) +
                                           " experiment");
    attach_flags(sub, &cfg);
    experiment_subs.push_back(sub);
  }

  std::vector<std::string> report_paths;
  CLI::App* report_sub =
      app.add_subcommand("report", "combine run records into an acceptance table");
  report_sub->add_option("records", report_paths, "run record JSON files")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (report_sub->parsed()) return run_report(report_paths);
    for (std::size_t i = 0; i < experiment_subs.size(); ++i) {
      if (experiment_subs[i]->parsed()) {
        cfg.experiment = liftlab::all_experiments()[i];
        return run_experiment(cfg);
      }
    }
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
