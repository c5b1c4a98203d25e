// bench: run, ablate and serve the batch optimizer from the command line.
//
//   bench run --config cfg.json --problem NAME --seed N --out run.json
//   bench ablation --grid grid.json --problems all --seeds 0..19 --out table.csv
//   bench serve-protocol --config cfg.json

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mixbo/mixbo.hpp"

namespace {

using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mixbo::ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw mixbo::ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw mixbo::ValidationError("cannot open '" + path + "' for writing");
  out << text << '\n';
}

std::vector<const mixbo::bench::Problem*> select_problems(const std::string& spec) {
  std::vector<const mixbo::bench::Problem*> out;
  if (spec == "all") {
    for (const auto& p : mixbo::bench::builtin_problems()) out.push_back(&p);
    return out;
  }
  std::stringstream ss(spec);
  std::string name;
  while (std::getline(ss, name, ','))
    if (!name.empty()) out.push_back(&mixbo::bench::find_problem(name));
  if (out.empty()) throw mixbo::ValidationError("no problems selected");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch Bayesian optimization benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, problem_name, out_path, grid_path, problems_spec = "all", seeds_spec;
  std::uint64_t seed = 0;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run one configuration on one builtin problem");
  run->add_option("--config", config_path, "Run config JSON (space is taken from the problem)");
  run->add_option("--problem", problem_name, "Builtin problem name")->required();
  run->add_option("--seed", seed, "Run seed");
  run->add_option("--out", out_path, "Output report JSON (default: stdout)");

  auto* ablation = app.add_subcommand("ablation", "Run a configuration grid over problems and seeds");
  ablation->add_option("--grid", grid_path, "Grid JSON")->required();
  ablation->add_option("--problems", problems_spec, "'all' or comma-separated problem names");
  ablation->add_option("--seeds", seeds_spec, "Seed list, e.g. 0..19 or 1,2,3")->required();
  ablation->add_option("--out", out_path, "Per-run CSV output")->required();
  ablation->add_flag("--quiet", quiet, "Do not print the summary table");

  auto* serve = app.add_subcommand("serve-protocol", "Speak the JSONL suggest/observe protocol on stdin/stdout");
  serve->add_option("--config", config_path, "Run config JSON including the search space")->required();

  app.add_subcommand("problems", "List builtin problems");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto config = config_path.empty() ? mixbo::RunConfig{} : mixbo::RunConfig::from_json(read_json(config_path));
      const auto& problem = mixbo::bench::find_problem(problem_name);
      const auto report = mixbo::bench::run_problem(config, problem, seed);
      write_text(out_path, report.to_json().dump(2));
      return 0;
    }
    if (ablation->parsed()) {
      const auto grid = mixbo::bench::AblationGrid::from_json(read_json(grid_path));
      const auto problems = select_problems(problems_spec);
      const auto seeds = mixbo::bench::parse_seed_list(seeds_spec);
      const auto rows = mixbo::bench::run_ablation(grid, problems, seeds, out_path);
      if (!quiet) {
        std::cout << std::left << std::setw(40) << "config" << std::right << std::setw(6) << "runs"
                  << std::setw(12) << "mean" << std::setw(12) << "median" << '\n';
        for (const auto& s : mixbo::bench::summarize(rows))
          std::cout << std::left << std::setw(40) << s.config << std::right << std::setw(6) << s.runs
                    << std::setw(12) << std::fixed << std::setprecision(3) << s.mean_score << std::setw(12)
                    << s.median_score << '\n';
      }
      return 0;
    }
    if (serve->parsed()) {
      auto config = mixbo::RunConfig::from_json(read_json(config_path));
      mixbo::Optimizer optimizer(std::move(config));
      return mixbo::serve_protocol(optimizer, std::cin, std::cout, std::cerr);
    }
    for (const auto& p : mixbo::bench::builtin_problems())
      std::cout << p.name << '\t' << p.space.size() << " params\t" << p.space.warped_dim() << " warped dims\n";
    return 0;
  } catch (const mixbo::ValidationError& e) {
    std::cerr << "bench: validation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "bench: error: " << e.what() << '\n';
    return 1;
  }
}
