#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sys/wait.h>

#include "test_util.hpp"

using namespace mixbo;
using nlohmann::json;

namespace {

const json kTiny = json::parse(R"({"batch_size": 4, "total_batches": 3, "init_batches": 2,
                                   "de": {"gens": 5}, "gp_fit": {"gens": 5}})");

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("builtin problems evaluate to their constructed optima") {
  const auto& problems = bench::builtin_problems();
  std::set<std::string> names;
  for (const auto& p : problems) {
    names.insert(p.name);
    REQUIRE(p.known_optimum.has_value());
    REQUIRE(p.optimum.has_value());
    CHECK_NOTHROW(p.space.validate(*p.optimum));
    CHECK(std::abs(p.evaluate(*p.optimum) - *p.known_optimum) < 1e-5);
  }
  CHECK(names == std::set<std::string>{"sphere5", "branin", "rastrigin4", "mixed", "categorical"});
  CHECK(std::abs(bench::find_problem("branin").evaluate({{"x1", std::numbers::pi}, {"x2", 2.275}}) - 0.397887) < 1e-5);
  CHECK(bench::find_problem("mixed").evaluate(*bench::find_problem("mixed").optimum) == 0.0);
  CHECK_THROWS_AS(bench::find_problem("nope"), ValidationError);

  const auto& mixed = bench::find_problem("mixed").space;
  CHECK(mixed.size() == 5);
  const auto& cat = bench::find_problem("categorical").space;
  CHECK(cat.params()[0].categories.size() == 4);
}

TEST_CASE("problems are finite and no random point beats the optimum") {
  std::mt19937_64 rng(0);
  for (const auto& p : bench::builtin_problems()) {
    for (const auto& a : random_init(p.space, 1, 500, 7)) {
      const double v = p.evaluate(a);
      CHECK(std::isfinite(v));
      CHECK(v >= *p.known_optimum - 1e-9);
    }
  }
}

TEST_CASE("score") {
  CHECK(bench::score(0.0, 10.0, 0.0) == 100.0);
  CHECK(bench::score(10.0, 10.0, 0.0) == 0.0);
  CHECK(bench::score(5.0, 10.0, 0.0) == 50.0);
  CHECK(bench::score(20.0, 10.0, 0.0) == 0.0);
  CHECK(bench::score(-1.0, 10.0, 0.0) == 100.0);
  CHECK(bench::score(1.0, 1.0, 1.0) == 100.0);
  CHECK(bench::score(1.5, 1.0, 1.0) == 0.0);
}

TEST_CASE("random baseline is deterministic and cached") {
  const auto& p = bench::find_problem("branin");
  const double a = bench::random_baseline(p, 32);
  CHECK(a == bench::random_baseline(p, 32));
  CHECK(a > *p.known_optimum);
  CHECK(bench::random_baseline(p, 128) <= a);
}

TEST_CASE("run report") {
  const auto& p = bench::find_problem("branin");
  const auto cfg = RunConfig::from_json(kTiny);
  const auto r = bench::run_problem(cfg, p, 4);
  CHECK(r.evaluations == 12);
  REQUIRE(r.incumbent_trace.size() == 3);
  for (std::size_t i = 1; i < r.incumbent_trace.size(); ++i) CHECK(r.incumbent_trace[i] <= r.incumbent_trace[i - 1]);
  CHECK(r.best_value == r.incumbent_trace.back());
  CHECK(r.score >= 0.0);
  CHECK(r.score <= 100.0);
  const auto j = r.to_json();
  CHECK(j["batches"].size() == 3);
  CHECK(j["batches"][2]["source"] == "model");
  CHECK(j["batches"][2].contains("length_scales"));
  CHECK_FALSE(j["config"].contains("space"));

  const auto rs = bench::run_random_search(p, 12, 4);
  CHECK(rs.evaluations == 12);
}

TEST_CASE("grids reproduce the ablation table shapes") {
  const auto t1 = bench::AblationGrid::from_json(
      json::parse(R"({"axes": {"meta_optimizer": ["local", "de"], "discretization": ["naive", "complex"]}})"));
  std::set<std::pair<MetaKind, Discretization>> rows1;
  for (const auto& c : t1.configs()) rows1.insert({c.meta.kind, c.discretization});
  CHECK(rows1.size() == 4);

  const auto t2 = bench::AblationGrid::from_json(json::parse(
      R"({"axes": {"init": ["random", "lh"], "init_batches": [2, 5], "meta_init": ["random", "quasi_random"]}})"));
  std::set<std::tuple<InitKind, std::size_t, MetaInit>> rows2;
  for (const auto& c : t2.configs()) rows2.insert({c.init, c.init_batches, c.meta.meta_init});
  CHECK(rows2.size() == 8);

  const auto listed = bench::AblationGrid::from_json(
      json::parse(R"({"base": {"seed": 1}, "configs": [{"de": {"gens": 3}}, {"meta_optimizer": "local"}]})"));
  CHECK(listed.configs().size() == 2);
  CHECK(listed.configs()[0].meta.de.max_generations == 3);

  CHECK_THROWS_AS(bench::AblationGrid::from_json(json::object()), ValidationError);
  CHECK_THROWS_AS(bench::AblationGrid::from_json(json::parse(R"({"axes": {"init": []}})")), ValidationError);
}

TEST_CASE("ablation writes one row per run and records failures") {
  const auto dir = std::filesystem::temp_directory_path() / "mixbo_test_ablation";
  std::filesystem::create_directories(dir);
  json doc{{"base", kTiny},
           {"configs", json::array({json::object(), json{{"init_batches", 9}}})}};
  const auto grid = bench::AblationGrid::from_json(doc);
  const std::vector<const bench::Problem*> problems{&bench::find_problem("branin"), &bench::find_problem("categorical")};
  const auto out = (dir / "table.csv").string();
  const auto rows = bench::run_ablation(grid, problems, {0, 1}, out);
  CHECK(rows.size() == 8);
  std::size_t failures = 0;
  for (const auto& r : rows)
    if (!r.error.empty()) {
      ++failures;
      CHECK(r.score == 0.0);
    }
  CHECK(failures == 4);

  const auto text = read_file(out);
  CHECK(text.rfind(std::string(bench::kCsvHeader) + "\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 9);
  CHECK(std::filesystem::exists(dir / "table_summary.csv"));

  const auto summary = bench::summarize(rows);
  REQUIRE(summary.size() == 2);
  CHECK(summary[0].mean_score >= summary[1].mean_score);
  CHECK(summary[1].failures == 4);

  // Aggregates do not depend on seed order.
  const auto reversed = bench::run_ablation(grid, problems, {1, 0});
  const auto s2 = bench::summarize(reversed);
  CHECK(s2[0].mean_score == doctest::Approx(summary[0].mean_score).epsilon(1e-12));
  CHECK(s2[0].median_score == doctest::Approx(summary[0].median_score).epsilon(1e-12));

  CHECK_THROWS_AS(bench::run_ablation(grid, problems, {}), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("seed lists") {
  CHECK(bench::parse_seed_list("0..3") == std::vector<std::uint64_t>{0, 1, 2, 3});
  CHECK(bench::parse_seed_list("5,1..2,9") == std::vector<std::uint64_t>{5, 1, 2, 9});
  CHECK_THROWS_AS(bench::parse_seed_list(""), ValidationError);
  CHECK_THROWS_AS(bench::parse_seed_list("3..1"), ValidationError);
  CHECK_THROWS_AS(bench::parse_seed_list("a"), ValidationError);
}

#ifdef MIXBO_BENCH_EXE
namespace {

int run_cli(const std::string& args) {
  const int status = std::system((std::string(MIXBO_BENCH_EXE) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("command line exit codes") {
  const auto dir = std::filesystem::temp_directory_path() / "mixbo_test_cli";
  std::filesystem::create_directories(dir);
  const auto cfg = (dir / "cfg.json").string();
  const auto grid = (dir / "grid.json").string();
  std::ofstream(cfg) << kTiny.dump();
  std::ofstream(grid) << json{{"base", kTiny}, {"configs", json::array({json::object()})}}.dump();

  CHECK(run_cli("problems") == 0);
  CHECK(run_cli("run --config " + cfg + " --problem branin --seed 1 --out " + (dir / "run.json").string()) == 0);
  const auto report = json::parse(read_file(dir / "run.json"));
  CHECK(report["evaluations"] == 12);
  CHECK(run_cli("ablation --grid " + grid + " --problems branin --seeds 0..1 --quiet --out " +
                (dir / "t.csv").string()) == 0);
  CHECK(run_cli("run --config " + cfg + " --problem nope") == 2);
  CHECK(run_cli("run --config " + (dir / "missing.json").string() + " --problem branin") == 2);
  CHECK(run_cli("ablation --grid " + grid + " --seeds 4..2 --out " + (dir / "t.csv").string()) == 2);
  CHECK(run_cli("serve-protocol --config " + cfg) == 2);  // no space in the config

  const auto served = (dir / "served.json").string();
  std::ofstream(served) << json{{"space", bench::find_problem("branin").space.to_json()},
                                {"batch_size", 2}, {"total_batches", 2}, {"init_batches", 1}}.dump();
  CHECK(run_cli("serve-protocol --config " + served + " < /dev/null") == 2);
  CHECK(std::system(("printf '%s\\n' '{\"observe\":[1,2],\"batch\":0}' '{\"observe\":[3,4],\"batch\":1}' | " +
                     std::string(MIXBO_BENCH_EXE) + " serve-protocol --config " + served + " > " +
                     (dir / "out.jsonl").string() + " 2>/dev/null").c_str()) == 0);
  CHECK(read_file(dir / "out.jsonl").find("\"done\":true") != std::string::npos);
  CHECK(run_cli("frobnicate") != 0);
  std::filesystem::remove_all(dir);
}
#endif
