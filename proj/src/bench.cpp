#include "mixbo/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include "mixbo/random.hpp"

namespace mixbo::bench {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double num(const ParamAssignment& a, const std::string& name) {
  const auto& v = a.at(name);
  if (auto d = std::get_if<double>(&v)) return *d;
  return static_cast<double>(std::get<std::int64_t>(v));
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

Problem make_sphere5() {
  std::vector<ParameterSpec> specs;
  ParamAssignment opt;
  for (int i = 0; i < 5; ++i) {
    const std::string n = "x" + std::to_string(i);
    specs.push_back(ParameterSpec::real(n, -5.0, 5.0));
    opt[n] = 0.0;
  }
  return {"sphere5", SearchSpace(specs),
          [](const ParamAssignment& a) {
            double s = 0.0;
            for (int i = 0; i < 5; ++i) s += std::pow(num(a, "x" + std::to_string(i)), 2);
            return s;
          },
          0.0, opt};
}

Problem make_branin() {
  return {"branin",
          SearchSpace({ParameterSpec::real("x1", -5.0, 10.0), ParameterSpec::real("x2", 0.0, 15.0)}),
          [](const ParamAssignment& a) {
            const double x1 = num(a, "x1"), x2 = num(a, "x2");
            const double pi = std::numbers::pi;
            const double b = 5.1 / (4.0 * pi * pi), c = 5.0 / pi, t = 1.0 / (8.0 * pi);
            return std::pow(x2 - b * x1 * x1 + c * x1 - 6.0, 2) + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
          },
          0.39788735772973816, ParamAssignment{{"x1", std::numbers::pi}, {"x2", 2.275}}};
}

Problem make_rastrigin4() {
  std::vector<ParameterSpec> specs;
  ParamAssignment opt;
  for (int i = 0; i < 4; ++i) {
    const std::string n = "x" + std::to_string(i);
    specs.push_back(ParameterSpec::real(n, -5.12, 5.12));
    opt[n] = 0.0;
  }
  return {"rastrigin4", SearchSpace(specs),
          [](const ParamAssignment& a) {
            double s = 40.0;
            for (int i = 0; i < 4; ++i) {
              const double x = num(a, "x" + std::to_string(i));
              s += x * x - 10.0 * std::cos(2.0 * std::numbers::pi * x);
            }
            return s;
          },
          0.0, opt};
}

// Period-2 ripple over a wide bowl: many local minima, global minimum 0 at (0, 0).
double rippled_bowl(double a, double b) {
  return 0.25 * (a * a + b * b) + 2.0 * (2.0 - std::cos(std::numbers::pi * a) - std::cos(std::numbers::pi * b));
}

// Optimum 0 at x=1, y=-2, n1=20, n2=6, flag=true.
Problem make_mixed() {
  SearchSpace space({ParameterSpec::real("x", -5.0, 5.0), ParameterSpec::real("y", -5.0, 5.0),
                     ParameterSpec::integer("n1", 1, 64, ConfigSpace::Log),
                     ParameterSpec::integer("n2", 1, 64, ConfigSpace::Log),
                     ParameterSpec::boolean("flag")});
  return {"mixed", space,
          [](const ParamAssignment& a) {
            const double l1 = std::log2(num(a, "n1")) - std::log2(20.0);
            const double l2 = std::log2(num(a, "n2")) - std::log2(6.0);
            const bool flag = std::get<bool>(a.at("flag"));
            return rippled_bowl(num(a, "x") - 1.0, num(a, "y") + 2.0) + 0.5 * l1 * l1 +
                   (flag ? 0.5 : 1.0) * l2 * l2 + (flag ? 0.0 : 1.5);
          },
          0.0,
          ParamAssignment{{"x", 1.0}, {"y", -2.0}, {"n1", std::int64_t{20}}, {"n2", std::int64_t{6}},
                          {"flag", true}}};
}

// One rippled bowl per category with different centers and offsets; optimum 0
// at kind=b, x=-1, y=0.5.
Problem make_categorical() {
  SearchSpace space({ParameterSpec::categorical("kind", {"a", "b", "c", "d"}),
                     ParameterSpec::real("x", -3.0, 3.0), ParameterSpec::real("y", -3.0, 3.0)});
  return {"categorical", space,
          [](const ParamAssignment& a) {
            struct Bowl { double offset, cx, cy; };
            static const std::map<std::string, Bowl> bowls{
                {"a", {0.8, 1.0, 1.0}}, {"b", {0.0, -1.0, 0.5}}, {"c", {0.4, 0.0, -1.5}}, {"d", {0.2, 2.0, -2.0}}};
            const auto& bowl = bowls.at(std::get<std::string>(a.at("kind")));
            return bowl.offset + rippled_bowl(num(a, "x") - bowl.cx, num(a, "y") - bowl.cy);
          },
          0.0, ParamAssignment{{"kind", std::string("b")}, {"x", -1.0}, {"y", 0.5}}};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void set_path(json& doc, const std::string& path, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace

const std::vector<Problem>& builtin_problems() {
  static const std::vector<Problem> problems{make_sphere5(), make_branin(), make_rastrigin4(),
                                             make_mixed(), make_categorical()};
  return problems;
}

const Problem& find_problem(const std::string& name) {
  for (const auto& p : builtin_problems())
    if (p.name == name) return p;
  throw ValidationError("unknown problem '" + name + "'");
}

json RunReport::to_json() const {
  json j{{"problem", problem},          {"seed", seed},           {"config", config},
         {"incumbent_trace", incumbent_trace}, {"best_value", best_value},
         {"best", assignment_to_json(best_assignment)},
         {"score", score},              {"wall_s", wall_s},       {"evaluations", evaluations},
         {"batches", batches}};
  if (!error.empty()) j["error"] = error;
  return j;
}

double score(double best_found, double random_baseline, double known_optimum) {
  const double span = random_baseline - known_optimum;
  if (!(std::abs(span) > 0.0)) return best_found <= known_optimum ? 100.0 : 0.0;
  return 100.0 * std::clamp((random_baseline - best_found) / span, 0.0, 1.0);
}

double score(const RunReport& run, const Problem& problem) {
  if (!problem.known_optimum) throw ValidationError("problem '" + problem.name + "' has no known optimum");
  const std::size_t budget = run.evaluations ? run.evaluations : 128;
  return score(run.best_value, random_baseline(problem, budget), *problem.known_optimum);
}

double random_baseline(const Problem& problem, std::size_t budget) {
  static std::mutex mutex;
  static std::map<std::pair<std::string, std::size_t>, double> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find({problem.name, budget});
    if (it != cache.end()) return it->second;
  }
  constexpr std::size_t kReplicates = 101;
  std::vector<double> bests;
  for (std::size_t r = 0; r < kReplicates; ++r) {
    const auto seed = derive_seed(0xBA5E11E, {name_hash(problem.name), budget, r});
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : random_init(problem.space, 1, budget, seed)) best = std::min(best, problem.evaluate(a));
    bests.push_back(best);
  }
  const double value = median(bests);
  std::lock_guard lock(mutex);
  cache[{problem.name, budget}] = value;
  return value;
}

RunReport run_problem(const RunConfig& base, const Problem& problem, std::uint64_t seed) {
  RunConfig config = base;
  config.space = problem.space;
  config.seed = seed;
  const auto start = Clock::now();
  Optimizer opt(config);
  RunReport report;
  report.problem = problem.name;
  report.seed = seed;
  report.config = config.to_json();
  report.config.erase("space");
  while (!opt.finished()) {
    const auto batch = opt.suggest();
    std::vector<double> values;
    values.reserve(batch.size());
    for (const auto& a : batch) values.push_back(problem.evaluate(a));
    opt.observe(values);
    report.incumbent_trace.push_back(opt.best().second);
  }
  std::tie(report.best_assignment, report.best_value) = opt.best();
  report.evaluations = opt.trials().size();
  report.wall_s = std::chrono::duration<double>(Clock::now() - start).count();
  for (const auto& d : opt.diagnostics()) report.batches.push_back(d.to_json());
  if (problem.known_optimum) report.score = score(report, problem);
  return report;
}

RunReport run_random_search(const Problem& problem, std::size_t budget, std::uint64_t seed) {
  const auto start = Clock::now();
  RunReport report;
  report.problem = problem.name;
  report.seed = seed;
  report.config = {{"optimizer", "random_search"}, {"budget", budget}};
  report.best_value = std::numeric_limits<double>::infinity();
  for (const auto& a : random_init(problem.space, 1, budget, derive_seed(seed, {0x5EA7C4}))) {
    const double v = problem.evaluate(a);
    if (v < report.best_value || report.best_assignment.empty()) {
      report.best_value = v;
      report.best_assignment = a;
    }
  }
  report.incumbent_trace.push_back(report.best_value);
  report.evaluations = budget;
  report.wall_s = std::chrono::duration<double>(Clock::now() - start).count();
  if (problem.known_optimum) report.score = score(report, problem);
  return report;
}

AblationGrid AblationGrid::from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("ablation grid must be a JSON object");
  AblationGrid grid;
  if (doc.contains("base")) grid.base = doc["base"];
  if (doc.contains("configs")) {
    for (const auto& c : doc["configs"]) grid.variants.push_back(c);
  }
  if (doc.contains("axes")) {
    std::vector<json> product{json::object()};
    for (const auto& [key, values] : doc["axes"].items()) {
      if (!values.is_array() || values.empty())
        throw ValidationError("grid axis '" + key + "' must be a non-empty array");
      std::vector<json> next;
      // "discretization" is shorthand for the kernel setting.
      const std::string path = key == "discretization" || key == "family" ? "kernel." + key : key;
      for (const auto& partial : product)
        for (const auto& v : values) {
          json variant = partial;
          set_path(variant, path, v);
          next.push_back(std::move(variant));
        }
      product = std::move(next);
    }
    for (auto& v : product) grid.variants.push_back(std::move(v));
  }
  if (grid.variants.empty()) throw ValidationError("ablation grid is empty");
  return grid;
}

std::vector<RunConfig> AblationGrid::configs() const {
  std::vector<RunConfig> out;
  for (const auto& v : variants) {
    json doc = base;
    doc.merge_patch(v);
    out.push_back(RunConfig::from_json(doc));
  }
  return out;
}

std::string AblationRow::config_key() const {
  return meta_opt + "/" + discretization + "/" + init + "/" + std::to_string(init_batches) + "/" + meta_init;
}

std::string to_csv_line(const AblationRow& r) {
  std::ostringstream os;
  os << csv_escape(r.problem) << ',' << r.seed << ',' << r.meta_opt << ',' << r.discretization << ','
     << r.init << ',' << r.init_batches << ',' << r.meta_init << ',' << fmt_double(r.best_value) << ','
     << fmt_double(r.score) << ',' << fmt_double(r.wall_s) << ',' << csv_escape(r.error);
  return os.str();
}

std::vector<AblationSummaryRow> summarize(const std::vector<AblationRow>& rows) {
  std::map<std::string, std::vector<const AblationRow*>> groups;
  for (const auto& r : rows) groups[r.config_key()].push_back(&r);
  std::vector<AblationSummaryRow> out;
  for (const auto& [key, members] : groups) {
    AblationSummaryRow s;
    s.config = key;
    s.runs = members.size();
    std::vector<double> scores;
    for (const auto* m : members) {
      scores.push_back(m->score);
      if (!m->error.empty()) ++s.failures;
    }
    s.mean_score = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    s.median_score = median(scores);
    out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.mean_score > b.mean_score; });
  return out;
}

std::vector<AblationRow> run_ablation(const AblationGrid& grid, const std::vector<const Problem*>& problems,
                                      const std::vector<std::uint64_t>& seeds, const std::string& out_path) {
  if (seeds.empty()) throw ValidationError("ablation needs at least one seed");
  if (problems.empty()) throw ValidationError("ablation needs at least one problem");
  const auto configs = grid.configs();

  std::ofstream csv;
  if (!out_path.empty()) {
    csv.open(out_path);
    if (!csv) throw ValidationError("cannot open '" + out_path + "' for writing");
    csv << kCsvHeader << '\n';
  }
  std::vector<AblationRow> rows;
  for (const auto& cfg : configs) {
    for (const auto* problem : problems) {
      for (const auto seed : seeds) {
        AblationRow row;
        row.problem = problem->name;
        row.seed = seed;
        row.meta_opt = to_string(cfg.meta.kind);
        row.discretization = to_string(cfg.discretization);
        row.init = to_string(cfg.init);
        row.init_batches = cfg.init_batches;
        row.meta_init = to_string(cfg.meta.meta_init);
        try {
          const auto report = run_problem(cfg, *problem, seed);
          row.best_value = report.best_value;
          row.score = report.score;
          row.wall_s = report.wall_s;
        } catch (const std::exception& e) {
          row.best_value = std::numeric_limits<double>::quiet_NaN();
          row.score = 0.0;
          row.error = e.what();
        }
        if (csv) csv << to_csv_line(row) << '\n' << std::flush;
        rows.push_back(std::move(row));
      }
    }
  }
  if (!out_path.empty()) {
    auto stem = out_path;
    const auto dot = stem.rfind('.');
    if (dot != std::string::npos && stem.find('/', dot) == std::string::npos) stem.resize(dot);
    std::ofstream summary(stem + "_summary.csv");
    summary << "config,runs,mean_score,median_score,failures\n";
    for (const auto& s : summarize(rows))
      summary << s.config << ',' << s.runs << ',' << fmt_double(s.mean_score) << ','
              << fmt_double(s.median_score) << ',' << s.failures << '\n';
  }
  return rows;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    try {
      const auto range = part.find("..");
      if (range == std::string::npos) {
        seeds.push_back(std::stoull(part));
      } else {
        const auto lo = std::stoull(part.substr(0, range));
        const auto hi = std::stoull(part.substr(range + 2));
        if (hi < lo) throw ValidationError("empty seed range '" + part + "'");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw ValidationError("bad seed list '" + text + "'");
    }
  }
  if (seeds.empty()) throw ValidationError("seed list is empty");
  return seeds;
}

}  // namespace mixbo::bench
