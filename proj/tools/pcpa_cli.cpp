// pcpa: command-line front end.
//
// Exit codes: 0 success, 1 config error, 2 certification/assumption failure,
// 3 prior/data mismatch, 4 solver failure.

#include "pcpa/area.hpp"
#include "pcpa/case_io.hpp"
#include "pcpa/diagnosis.hpp"
#include "pcpa/errors.hpp"
#include "pcpa/evaluation.hpp"
#include "pcpa/records.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#ifndef PCPA_DATA_DIR
#define PCPA_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 1, kCertification = 2, kMismatch = 3, kSolver = 4 };

constexpr std::uint64_t kDefaultSeed = 1;

// Options shared by several subcommands; unset values fall back to the config file.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    const json cfg = json::parse(pcpa::read_text_file(path));
    if (!cfg.is_object()) throw pcpa::ParseError("config " + path + ": top level must be an object");
    static const std::set<std::string> known{"seed",     "threads", "grid",       "area",
                                             "dataset",  "prior",   "tolerances", "solver",
                                             "reconstruct_injections", "dataset_dir", "output", "priors"};
    for (const auto& [key, value] : cfg.items())
      if (!known.count(key)) throw pcpa::ParseError("config " + path + ": unknown key \"" + key + "\"");
    return cfg;
  } catch (const json::exception& e) {
    throw pcpa::ParseError("config " + path + ": " + e.what());
  }
}

std::uint64_t resolve_seed(const Common& c, const json& cfg) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("PCPA_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw pcpa::ValidationError(std::string("PCPA_SEED is not an unsigned integer: ") + env);
    }
  }
  return cfg.value("seed", kDefaultSeed);
}

int resolve_threads(const Common& c, const json& cfg) {
  const int t = c.threads.value_or(cfg.value("threads", pcpa::default_threads()));
  if (t < 1) throw pcpa::ValidationError("--threads must be at least 1");
  return t;
}

fs::path data_dir() {
  if (const char* env = std::getenv("PCPA_DATA_DIR"); env && *env) return env;
  return PCPA_DATA_DIR;
}

fs::path resolve_grid_path(const std::string& name) {
  if (name == "ieee30") return data_dir() / "case30.m";
  if (name == "ieee118") return data_dir() / "case118.m";
  if (!fs::exists(name)) throw pcpa::ValidationError("grid '" + name + "' not found");
  return name;
}

template <class T>
T pick(const std::optional<T>& flag, const json& section, const char* key, T fallback) {
  if (flag) return *flag;
  return section.is_object() ? section.value(key, fallback) : fallback;
}

json section(const json& cfg, const char* key) { return cfg.contains(key) ? cfg.at(key) : json::object(); }

pcpa::FactorRange range_from(const json& j, pcpa::FactorRange def) {
  if (j.is_null()) return def;
  if (!j.is_array() || j.size() != 2) throw pcpa::ValidationError("factor range must be [low, high]");
  return {j[0].get<double>(), j[1].get<double>()};
}

void check_ranges(const pcpa::FactorRanges& r, bool custom) {
  for (auto [got, def, name] : {std::tuple{r.alter, pcpa::FactorRange{1.5, 5.0}, "alter"},
                                std::tuple{r.cut, pcpa::FactorRange{100.0, 1000.0}, "cut"}}) {
    if (!(got.low > 1.0 && got.low < got.high)) throw pcpa::ValidationError(std::string(name) + " factor range is invalid");
    if (!custom && (got.low < def.low || got.high > def.high)) {
      throw pcpa::ValidationError(std::string(name) + " factor range leaves the default interval; set "
                                  "\"custom_factor_ranges\": true to override");
    }
  }
}

pcpa::DiagnosisOptions diagnosis_options(const json& cfg) {
  pcpa::DiagnosisOptions o;
  const json tol = section(cfg, "tolerances");
  o.support_tol = tol.value("support", o.support_tol);
  o.rank_tol = tol.value("rank", o.rank_tol);
  o.consistency_tol = tol.value("consistency", o.consistency_tol);
  o.c_min = tol.value("c_min", o.c_min);
  o.reconstruct_injections = cfg.value("reconstruct_injections", true);
  const json solver = section(cfg, "solver");
  o.simplex.max_iterations = solver.value("max_iterations", o.simplex.max_iterations);
  o.simplex.feasibility_tol = solver.value("feasibility_tol", o.simplex.feasibility_tol);
  o.simplex.optimality_tol = solver.value("optimality_tol", o.simplex.optimality_tol);
  if (!(o.c_min > 0.0 && o.c_min <= 1.0)) throw pcpa::ValidationError("c_min must lie in (0, 1]");
  if (o.simplex.max_iterations < 0) throw pcpa::ValidationError("solver.max_iterations must be non-negative");
  return o;
}

pcpa::PriorProvider parse_prior(const std::string& spec) {
  pcpa::PriorProvider p;
  if (spec == "uniform") return p;
  if (spec == "oracle") {
    p.source = pcpa::PriorSource::Oracle;
    return p;
  }
  if (spec.rfind("file:", 0) == 0) {
    const std::string path = spec.substr(5);
    if (!fs::exists(path)) throw pcpa::ValidationError("prior file " + path + " not found");
    p.source = pcpa::PriorSource::File;
    p.entries = pcpa::parse_prior_file(pcpa::read_text_file(path));
    return p;
  }
  throw pcpa::ValidationError("prior must be uniform, oracle or file:<path>, got '" + spec + "'");
}

// ---------------------------------------------------------------------------

struct AreaArgs {
  Common common;
  std::optional<std::string> grid;
  std::optional<int> size;
  std::optional<int> retries;
  std::optional<int> edges;
  std::string out;
};

pcpa::AttackedArea build_area(const pcpa::GridModel& model, const AreaArgs& a, const json& cfg, std::uint64_t seed) {
  const json sec = section(cfg, "area");
  pcpa::DbgsOptions opts;
  opts.max_retries = pick(a.retries, sec, "retries", opts.max_retries);
  if (a.edges) opts.required_edges = *a.edges;
  else if (sec.contains("edges")) opts.required_edges = sec["edges"].get<int>();
  opts.rank_tol = section(cfg, "tolerances").value("rank", opts.rank_tol);
  const int size = pick(a.size, sec, "size", 8);
  return pcpa::dbgs(model, size, seed, opts);
}

int cmd_area(const AreaArgs& a) {
  const json cfg = load_config(a.common.config);
  const std::uint64_t seed = resolve_seed(a.common, cfg);
  const pcpa::GridModel model(pcpa::load_grid(resolve_grid_path(pick(a.grid, cfg, "grid", std::string("ieee30")))));
  const pcpa::AttackedArea area = build_area(model, a, cfg, seed);
  const std::string text = pcpa::area_to_json(model.topology, area);
  if (a.out.empty() || a.out == "-") std::cout << text;
  else pcpa::write_text_file(a.out, text);
  std::cerr << "area " << area.id << ": |V_H| = " << area.buses.size() << ", |E_H| = " << area.lines.size()
            << ", cycles = " << pcpa::count_cycles(model.topology, area) << "\n";
  return kOk;
}

struct DatasetArgs {
  AreaArgs area;
  std::string area_file;
  std::optional<int> train;
  std::optional<int> attacks;
  std::vector<int> cardinalities;
  std::string out;
};

int cmd_dataset(const DatasetArgs& d) {
  const json cfg = load_config(d.area.common.config);
  const std::uint64_t seed = resolve_seed(d.area.common, cfg);
  const int threads = resolve_threads(d.area.common, cfg);
  const json sec = section(cfg, "dataset");
  const std::string out = !d.out.empty() ? d.out : cfg.value("output", std::string());
  if (out.empty()) throw pcpa::ValidationError("dataset needs --out");

  pcpa::DatasetConfig dc;
  dc.train_per_kind = pick(d.train, sec, "train_per_kind", dc.train_per_kind);
  dc.test_per_cardinality = pick(d.attacks, sec, "test_per_cardinality", dc.test_per_cardinality);
  if (dc.test_per_cardinality < 1) throw pcpa::ValidationError("--attacks must be at least 1");
  if (dc.train_per_kind < 0) throw pcpa::ValidationError("--train must be non-negative");
  dc.cardinalities = !d.cardinalities.empty() ? d.cardinalities : sec.value("cardinalities", std::vector<int>{});
  if (sec.contains("kind_mix")) {
    const json& m = sec["kind_mix"];
    dc.test_mix = {m.value("alter", 0.0), m.value("cut", 0.0), m.value("open", 0.0)};
    if (dc.test_mix.alter < 0 || dc.test_mix.cut < 0 || dc.test_mix.open < 0 ||
        dc.test_mix.alter + dc.test_mix.cut + dc.test_mix.open <= 0) {
      throw pcpa::ValidationError("kind_mix weights must be non-negative with a positive sum");
    }
  }
  if (sec.contains("train_kinds")) {
    dc.train_kinds.clear();
    for (const auto& k : sec["train_kinds"]) dc.train_kinds.push_back(pcpa::parse_attack_kind(k.get<std::string>()));
  }
  const json fr = section(sec, "factor_ranges");
  dc.simulation.ranges.alter = range_from(fr.value("alter", json()), dc.simulation.ranges.alter);
  dc.simulation.ranges.cut = range_from(fr.value("cut", json()), dc.simulation.ranges.cut);
  check_ranges(dc.simulation.ranges, sec.value("custom_factor_ranges", false));
  dc.simulation.loads.sigma = sec.value("load_sigma", dc.simulation.loads.sigma);
  if (sec.contains("alpha_range")) {
    dc.simulation.alpha_min = sec["alpha_range"].at(0).get<double>();
    dc.simulation.alpha_max = sec["alpha_range"].at(1).get<double>();
    if (!(dc.simulation.alpha_min > 0.0 && dc.simulation.alpha_min <= dc.simulation.alpha_max &&
          dc.simulation.alpha_max < 1.0)) {
      throw pcpa::ValidationError("alpha_range must satisfy 0 < min <= max < 1");
    }
  }

  const pcpa::GridModel model(
      pcpa::load_grid(resolve_grid_path(pick(d.area.grid, cfg, "grid", std::string("ieee30")))));
  pcpa::AttackedArea area;
  const std::string area_file = !d.area_file.empty() ? d.area_file : section(cfg, "area").value("file", std::string());
  if (!area_file.empty()) {
    area = pcpa::area_from_json(model, pcpa::read_text_file(area_file));
    if (!area.certified()) throw pcpa::CertificationError("area " + area.id + " is not certified");
  } else {
    area = build_area(model, d.area, cfg, seed);
  }
  const pcpa::DatasetManifest m = pcpa::generate_dataset(model, area, dc, seed, out, threads);
  std::size_t total = 0;
  for (const auto& s : m.shards) total += static_cast<std::size_t>(s.records);
  std::cerr << "dataset " << out << ": area " << area.id << ", " << m.shards.size() << " shards, " << total
            << " records\n";
  return kOk;
}

struct DiagnoseArgs {
  Common common;
  std::string dataset;
  std::optional<std::string> prior;
  std::vector<int> cardinalities;
  std::string out;
};

pcpa::Dataset restrict(pcpa::Dataset ds, const std::vector<int>& cards) {
  if (cards.empty()) return ds;
  std::vector<pcpa::Shard> kept;
  for (auto& s : ds.shards) {
    if (s.info.split != "test") continue;
    for (int f : cards)
      if (s.info.cardinality == f) kept.push_back(std::move(s));
  }
  ds.shards = std::move(kept);
  return ds;
}

int run_prior(const pcpa::Dataset& ds, const std::string& prior_spec, const json& cfg, int threads,
              const fs::path& out) {
  const pcpa::PriorProvider priors = parse_prior(prior_spec);
  const pcpa::ExperimentResult res = pcpa::run_experiment(ds, priors, diagnosis_options(cfg), threads);
  if (!out.empty()) pcpa::write_experiment(ds, res, out);
  std::cout << pcpa::summary_text(res);
  if (res.solver_failure()) {
    std::cerr << "error: the LP solver failed on at least one scenario\n";
    return kSolver;
  }
  if (res.failures() > 0) {
    std::cerr << "error: angle reconstruction failed on " << res.failures() << " scenarios\n";
    return kCertification;
  }
  return kOk;
}

int cmd_diagnose(const DiagnoseArgs& a) {
  const json cfg = load_config(a.common.config);
  const int threads = resolve_threads(a.common, cfg);
  const std::string dataset = !a.dataset.empty() ? a.dataset : cfg.value("dataset_dir", std::string());
  if (dataset.empty()) throw pcpa::ValidationError("diagnose needs --dataset");
  const std::string prior = a.prior.value_or(cfg.value("prior", std::string("uniform")));
  const pcpa::PriorProvider checked = parse_prior(prior);  // fail on a bad spec before loading data
  (void)checked;
  const pcpa::Dataset ds = restrict(pcpa::load_dataset(dataset), a.cardinalities);
  const std::string out = !a.out.empty() ? a.out : cfg.value("output", std::string());
  return run_prior(ds, prior, cfg, threads, out);
}

struct EvaluateArgs {
  Common common;
  std::string dataset;
  std::vector<std::string> priors;
  std::vector<int> cardinalities;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const json cfg = load_config(a.common.config);
  const int threads = resolve_threads(a.common, cfg);
  const std::string dataset = !a.dataset.empty() ? a.dataset : cfg.value("dataset_dir", std::string());
  if (dataset.empty()) throw pcpa::ValidationError("evaluate needs --dataset");
  std::vector<std::string> priors = a.priors;
  if (priors.empty()) priors = cfg.value("priors", std::vector<std::string>{"uniform", "oracle"});
  for (const auto& p : priors) (void)parse_prior(p);
  const pcpa::Dataset ds = restrict(pcpa::load_dataset(dataset), a.cardinalities);
  const std::string out = !a.out.empty() ? a.out : cfg.value("output", std::string());
  int code = kOk;
  for (const auto& p : priors) {
    const std::string label = p.rfind("file:", 0) == 0 ? "file" : p;
    const fs::path dir = out.empty() ? fs::path() : fs::path(out) / label;
    const int c = run_prior(ds, p, cfg, threads, dir);
    if (c != kOk && code == kOk) code = c;
  }
  return code;
}

int cmd_convert(const std::string& in, const std::string& out) {
  const pcpa::GridTopology grid = pcpa::load_grid(resolve_grid_path(in));
  const std::string text = pcpa::grid_to_json(grid);
  if (out.empty() || out == "-") std::cout << text;
  else pcpa::write_text_file(out, text);
  return kOk;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON run configuration");
  app->add_option("--seed", c.seed, "root seed (overrides PCPA_SEED and the config file)");
  app->add_option("--threads", c.threads, "worker threads (default: available cores)");
}

void add_area_options(CLI::App* app, AreaArgs& a) {
  app->add_option("--grid", a.grid, "ieee30, ieee118 or a case file path");
  app->add_option("--size", a.size, "target |V_H|");
  app->add_option("--retries", a.retries, "maximum DBGS reseeds");
  app->add_option("--edges", a.edges, "require exactly this many induced lines");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel cyber-physical attack diagnosis toolkit"};
  app.require_subcommand(1);

  AreaArgs area_args;
  auto* area = app.add_subcommand("area", "build and certify an attacked area");
  add_common(area, area_args.common);
  add_area_options(area, area_args);
  area->add_option("--out", area_args.out, "output file (default: stdout)");

  DatasetArgs ds_args;
  auto* dataset = app.add_subcommand("dataset", "simulate a training/test dataset");
  add_common(dataset, ds_args.area.common);
  add_area_options(dataset, ds_args.area);
  dataset->add_option("--area", ds_args.area_file, "area file (skips DBGS)");
  dataset->add_option("--train", ds_args.train, "training records per attack kind");
  dataset->add_option("--attacks", ds_args.attacks, "test records per attack cardinality");
  dataset->add_option("--cardinalities", ds_args.cardinalities, "test cardinalities (default 1..|E_H|)");
  dataset->add_option("--out", ds_args.out, "output directory");

  DiagnoseArgs dg_args;
  auto* diagnose = app.add_subcommand("diagnose", "diagnose the test records of a dataset");
  add_common(diagnose, dg_args.common);
  diagnose->add_option("--dataset", dg_args.dataset, "dataset directory");
  diagnose->add_option("--prior", dg_args.prior, "uniform | oracle | file:<path>");
  diagnose->add_option("--cardinalities", dg_args.cardinalities, "restrict to these test shards");
  diagnose->add_option("--out", dg_args.out, "report directory");

  EvaluateArgs ev_args;
  auto* evaluate = app.add_subcommand("evaluate", "compare priors over a dataset");
  add_common(evaluate, ev_args.common);
  evaluate->add_option("--dataset", ev_args.dataset, "dataset directory");
  evaluate->add_option("--priors", ev_args.priors, "prior sources (default: uniform oracle)");
  evaluate->add_option("--cardinalities", ev_args.cardinalities, "restrict to these test shards");
  evaluate->add_option("--out", ev_args.out, "report directory (one subdirectory per prior)");

  std::string conv_in, conv_out;
  auto* convert = app.add_subcommand("convert-case", "convert a MATPOWER case to the JSON grid format");
  convert->add_option("input", conv_in, "case file, ieee30 or ieee118")->required();
  convert->add_option("--out", conv_out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (area->parsed()) return cmd_area(area_args);
    if (dataset->parsed()) return cmd_dataset(ds_args);
    if (diagnose->parsed()) return cmd_diagnose(dg_args);
    if (evaluate->parsed()) return cmd_evaluate(ev_args);
    if (convert->parsed()) return cmd_convert(conv_in, conv_out);
  } catch (const pcpa::PriorMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMismatch;
  } catch (const pcpa::CertificationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCertification;
  } catch (const pcpa::ReconstructionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCertification;
  } catch (const pcpa::InfeasibleScenario& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCertification;
  } catch (const pcpa::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  } catch (const pcpa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kConfig;
}
