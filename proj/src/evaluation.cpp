#include "pcpa/evaluation.hpp"

#include "pcpa/case_io.hpp"
#include "pcpa/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace pcpa {

using nlohmann::json;

ClassificationMetrics classification_metrics(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ValidationError("label vectors differ in length");
  ClassificationMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int p = predicted[i];
    const int t = truth[i];
    if ((p != 0 && p != 1) || (t != 0 && t != 1)) throw ValidationError("labels must be binary");
    if (p && t) ++m.tp;
    else if (p) ++m.fp;
    else if (t) ++m.fn;
    else ++m.tn;
  }
  const double n = static_cast<double>(truth.size());
  m.accuracy = n > 0 ? (m.tp + m.tn) / n : 1.0;
  m.far = m.fp + m.tn > 0 ? static_cast<double>(m.fp) / (m.fp + m.tn) : 0.0;
  m.mdr = m.tp + m.fn > 0 ? static_cast<double>(m.fn) / (m.tp + m.fn) : 0.0;
  const int f1_den = 2 * m.tp + m.fp + m.fn;
  m.f1 = f1_den > 0 ? 2.0 * m.tp / f1_den : 1.0;
  return m;
}

double normalized_error(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x_true) {
  if (x_hat.size() != x_true.size()) throw ValidationError("normalized_error: size mismatch");
  const double den = x_true.norm();
  if (!(den > 0.0)) throw ValidationError("normalized_error: ground truth is zero");
  return (x_true - x_hat).norm() / den;
}

std::vector<int> threshold_labels(const Eigen::VectorXd& x, double threshold) {
  std::vector<int> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = x[i] >= threshold ? 1 : 0;
  return out;
}

MeanStd mean_std(std::span<const double> v) {
  MeanStd r;
  if (v.empty()) return r;
  r.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(v.size()));
  return r;
}

int default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::clamp<long>(threads, 1, std::max<long>(1, static_cast<long>(n))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!stop) {
        const std::size_t i = next++;
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          stop = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Dataset generation

namespace {

constexpr const char* kFormat = "pcpa-dataset/1";
constexpr std::uint64_t kTrainStream = 1000;
constexpr std::uint64_t kTestStream = 2000;
constexpr std::uint64_t kCardinalityStream = 3000;

json range_json(const FactorRange& r) { return json::array({r.low, r.high}); }

json config_json(const DatasetConfig& c) {
  json kinds = json::array();
  for (auto k : c.train_kinds) kinds.push_back(to_string(k));
  const SimulationConfig& s = c.simulation;
  return {{"train_per_kind", c.train_per_kind},
          {"train_kinds", kinds},
          {"test_per_cardinality", c.test_per_cardinality},
          {"cardinalities", c.cardinalities},
          {"test_mix", {{"alter", c.test_mix.alter}, {"cut", c.test_mix.cut}, {"open", c.test_mix.open}}},
          {"factor_ranges", {{"alter", range_json(s.ranges.alter)}, {"cut", range_json(s.ranges.cut)}}},
          {"load_sigma", s.loads.sigma},
          {"alpha_range", json::array({s.alpha_min, s.alpha_max})},
          {"max_compensation", s.max_compensation}};
}

std::string mix_label(const KindMix& mix) {
  const int active = (mix.alter > 0) + (mix.cut > 0) + (mix.open > 0);
  if (active != 1) return "mixed";
  if (mix.alter > 0) return "alter";
  if (mix.cut > 0) return "cut";
  return "open";
}

std::string padded(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

}  // namespace

std::string manifest_to_json(const DatasetManifest& m, const DatasetConfig& config) {
  json shards = json::array();
  for (const auto& s : m.shards) {
    shards.push_back({{"file", s.file},
                      {"split", s.split},
                      {"attack_mix", s.attack_mix},
                      {"cardinality", s.cardinality},
                      {"records", s.records},
                      {"sha256", s.sha256}});
  }
  json j;
  j["format"] = kFormat;
  j["grid"] = {{"name", m.grid_name}, {"file", "grid.json"}, {"sha256", m.grid_sha256}};
  j["area"] = {{"id", m.area_id}, {"file", "area.json"}, {"num_lines", m.num_lines}, {"sha256", m.area_sha256}};
  j["seed"] = m.seed;
  j["config"] = config_json(config);
  j["shards"] = shards;
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) throw ValidationError("unsupported dataset format");
    DatasetManifest m;
    m.grid_name = j.at("grid").at("name").get<std::string>();
    m.grid_sha256 = j.at("grid").at("sha256").get<std::string>();
    m.area_id = j.at("area").at("id").get<std::string>();
    m.area_sha256 = j.at("area").at("sha256").get<std::string>();
    m.num_lines = j.at("area").at("num_lines").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("shards")) {
      m.shards.push_back({s.at("file").get<std::string>(), s.at("split").get<std::string>(),
                          s.at("attack_mix").get<std::string>(), s.at("cardinality").get<int>(),
                          s.at("records").get<int>(), s.at("sha256").get<std::string>()});
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset manifest: ") + e.what());
  }
}

DatasetManifest generate_dataset(const GridModel& model, const AttackedArea& area, const DatasetConfig& config,
                                 std::uint64_t seed, const std::filesystem::path& out_dir, int threads) {
  if (!area.certified()) throw CertificationError("dataset generation requires a certified area");
  const int ne = static_cast<int>(area.lines.size());
  if (ne == 0) throw ValidationError("area has no lines to attack");
  if (config.train_per_kind < 0) throw ValidationError("train_per_kind must be non-negative");
  if (config.test_per_cardinality < 1) throw ValidationError("test_per_cardinality must be at least 1");
  std::vector<int> cards = config.cardinalities;
  if (cards.empty())
    for (int f = 1; f <= ne; ++f) cards.push_back(f);
  for (int f : cards)
    if (f < 1 || f > ne) throw ValidationError("attack cardinality " + std::to_string(f) + " outside 1.." + std::to_string(ne));

  const GridTopology& grid = model.topology;
  DatasetManifest m;
  m.grid_name = grid.name();
  m.area_id = area.id;
  m.seed = seed;
  m.num_lines = ne;

  const std::string grid_text = grid_to_json(grid);
  const std::string area_text = area_to_json(grid, area);
  write_text_file(out_dir / "grid.json", grid_text);
  write_text_file(out_dir / "area.json", area_text);
  m.grid_sha256 = sha256_hex(grid_text);
  m.area_sha256 = sha256_hex(area_text);

  auto emit = [&](const std::string& file, const std::string& split, const KindMix& mix, int cardinality, int count,
                  std::uint64_t stream, const std::string& prefix) {
    std::vector<std::string> lines(count);
    SimulationConfig sim = config.simulation;
    sim.mix = mix;
    parallel_for(count, threads, [&](std::size_t i) {
      int f = cardinality;
      if (f == 0) f = 1 + static_cast<int>(derive_seed(seed, kCardinalityStream + stream, i) % static_cast<std::uint64_t>(ne));
      const Scenario s = generate_scenario(model, area, f, sim, derive_seed(seed, stream, i));
      lines[i] = record_to_json(grid, area, make_record(model, area, s, prefix + padded(i), split, mix_label(mix)));
    });
    std::string text;
    for (const auto& l : lines) {
      text += l;
      text += '\n';
    }
    write_text_file(out_dir / file, text);
    m.shards.push_back({file, split, mix_label(mix), cardinality, count, sha256_hex(text)});
  };

  if (config.train_per_kind > 0) {
    for (std::size_t k = 0; k < config.train_kinds.size(); ++k) {
      const auto kind = config.train_kinds[k];
      const std::string name(to_string(kind));
      emit("train_" + name + ".jsonl", "train", KindMix::only(kind), 0, config.train_per_kind,
           kTrainStream + static_cast<std::uint64_t>(kind), "train-" + name + "-");
    }
  }
  for (int f : cards) {
    emit("test_f" + std::to_string(f) + ".jsonl", "test", config.test_mix, f, config.test_per_cardinality,
         kTestStream + static_cast<std::uint64_t>(f), "test-f" + std::to_string(f) + "-");
  }
  write_text_file(out_dir / "manifest.json", manifest_to_json(m, config));
  return m;
}

std::size_t Dataset::num_records() const {
  std::size_t n = 0;
  for (const auto& s : shards) n += s.records.size();
  return n;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) throw ValidationError("no manifest.json in " + dir.string());
  DatasetManifest m = manifest_from_json(read_text_file(manifest_path));
  const std::string grid_text = read_text_file(dir / "grid.json");
  const std::string area_text = read_text_file(dir / "area.json");
  if (sha256_hex(grid_text) != m.grid_sha256) throw ValidationError("grid.json checksum mismatch");
  if (sha256_hex(area_text) != m.area_sha256) throw ValidationError("area.json checksum mismatch");
  GridModel model(parse_grid_json(grid_text));
  AttackedArea area = area_from_json(model, area_text);
  if (area.id != m.area_id) throw ValidationError("area.json does not match the manifest");

  std::vector<Shard> shards;
  for (const auto& info : m.shards) {
    const std::string text = read_text_file(dir / info.file);
    if (sha256_hex(text) != info.sha256) throw ValidationError(info.file + ": checksum mismatch");
    Shard shard{info, {}};
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) shard.records.push_back(record_from_json(model.topology, area, line));
    if (static_cast<int>(shard.records.size()) != info.records) throw ValidationError(info.file + ": record count mismatch");
    shards.push_back(std::move(shard));
  }
  return Dataset{dir, std::move(model), std::move(area), std::move(m), std::move(shards)};
}

// ---------------------------------------------------------------------------
// Experiments

PriorVector PriorProvider::prior_for(const GridTopology& grid, const AttackedArea& area,
                                     const ScenarioRecord& record) const {
  switch (source) {
    case PriorSource::Uniform: return uniform_prior(area.lines.size());
    case PriorSource::Oracle: return oracle_prior(record.x_h);
    case PriorSource::File:
    case PriorSource::Model: {
      const PriorEntry* fallback = nullptr;
      for (const auto& e : entries) {
        if (e.scenario_id && *e.scenario_id == record.id) {
          PriorVector p = prior_for_area(e, grid, area);
          p.source = source;
          return p;
        }
        if (!e.scenario_id && !fallback) fallback = &e;
      }
      if (!fallback) throw PriorMismatch("no prior for scenario " + record.id);
      PriorVector p = prior_for_area(*fallback, grid, area);
      p.source = source;
      return p;
    }
  }
  throw PriorMismatch("unknown prior source");
}

int ExperimentResult::failures() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.ok; }));
}

bool ExperimentResult::solver_failure() const {
  return std::any_of(records.begin(), records.end(),
                     [](const auto& r) { return !r.ok && !r.reconstruction_failed; });
}

std::vector<SummaryRow> summarize(std::span<const EvaluationRecord> records) {
  std::map<int, std::vector<const EvaluationRecord*>> by_card;
  for (const auto& r : records) by_card[r.cardinality].push_back(&r);
  std::vector<SummaryRow> rows;
  for (const auto& [card, list] : by_card) {
    SummaryRow row;
    row.cardinality = card;
    std::vector<double> acc, far, mdr, f1, err;
    for (const auto* r : list) {
      if (!r->ok) {
        ++row.failures;
        continue;
      }
      acc.push_back(r->metrics.accuracy);
      far.push_back(r->metrics.far);
      mdr.push_back(r->metrics.mdr);
      f1.push_back(r->metrics.f1);
      err.push_back(r->error);
    }
    row.count = static_cast<int>(err.size());
    row.accuracy = mean_std(acc);
    row.far = mean_std(far);
    row.mdr = mean_std(mdr);
    row.f1 = mean_std(f1);
    row.error = mean_std(err);
    rows.push_back(row);
  }
  return rows;
}

ExperimentResult run_experiment(const Dataset& ds, const PriorProvider& priors, const DiagnosisOptions& options,
                                int threads) {
  std::vector<const ScenarioRecord*> tests;
  for (const auto& shard : ds.shards)
    if (shard.info.split == "test")
      for (const auto& r : shard.records) tests.push_back(&r);
  if (tests.empty()) throw ValidationError("dataset has no test records");

  const GridTopology& grid = ds.model.topology;
  // Resolve every prior up front so a missing one fails before any solve.
  std::vector<PriorVector> resolved;
  resolved.reserve(tests.size());
  for (const auto* r : tests) resolved.push_back(priors.prior_for(grid, ds.area, *r));

  ExperimentResult out;
  out.prior = std::string(to_string(priors.source));
  out.records.resize(tests.size());
  parallel_for(tests.size(), threads, [&](std::size_t i) {
    const ScenarioRecord& rec = *tests[i];
    EvaluationRecord& ev = out.records[i];
    ev.scenario_id = rec.id;
    ev.cardinality = rec.cardinality;
    ev.truth = rec.labels;
    ev.x_true = rec.x_h;
    try {
      ev.diagnosis = diagnose(ds.model, ds.area, rec.measurements, resolved[i], options);
    } catch (const ReconstructionError& e) {
      ev.reconstruction_failed = true;
      ev.failure = e.what();
      return;
    } catch (const SolverError& e) {
      ev.failure = e.what();
      ev.status = LpStatus::IterationLimit;
      return;
    }
    ev.status = ev.diagnosis.status;
    if (!ev.diagnosis.ok()) return;
    ev.ok = true;
    ev.x_hat = ev.diagnosis.x_h;
    ev.predicted = threshold_labels(ev.x_hat);
    ev.metrics = classification_metrics(ev.predicted, ev.truth);
    ev.error = normalized_error(ev.x_hat, ev.x_true);
    ev.theta_error = (ev.diagnosis.reconstruction.theta_post_h - rec.theta_post_h).lpNorm<Eigen::Infinity>();
  });
  out.rows = summarize(out.records);
  return out;
}

namespace {

json row_json(const SummaryRow& r) {
  auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; };
  return {{"cardinality", r.cardinality}, {"count", r.count},          {"failures", r.failures},
          {"accuracy", ms(r.accuracy)},   {"far", ms(r.far)},          {"mdr", ms(r.mdr)},
          {"f1", ms(r.f1)},               {"error", ms(r.error)}};
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string summary_csv(const ExperimentResult& res) {
  std::ostringstream os;
  os.precision(17);
  os << "prior,cardinality,count,failures,accuracy_mean,accuracy_std,far_mean,far_std,mdr_mean,mdr_std,"
        "f1_mean,f1_std,error_mean,error_std\n";
  for (const auto& r : res.rows) {
    os << res.prior << ',' << r.cardinality << ',' << r.count << ',' << r.failures << ',' << r.accuracy.mean << ','
       << r.accuracy.std << ',' << r.far.mean << ',' << r.far.std << ',' << r.mdr.mean << ',' << r.mdr.std << ','
       << r.f1.mean << ',' << r.f1.std << ',' << r.error.mean << ',' << r.error.std << '\n';
  }
  return os.str();
}

std::string summary_json(const ExperimentResult& res) {
  json rows = json::array();
  for (const auto& r : res.rows) rows.push_back(row_json(r));
  json j{{"prior", res.prior}, {"records", res.records.size()}, {"failures", res.failures()}, {"rows", rows}};
  return j.dump(2) + "\n";
}

std::string summary_text(const ExperimentResult& res) {
  std::ostringstream os;
  os << "prior: " << res.prior << "  records: " << res.records.size() << "  failures: " << res.failures() << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%4s %6s %17s %17s %17s %17s %17s\n", "|F|", "n", "accuracy", "FAR", "MDR", "F1",
                "error");
  os << line;
  for (const auto& r : res.rows) {
    auto cell = [](const MeanStd& m) { return fixed(m.mean) + " +- " + fixed(m.std); };
    std::snprintf(line, sizeof line, "%4d %6d %17s %17s %17s %17s %17s\n", r.cardinality, r.count,
                  cell(r.accuracy).c_str(), cell(r.far).c_str(), cell(r.mdr).c_str(), cell(r.f1).c_str(),
                  cell(r.error).c_str());
    os << line;
  }
  return os.str();
}

void write_experiment(const Dataset& ds, const ExperimentResult& res, const std::filesystem::path& out_dir) {
  write_text_file(out_dir / "summary.csv", summary_csv(res));
  write_text_file(out_dir / "summary.json", summary_json(res));
  write_text_file(out_dir / "summary.txt", summary_text(res));
  std::string lines;
  for (const auto& r : res.records) {
    json j;
    if (r.ok) {
      j = json::parse(diagnosis_to_json(ds.model.topology, ds.area, r.diagnosis, r.scenario_id));
      j["metrics"] = {{"tp", r.metrics.tp},
                      {"fp", r.metrics.fp},
                      {"tn", r.metrics.tn},
                      {"fn", r.metrics.fn},
                      {"accuracy", r.metrics.accuracy},
                      {"far", r.metrics.far},
                      {"mdr", r.metrics.mdr},
                      {"f1", r.metrics.f1},
                      {"error", r.error},
                      {"theta_error", r.theta_error}};
    } else {
      j = {{"scenario_id", r.scenario_id},
           {"status", to_string(r.status)},
           {"failure", r.failure.empty() ? std::string(to_string(r.status)) : r.failure}};
    }
    j["cardinality"] = r.cardinality;
    lines += j.dump();
    lines += '\n';
  }
  write_text_file(out_dir / "diagnoses.jsonl", lines);
}

}  // namespace pcpa
