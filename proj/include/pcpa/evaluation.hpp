#pragma once

#include "pcpa/area.hpp"
#include "pcpa/diagnosis.hpp"
#include "pcpa/grid.hpp"
#include "pcpa/records.hpp"
#include "pcpa/simulator.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pcpa {

struct ClassificationMetrics {
  int tp = 0;
  int fp = 0;
  int tn = 0;
  int fn = 0;
  double accuracy = 0.0;
  double far = 0.0;  // FP / (FP + TN), 0 when there are no negatives
  double mdr = 0.0;  // FN / (TP + FN), 0 when there are no positives
  double f1 = 0.0;   // 2TP / (2TP + FP + FN), 1 when that denominator is 0
};

/// Throws ValidationError on a length mismatch or a non-binary entry.
ClassificationMetrics classification_metrics(std::span<const int> predicted, std::span<const int> truth);

/// ||x_true - x_hat|| / ||x_true||. Throws ValidationError when x_true = 0 or sizes differ.
double normalized_error(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x_true);

inline constexpr double kLabelThreshold = 0.5;

std::vector<int> threshold_labels(const Eigen::VectorXd& x, double threshold = kLabelThreshold);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

/// Hardware concurrency, at least 1.
int default_threads();

/// Run fn(0..n-1) on `threads` workers. Each index is visited exactly once;
/// the first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct DatasetConfig {
  int train_per_kind = 500;
  std::vector<AttackKind> train_kinds{AttackKind::Alter, AttackKind::Cut};
  int test_per_cardinality = 200;
  std::vector<int> cardinalities;  // empty: 1..|E_H|
  KindMix test_mix;
  SimulationConfig simulation;
};

struct ShardInfo {
  std::string file;
  std::string split;
  std::string attack_mix;
  int cardinality = 0;  // 0 for training shards (|F| varies per record)
  int records = 0;
  std::string sha256;
};

struct DatasetManifest {
  std::string grid_name;
  std::string area_id;
  std::uint64_t seed = 0;
  int num_lines = 0;
  std::string grid_sha256;
  std::string area_sha256;
  std::vector<ShardInfo> shards;
};

std::string manifest_to_json(const DatasetManifest& manifest, const DatasetConfig& config);
DatasetManifest manifest_from_json(std::string_view text);

/// Simulate every record of the dataset. Records are independent: the
/// scenario seed of record i in a shard is derive_seed(seed, shard stream, i),
/// so the output does not depend on `threads`.
///
/// Layout of `out_dir`: grid.json, area.json, one JSONL shard per training
/// kind and per test cardinality, and manifest.json with SHA-256 checksums.
DatasetManifest generate_dataset(const GridModel& model, const AttackedArea& area, const DatasetConfig& config,
                                 std::uint64_t seed, const std::filesystem::path& out_dir, int threads = 1);

struct Shard {
  ShardInfo info;
  std::vector<ScenarioRecord> records;
};

struct Dataset {
  std::filesystem::path dir;
  GridModel model;
  AttackedArea area;
  DatasetManifest manifest;
  std::vector<Shard> shards;

  std::size_t num_records() const;
};

/// Load and checksum-verify a dataset directory. Throws ValidationError on a
/// checksum or count mismatch.
Dataset load_dataset(const std::filesystem::path& dir);

/// Where per-scenario priors come from.
struct PriorProvider {
  PriorSource source = PriorSource::Uniform;
  std::vector<PriorEntry> entries;  // File / Model

  /// An entry whose scenario_id matches wins; an entry without scenario_id
  /// applies to every scenario. Throws PriorMismatch when nothing applies.
  PriorVector prior_for(const GridTopology& grid, const AttackedArea& area, const ScenarioRecord& record) const;
};

struct EvaluationRecord {
  std::string scenario_id;
  int cardinality = 0;
  bool ok = false;
  bool reconstruction_failed = false;
  std::string failure;
  LpStatus status = LpStatus::Infeasible;
  std::vector<int> predicted;
  std::vector<int> truth;
  Eigen::VectorXd x_hat;
  Eigen::VectorXd x_true;
  ClassificationMetrics metrics;
  double error = 0.0;
  double theta_error = 0.0;  // max |theta'_H reconstructed - truth|
  DiagnosisResult diagnosis;
};

struct SummaryRow {
  int cardinality = 0;
  int count = 0;     // successfully diagnosed records
  int failures = 0;  // reconstruction or solver failures
  MeanStd accuracy, far, mdr, f1, error;
};

struct ExperimentResult {
  std::string prior;
  std::vector<EvaluationRecord> records;  // dataset order
  std::vector<SummaryRow> rows;           // ascending |F|

  int failures() const;
  bool solver_failure() const;
};

/// Diagnose every test record and aggregate per |F|. Throws ValidationError
/// when the dataset has no test records and PriorMismatch when a prior is missing.
ExperimentResult run_experiment(const Dataset& dataset, const PriorProvider& priors,
                                const DiagnosisOptions& options = {}, int threads = 1);

/// Re-aggregate per-|F| rows from record-level results.
std::vector<SummaryRow> summarize(std::span<const EvaluationRecord> records);

std::string summary_csv(const ExperimentResult& result);
std::string summary_json(const ExperimentResult& result);
std::string summary_text(const ExperimentResult& result);

/// Writes summary.csv, summary.json, summary.txt and diagnoses.jsonl.
void write_experiment(const Dataset& dataset, const ExperimentResult& result, const std::filesystem::path& out_dir);

}  // namespace pcpa
