#pragma once

#include "pcpa/area.hpp"
#include "pcpa/diagnosis.hpp"
#include "pcpa/grid.hpp"
#include "pcpa/simulator.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcpa {

/// Hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

// Area files carry bus and line ids; loading re-runs the certification checks.
std::string area_to_json(const GridTopology& grid, const AttackedArea& area);
AttackedArea area_from_json(const GridModel& model, std::string_view text);

/// Line ids of E_H in canonical order.
std::vector<LineId> area_edge_ids(const GridTopology& grid, const AttackedArea& area);

/// One simulated scenario as stored in a dataset shard.
struct ScenarioRecord {
  std::string id;
  std::string split;       // "train" or "test"
  std::string attack_mix;  // "alter", "cut", "open" or "mixed"
  int cardinality = 0;
  std::vector<int> attacked;  // E_H positions
  std::vector<AttackKind> kinds;
  std::vector<double> factors;
  Eigen::VectorXd x_h;
  std::vector<int> labels;  // over E_H
  MeasurementSet measurements;
  // Blinded truth, kept for checking reconstructions.
  Eigen::VectorXd theta_post_h;
  Eigen::VectorXd p_post_h;
  Eigen::VectorXd delta_h;
  double alpha = 1.0;
  bool islanding = false;
};

ScenarioRecord make_record(const GridModel& model, const AttackedArea& area, const Scenario& scenario,
                           std::string id, std::string split, std::string attack_mix);

/// Single-line JSON (no trailing newline).
std::string record_to_json(const GridTopology& grid, const AttackedArea& area, const ScenarioRecord& record);
ScenarioRecord record_from_json(const GridTopology& grid, const AttackedArea& area, std::string_view line);

/// Prior exchange entry: `{area_id, edges, y}` with an optional `scenario_id`.
struct PriorEntry {
  std::string area_id;
  std::vector<LineId> edges;
  std::vector<double> y;
  std::optional<std::string> scenario_id;
};

/// Accepts one object, an array of objects, or newline-delimited objects.
std::vector<PriorEntry> parse_prior_file(std::string_view text);
std::string prior_to_json(const PriorEntry& entry);

/// Check an entry against the area (id, edge list and y range) and convert it.
/// Throws PriorMismatch.
PriorVector prior_for_area(const PriorEntry& entry, const GridTopology& grid, const AttackedArea& area);

std::string diagnosis_to_json(const GridTopology& grid, const AttackedArea& area, const DiagnosisResult& result,
                              const std::optional<std::string>& scenario_id = std::nullopt);

}  // namespace pcpa
