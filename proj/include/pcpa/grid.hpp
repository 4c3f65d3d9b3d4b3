#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace pcpa {

using BusId = int;
using LineId = int;

struct Bus {
  BusId id = 0;
  double p_base = 0.0;  // net injection, per-unit (generation - load)
  double load = 0.0;    // demand, per-unit
};

struct Line {
  LineId id = 0;
  BusId from = 0;
  BusId to = 0;
  double reactance = 0.0;  // per-unit, > 0
};

/// Incident line seen from one bus.
struct Adjacency {
  int line = 0;  // line index
  int bus = 0;   // index of the opposite bus
};

/// Connected bus/line graph with positive reactances.
///
/// Buses are kept sorted by id; bus and line *indices* (0-based positions)
/// are used by every matrix in the toolkit. Line order is the order given
/// at construction and fixes the column order of the incidence matrix.
class GridTopology {
 public:
  GridTopology(std::string name, std::vector<Bus> buses, std::vector<Line> lines,
               double base_mva = 100.0);

  const std::string& name() const { return name_; }
  double base_mva() const { return base_mva_; }
  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  std::size_t num_buses() const { return buses_.size(); }
  std::size_t num_lines() const { return lines_.size(); }

  int bus_index(BusId id) const;
  int line_index(LineId id) const;
  bool has_bus(BusId id) const { return bus_pos_.contains(id); }

  int from_index(int line) const { return from_idx_[line]; }
  int to_index(int line) const { return to_idx_[line]; }
  const std::vector<Adjacency>& neighbors(int bus) const { return adjacency_[bus]; }

  Eigen::VectorXd reactances() const;
  /// Line susceptances 1/r, the diagonal of Gamma.
  Eigen::VectorXd susceptances() const;
  Eigen::VectorXd base_injections() const;
  Eigen::VectorXd base_loads() const;
  /// Base generation per bus, p_base + load.
  Eigen::VectorXd base_generation() const;

 private:
  std::string name_;
  double base_mva_;
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  std::unordered_map<BusId, int> bus_pos_;
  std::unordered_map<LineId, int> line_pos_;
  std::vector<int> from_idx_;
  std::vector<int> to_idx_;
  std::vector<std::vector<Adjacency>> adjacency_;
};

/// |V| x |E| matrix with +1 at the from-bus and -1 at the to-bus of each line.
struct IncidenceMatrix {
  Eigen::MatrixXd values;
};

/// Weighted Laplacian A = D Gamma D^T.
struct AdmittanceMatrix {
  Eigen::MatrixXd values;
};

IncidenceMatrix build_incidence(const GridTopology& grid);
AdmittanceMatrix build_admittance(const IncidenceMatrix& incidence,
                                  const Eigen::VectorXd& reactances);

/// Topology together with the matrices derived from it.
struct GridModel {
  GridTopology topology;
  IncidenceMatrix incidence;
  AdmittanceMatrix admittance;
  Eigen::VectorXd gamma;  // 1 / r per line

  explicit GridModel(GridTopology grid);
};

/// Block view of the admittance and incidence matrices for an attacked area H.
///
/// `h_buses` and `hbar_buses` hold bus indices in ascending order; `h_lines`
/// holds the indices of lines with both endpoints in H, in grid order.
struct PartitionedView {
  std::vector<int> h_buses;
  std::vector<int> hbar_buses;
  std::vector<int> h_lines;
  std::vector<int> boundary_lines;
  // -1 when the bus/line is not in the respective set.
  std::vector<int> h_position;
  std::vector<int> hbar_position;
  std::vector<int> h_line_position;

  Eigen::MatrixXd a_hh;
  Eigen::MatrixXd a_hhbar;
  Eigen::MatrixXd a_hbarh;
  Eigen::MatrixXd a_hbarhbar;
  Eigen::MatrixXd a_hg;
  Eigen::MatrixXd d_h;

  /// Rebuild the full admittance matrix from the four blocks.
  Eigen::MatrixXd reassemble() const;
};

PartitionedView partition(const GridModel& model, std::span<const BusId> attacked_buses);
PartitionedView partition_by_index(const GridModel& model, std::span<const int> attacked_bus_indices);

/// Gather the entries of `full` at `indices`.
Eigen::VectorXd gather(const Eigen::VectorXd& full, std::span<const int> indices);

}  // namespace pcpa
