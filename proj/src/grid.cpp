#include "pcpa/grid.hpp"

#include "pcpa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <unordered_set>

namespace pcpa {

GridTopology::GridTopology(std::string name, std::vector<Bus> buses, std::vector<Line> lines,
                           double base_mva)
    : name_(std::move(name)), base_mva_(base_mva), buses_(std::move(buses)), lines_(std::move(lines)) {
  if (buses_.empty()) throw ValidationError("grid has no buses");
  if (!(base_mva_ > 0.0) || !std::isfinite(base_mva_)) throw ValidationError("base MVA must be positive");
  std::sort(buses_.begin(), buses_.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (!bus_pos_.emplace(buses_[i].id, static_cast<int>(i)).second) {
      throw ValidationError("duplicate bus id " + std::to_string(buses_[i].id));
    }
    if (!std::isfinite(buses_[i].p_base) || !std::isfinite(buses_[i].load)) {
      throw ValidationError("non-finite injection at bus " + std::to_string(buses_[i].id));
    }
  }

  adjacency_.resize(buses_.size());
  from_idx_.reserve(lines_.size());
  to_idx_.reserve(lines_.size());
  for (std::size_t j = 0; j < lines_.size(); ++j) {
    const Line& l = lines_[j];
    if (!line_pos_.emplace(l.id, static_cast<int>(j)).second) {
      throw ValidationError("duplicate line id " + std::to_string(l.id));
    }
    if (!(l.reactance > 0.0) || !std::isfinite(l.reactance)) {
      throw ValidationError("line " + std::to_string(l.id) + " has nonpositive reactance");
    }
    auto f = bus_pos_.find(l.from);
    auto t = bus_pos_.find(l.to);
    if (f == bus_pos_.end() || t == bus_pos_.end()) {
      throw ValidationError("line " + std::to_string(l.id) + " references an unknown bus");
    }
    if (f->second == t->second) {
      throw ValidationError("line " + std::to_string(l.id) + " is a self loop");
    }
    from_idx_.push_back(f->second);
    to_idx_.push_back(t->second);
    adjacency_[f->second].push_back({static_cast<int>(j), t->second});
    adjacency_[t->second].push_back({static_cast<int>(j), f->second});
  }

  // connectivity
  std::vector<char> seen(buses_.size(), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (const auto& adj : adjacency_[u]) {
      if (!seen[adj.bus]) {
        seen[adj.bus] = 1;
        ++reached;
        q.push(adj.bus);
      }
    }
  }
  if (reached != buses_.size()) throw ValidationError("grid graph is disconnected");
}

int GridTopology::bus_index(BusId id) const {
  auto it = bus_pos_.find(id);
  if (it == bus_pos_.end()) throw ValidationError("unknown bus id " + std::to_string(id));
  return it->second;
}

int GridTopology::line_index(LineId id) const {
  auto it = line_pos_.find(id);
  if (it == line_pos_.end()) throw ValidationError("unknown line id " + std::to_string(id));
  return it->second;
}

Eigen::VectorXd GridTopology::reactances() const {
  Eigen::VectorXd r(lines_.size());
  for (std::size_t j = 0; j < lines_.size(); ++j) r[j] = lines_[j].reactance;
  return r;
}

Eigen::VectorXd GridTopology::susceptances() const { return reactances().cwiseInverse(); }

Eigen::VectorXd GridTopology::base_injections() const {
  Eigen::VectorXd p(buses_.size());
  for (std::size_t i = 0; i < buses_.size(); ++i) p[i] = buses_[i].p_base;
  return p;
}

Eigen::VectorXd GridTopology::base_loads() const {
  Eigen::VectorXd l(buses_.size());
  for (std::size_t i = 0; i < buses_.size(); ++i) l[i] = buses_[i].load;
  return l;
}

Eigen::VectorXd GridTopology::base_generation() const { return base_injections() + base_loads(); }

IncidenceMatrix build_incidence(const GridTopology& grid) {
  IncidenceMatrix d{Eigen::MatrixXd::Zero(grid.num_buses(), grid.num_lines())};
  for (std::size_t j = 0; j < grid.num_lines(); ++j) {
    d.values(grid.from_index(static_cast<int>(j)), j) = 1.0;
    d.values(grid.to_index(static_cast<int>(j)), j) = -1.0;
  }
  return d;
}

AdmittanceMatrix build_admittance(const IncidenceMatrix& incidence, const Eigen::VectorXd& reactances) {
  if (incidence.values.cols() != reactances.size()) {
    throw ValidationError("incidence columns and reactance count differ");
  }
  if ((reactances.array() <= 0.0).any()) throw ValidationError("reactances must be positive");
  const Eigen::VectorXd gamma = reactances.cwiseInverse();
  return {incidence.values * gamma.asDiagonal() * incidence.values.transpose()};
}

GridModel::GridModel(GridTopology grid)
    : topology(std::move(grid)),
      incidence(build_incidence(topology)),
      admittance(build_admittance(incidence, topology.reactances())),
      gamma(topology.susceptances()) {}

Eigen::MatrixXd PartitionedView::reassemble() const {
  const auto n = static_cast<Eigen::Index>(h_buses.size() + hbar_buses.size());
  Eigen::MatrixXd a(n, n);
  auto place = [&](const Eigen::MatrixXd& block, const std::vector<int>& rows, const std::vector<int>& cols) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) a(rows[i], cols[j]) = block(i, j);
  };
  place(a_hh, h_buses, h_buses);
  place(a_hhbar, h_buses, hbar_buses);
  place(a_hbarh, hbar_buses, h_buses);
  place(a_hbarhbar, hbar_buses, hbar_buses);
  return a;
}

namespace {

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

}  // namespace

PartitionedView partition_by_index(const GridModel& model, std::span<const int> attacked_bus_indices) {
  const GridTopology& grid = model.topology;
  const int n = static_cast<int>(grid.num_buses());
  std::vector<char> in_h(n, 0);
  for (int b : attacked_bus_indices) {
    if (b < 0 || b >= n) throw ValidationError("bus index out of range");
    in_h[b] = 1;
  }
  PartitionedView v;
  v.h_position.assign(n, -1);
  v.hbar_position.assign(n, -1);
  for (int b = 0; b < n; ++b) {
    if (in_h[b]) {
      v.h_position[b] = static_cast<int>(v.h_buses.size());
      v.h_buses.push_back(b);
    } else {
      v.hbar_position[b] = static_cast<int>(v.hbar_buses.size());
      v.hbar_buses.push_back(b);
    }
  }
  if (v.h_buses.empty()) throw ValidationError("attacked area is empty");
  if (v.hbar_buses.empty()) throw ValidationError("attacked area covers the whole grid");

  v.h_line_position.assign(grid.num_lines(), -1);
  for (int j = 0; j < static_cast<int>(grid.num_lines()); ++j) {
    const bool f = in_h[grid.from_index(j)];
    const bool t = in_h[grid.to_index(j)];
    if (f && t) {
      v.h_line_position[j] = static_cast<int>(v.h_lines.size());
      v.h_lines.push_back(j);
    } else if (f != t) {
      v.boundary_lines.push_back(j);
    }
  }

  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  const Eigen::MatrixXd& a = model.admittance.values;
  v.a_hh = submatrix(a, v.h_buses, v.h_buses);
  v.a_hhbar = submatrix(a, v.h_buses, v.hbar_buses);
  v.a_hbarh = submatrix(a, v.hbar_buses, v.h_buses);
  v.a_hbarhbar = submatrix(a, v.hbar_buses, v.hbar_buses);
  v.a_hg = submatrix(a, v.h_buses, all);
  v.d_h = submatrix(model.incidence.values, v.h_buses, v.h_lines);
  return v;
}

PartitionedView partition(const GridModel& model, std::span<const BusId> attacked_buses) {
  std::vector<int> idx;
  idx.reserve(attacked_buses.size());
  std::unordered_set<BusId> seen;
  for (BusId id : attacked_buses) {
    if (!seen.insert(id).second) continue;
    idx.push_back(model.topology.bus_index(id));
  }
  return partition_by_index(model, idx);
}

Eigen::VectorXd gather(const Eigen::VectorXd& full, std::span<const int> indices) {
  Eigen::VectorXd out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out[i] = full[indices[i]];
  return out;
}

}  // namespace pcpa
