#include "pcpa/area.hpp"

#include "pcpa/errors.hpp"
#include "pcpa/powerflow.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace pcpa {

namespace {

std::vector<char> membership(std::size_t n, std::span<const int> buses) {
  std::vector<char> in(n, 0);
  for (int b : buses) in.at(static_cast<std::size_t>(b)) = 1;
  return in;
}

void fill_lines(const GridTopology& grid, AttackedArea& area) {
  const auto in = membership(grid.num_buses(), area.buses);
  area.lines.clear();
  area.boundary_lines.clear();
  for (int j = 0; j < static_cast<int>(grid.num_lines()); ++j) {
    const bool f = in[grid.from_index(j)];
    const bool t = in[grid.to_index(j)];
    if (f && t) area.lines.push_back(j);
    else if (f != t) area.boundary_lines.push_back(j);
  }
}

std::string area_id(const GridTopology& grid, const AttackedArea& area) {
  std::string id = grid.name() + "-n" + std::to_string(area.buses.size());
  if (area.seed_bus >= 0) id += "-b" + std::to_string(grid.buses()[area.seed_bus].id);
  else {
    for (int b : area.buses) id += "-" + std::to_string(grid.buses()[b].id);
  }
  return id;
}

}  // namespace

AttackedArea grow_area(const GridTopology& grid, int seed_bus, int target_size) {
  const int n = static_cast<int>(grid.num_buses());
  if (seed_bus < 0 || seed_bus >= n) throw ValidationError("seed bus out of range");
  if (target_size < 1 || target_size > n) throw ValidationError("target size out of range");

  std::vector<char> in(n, 0);
  in[seed_bus] = 1;
  AttackedArea area;
  area.buses.push_back(seed_bus);
  area.seed_bus = seed_bus;

  while (static_cast<int>(area.buses.size()) < target_size) {
    std::set<int> candidates;
    for (int u : area.buses)
      for (const auto& adj : grid.neighbors(u))
        if (!in[adj.bus]) candidates.insert(adj.bus);
    if (candidates.empty()) throw ValidationError("area cannot grow further");

    int best = -1;
    int best_degree = -1;
    for (int v : candidates) {  // ascending, so strict > keeps the lowest index on ties
      std::set<int> outside;
      for (const auto& adj : grid.neighbors(v))
        if (!in[adj.bus]) outside.insert(adj.bus);
      const int d = static_cast<int>(outside.size());
      if (d > best_degree) {
        best_degree = d;
        best = v;
      }
    }
    in[best] = 1;
    area.buses.push_back(best);
  }
  std::sort(area.buses.begin(), area.buses.end());
  fill_lines(grid, area);
  area.id = area_id(grid, area);
  return area;
}

void certify(const GridModel& model, AttackedArea& area, double rank_tol) {
  const GridTopology& grid = model.topology;
  const std::size_t h = area.buses.size();
  area.assumption1_ok = h <= grid.num_buses() - h;
  area.matching_cover_ok = check_matching_cover(grid, area.buses).covers;
  if (h == 0 || h == grid.num_buses()) {
    area.full_column_rank_ok = false;
    return;
  }
  const PartitionedView view = partition_by_index(model, area.buses);
  area.full_column_rank_ok = area.assumption1_ok && check_full_column_rank(view.a_hbarh, rank_tol);
}

AttackedArea make_area(const GridModel& model, std::vector<int> bus_indices, double rank_tol) {
  AttackedArea area;
  std::sort(bus_indices.begin(), bus_indices.end());
  bus_indices.erase(std::unique(bus_indices.begin(), bus_indices.end()), bus_indices.end());
  for (int b : bus_indices)
    if (b < 0 || b >= static_cast<int>(model.topology.num_buses())) throw ValidationError("bus index out of range");
  area.buses = std::move(bus_indices);
  fill_lines(model.topology, area);
  area.id = area_id(model.topology, area);
  certify(model, area, rank_tol);
  return area;
}

AttackedArea dbgs(const GridModel& model, int target_size, std::uint64_t rng_seed, const DbgsOptions& options) {
  const GridTopology& grid = model.topology;
  if (target_size < 1) throw ValidationError("target size must be at least 1");
  if (static_cast<std::size_t>(target_size) > grid.num_buses() / 2) {
    throw CertificationError("target size " + std::to_string(target_size) + " violates |V_H| <= |V_Hbar| on " +
                             std::to_string(grid.num_buses()) + " buses");
  }
  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(grid.num_buses()) - 1);
  for (int attempt = 1; attempt <= options.max_retries; ++attempt) {
    AttackedArea area = grow_area(grid, pick(rng), target_size);
    area.seed = rng_seed;
    area.attempts = attempt;
    if (options.required_edges && static_cast<int>(area.lines.size()) != *options.required_edges) continue;
    certify(model, area, options.rank_tol);
    if (area.certified()) return area;
  }
  throw CertificationError("no certified area of size " + std::to_string(target_size) + " after " +
                           std::to_string(options.max_retries) + " seeds");
}

MatchingResult check_matching_cover(const GridTopology& grid, std::span<const int> h_buses) {
  const auto in = membership(grid.num_buses(), h_buses);
  const int n = static_cast<int>(grid.num_buses());
  std::vector<std::vector<int>> options(h_buses.size());
  for (std::size_t i = 0; i < h_buses.size(); ++i) {
    std::set<int> outside;
    for (const auto& adj : grid.neighbors(h_buses[i]))
      if (!in[adj.bus]) outside.insert(adj.bus);
    options[i].assign(outside.begin(), outside.end());
  }

  // Kuhn's augmenting paths; match_of[hbar bus] = position in h_buses.
  std::vector<int> match_of(n, -1);
  std::vector<int> visited(n, -1);
  auto augment = [&](auto&& self, int i, int stamp) -> bool {
    for (int v : options[i]) {
      if (visited[v] == stamp) continue;
      visited[v] = stamp;
      if (match_of[v] < 0 || self(self, match_of[v], stamp)) {
        match_of[v] = i;
        return true;
      }
    }
    return false;
  };
  std::size_t size = 0;
  for (std::size_t i = 0; i < h_buses.size(); ++i)
    if (augment(augment, static_cast<int>(i), static_cast<int>(i))) ++size;

  MatchingResult result;
  result.covers = size == h_buses.size();
  for (int v = 0; v < n; ++v)
    if (match_of[v] >= 0) result.pairs.emplace_back(h_buses[match_of[v]], v);
  std::sort(result.pairs.begin(), result.pairs.end());
  return result;
}

bool check_full_column_rank(const Eigen::MatrixXd& a_hbar_h, double rank_tol) {
  if (a_hbar_h.cols() == 0) return true;
  if (a_hbar_h.rows() < a_hbar_h.cols()) return false;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_hbar_h);
  const auto& s = svd.singularValues();
  const double largest = s[0];
  const double smallest = s[s.size() - 1];
  return largest > 0.0 && smallest > rank_tol * largest;
}

int count_cycles(const GridTopology& grid, const AttackedArea& area) {
  Eigen::VectorXd removed = Eigen::VectorXd::Ones(grid.num_lines());
  for (int j : area.lines) removed[j] = 0.0;
  // Islands of the induced subgraph: every bus outside H is a singleton.
  const auto islands = find_islands(grid, removed);
  const auto in = membership(grid.num_buses(), area.buses);
  int components = 0;
  for (const auto& isl : islands)
    if (in[isl.front()]) ++components;
  return static_cast<int>(area.lines.size()) - static_cast<int>(area.buses.size()) + components;
}

std::vector<int> complement_buses(const GridTopology& grid, const AttackedArea& area) {
  const auto in = membership(grid.num_buses(), area.buses);
  std::vector<int> out;
  for (int b = 0; b < static_cast<int>(grid.num_buses()); ++b)
    if (!in[b]) out.push_back(b);
  return out;
}

}  // namespace pcpa
