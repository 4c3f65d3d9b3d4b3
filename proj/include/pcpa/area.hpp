#pragma once

#include "pcpa/grid.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pcpa {

/// Attacked area H: buses and induced lines plus certification flags.
///
/// Bus and line entries are grid indices. `buses` is ascending, `lines` is in
/// grid line order (the canonical E_H order used by x_H, priors and labels).
struct AttackedArea {
  std::string id;
  std::vector<int> buses;
  std::vector<int> lines;
  std::vector<int> boundary_lines;
  bool assumption1_ok = false;
  bool matching_cover_ok = false;
  bool full_column_rank_ok = false;
  std::uint64_t seed = 0;
  int seed_bus = -1;  // bus index the greedy growth started from
  int attempts = 0;

  bool certified() const { return assumption1_ok && matching_cover_ok && full_column_rank_ok; }
};

inline constexpr double kRankTolerance = 1e-8;

struct DbgsOptions {
  int max_retries = 50;
  /// Keep reseeding until the induced edge count equals this value.
  std::optional<int> required_edges;
  double rank_tol = kRankTolerance;
};

/// Degree-based greedy growth from `seed_bus` (index) up to `target_size`
/// buses. Candidates are buses adjacent to the current area; each step adds
/// the candidate with the most neighbours outside the area, lowest index on
/// ties. Flags are left unset.
AttackedArea grow_area(const GridTopology& grid, int seed_bus, int target_size);

/// Build an area from explicit bus indices (E_H = induced lines) and certify it.
AttackedArea make_area(const GridModel& model, std::vector<int> bus_indices, double rank_tol = kRankTolerance);

/// Compute all three certification flags in place.
void certify(const GridModel& model, AttackedArea& area, double rank_tol = kRankTolerance);

/// Randomized DBGS with reseeding until the area is certified.
///
/// Throws ValidationError for target_size < 1 and CertificationError when
/// target_size exceeds |V|/2 (|V_H| <= |V_H-bar| fails) or no certified area is found
/// within `max_retries` seeds.
AttackedArea dbgs(const GridModel& model, int target_size, std::uint64_t rng_seed, const DbgsOptions& options = {});

struct MatchingResult {
  bool covers = false;
  std::vector<std::pair<int, int>> pairs;  // (H bus, H-bar bus), bus indices
};

/// Maximum bipartite matching over the boundary lines between H and H-bar.
MatchingResult check_matching_cover(const GridTopology& grid, std::span<const int> h_buses);

/// True iff the smallest singular value exceeds rank_tol times the largest.
bool check_full_column_rank(const Eigen::MatrixXd& a_hbar_h, double rank_tol = kRankTolerance);

/// Cycle-space dimension of the induced subgraph (V_H, E_H).
int count_cycles(const GridTopology& grid, const AttackedArea& area);

/// Bus indices of H-bar, ascending.
std::vector<int> complement_buses(const GridTopology& grid, const AttackedArea& area);

}  // namespace pcpa
