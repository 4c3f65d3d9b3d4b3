#pragma once

#include "pcpa/area.hpp"
#include "pcpa/case_io.hpp"
#include "pcpa/grid.hpp"

#include <filesystem>
#include <string>

#ifndef PCPA_TEST_DATA_DIR
#define PCPA_TEST_DATA_DIR "data"
#endif

namespace fixtures {

inline std::filesystem::path data_path(const std::string& file) { return std::filesystem::path(PCPA_TEST_DATA_DIR) / file; }

inline const pcpa::GridModel& ieee30() {
  static const pcpa::GridModel model(pcpa::load_grid(data_path("case30.m")));
  return model;
}

inline const pcpa::GridModel& ieee118() {
  static const pcpa::GridModel model(pcpa::load_grid(data_path("case118.m")));
  return model;
}

// 4-bus ring 1-2-3-4-1 plus the chord 1-3; balanced injections.
inline pcpa::GridTopology ring4() {
  return pcpa::GridTopology("ring4",
                            {{1, 1.0, 0.0}, {2, -0.4, 0.4}, {3, 0.2, 0.1}, {4, -0.8, 0.8}},
                            {{1, 1, 2, 0.1}, {2, 2, 3, 0.2}, {3, 3, 4, 0.25}, {4, 4, 1, 0.5}, {5, 1, 3, 0.4}});
}

// Base injections with the mismatch (losses in the case data) moved to bus 0.
inline Eigen::VectorXd balanced_injections(const pcpa::GridTopology& g) {
  Eigen::VectorXd p = g.base_injections();
  p[0] -= p.sum();
  return p;
}

// The certified 8-bus, 8-line area used across the suites.
inline const pcpa::AttackedArea& area30() {
  static const pcpa::AttackedArea area = [] {
    pcpa::DbgsOptions opts;
    opts.required_edges = 8;
    return pcpa::dbgs(ieee30(), 8, 7, opts);
  }();
  return area;
}

// Certified areas where opening lines of E_H can split H-bar: on the 30-bus
// system {9, 11} is reachable only through H, on the 118-bus system {8, 9, 10}.
inline const pcpa::AttackedArea& island30() {
  static const pcpa::AttackedArea area = pcpa::dbgs(ieee30(), 8, 21);
  return area;
}

inline const pcpa::AttackedArea& island118() {
  static const pcpa::AttackedArea area = pcpa::dbgs(ieee118(), 20, 1);
  return area;
}

}  // namespace fixtures
