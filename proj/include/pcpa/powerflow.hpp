#pragma once

#include "pcpa/grid.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace pcpa {

using InjectionVector = Eigen::VectorXd;  // per-unit, generation positive
using AngleVector = Eigen::VectorXd;      // radians
using FlowVector = Eigen::VectorXd;       // per-unit, signed by line direction

inline constexpr double kBalanceTolerance = 1e-9;

using Island = std::vector<int>;

/// Connected components of the graph whose edges are the nonzero
/// off-diagonal entries of `admittance` (|a_uv| > tol). Each island is sorted
/// and islands are ordered by their smallest bus index.
std::vector<Island> find_islands(const Eigen::MatrixXd& admittance, double tol = 0.0);
std::vector<Island> find_islands(const GridTopology& grid);
/// Islands of the grid after removing every line with `attack[j] >= 1`.
std::vector<Island> find_islands(const GridTopology& grid, const Eigen::VectorXd& attack);

/// Lowest bus index of each island.
std::vector<int> default_references(const std::vector<Island>& islands);

/// Solve A theta = p with one reference angle fixed to zero per island.
///
/// Throws ValidationError when an island is unbalanced or does not contain
/// exactly one reference, SolverError when the reduced system is singular or
/// the residual exceeds the balance tolerance.
AngleVector solve_dc(const Eigen::MatrixXd& admittance, const InjectionVector& p, std::span<const int> references);

/// Solve with the default references of `admittance`'s islands.
/// Off-diagonal entries below 1e-12 of the largest diagonal entry count as absent.
AngleVector solve_dc(const Eigen::MatrixXd& admittance, const InjectionVector& p);

/// p_uv = (theta_u - theta_v) / r_uv for every line.
FlowVector line_flows(const AngleVector& theta, const GridTopology& grid);

}  // namespace pcpa
