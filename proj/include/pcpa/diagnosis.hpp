#pragma once

#include "pcpa/area.hpp"
#include "pcpa/grid.hpp"
#include "pcpa/lp.hpp"
#include "pcpa/reconstruction.hpp"
#include "pcpa/simulator.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcpa {

enum class PriorSource { Uniform, Oracle, File, Model };

std::string_view to_string(PriorSource source);
PriorSource parse_prior_source(std::string_view text);

/// Per-line attack probability over E_H (canonical E_H order).
struct PriorVector {
  std::vector<double> y;
  PriorSource source = PriorSource::Uniform;

  /// Throws PriorMismatch when the length differs from `num_lines` or an entry is outside [0, 1].
  void validate(std::size_t num_lines) const;
};

PriorVector uniform_prior(std::size_t num_lines);
/// y_e = 1 on attacked lines, 0 elsewhere.
PriorVector oracle_prior(const Eigen::VectorXd& x_h_true);

inline constexpr double kMinWeight = 1e-3;

/// Objective weights c = max(1 - y, c_min).
Eigen::VectorXd prior_weights(const PriorVector& prior, double c_min = kMinWeight);

/// D' = D Gamma diag(D^T theta').
Eigen::MatrixXd build_d_prime(const IncidenceMatrix& incidence, const Eigen::VectorXd& gamma,
                              const Eigen::VectorXd& theta_post);
/// Rows V_H, columns E_H of D'.
Eigen::MatrixXd d_prime_h(const PartitionedView& view, const Eigen::MatrixXd& d_prime);

/// How Delta_H enters the program.
///  - Zero:         no islanding, Delta_H = 0.
///  - Fixed:        Delta_H reconstructed from a boundary neighbour, a constant.
///  - Proportional: Delta_H = (1 - alpha) p_H with alpha in [0, 1] a decision variable.
enum class DeltaMode { Zero, Fixed, Proportional };

std::string_view to_string(DeltaMode mode);

struct DeltaSpec {
  DeltaMode mode = DeltaMode::Zero;
  Eigen::VectorXd fixed_delta_h;  // Fixed
  Eigen::VectorXd p_h;            // Proportional
  double delta_hbar_sum = 0.0;    // Proportional: 1^T Delta_Hbar
};

struct P2Problem {
  LinearProgram lp;
  DeltaSpec delta;
  Eigen::VectorXd flow_term;  // A_{H|G} (theta - theta')
  Eigen::MatrixXd d_prime_h;
  Eigen::VectorXd weights;
  std::vector<int> unidentifiable;  // E_H positions whose D' column vanishes

  std::size_t num_lines() const { return static_cast<std::size_t>(d_prime_h.cols()); }
  bool has_alpha() const { return delta.mode == DeltaMode::Proportional; }
};

/// Prior-weighted l1 program over x_H in [0, 1] (plus alpha when Delta_H is
/// proportional) with equality rows Delta_H = A_{H|G}(theta - theta') + D'_H x_H.
/// In the proportional mode the balance row 1^T Delta_H = -1^T Delta_Hbar is
/// appended. `theta` and `theta_post` are full vectors.
P2Problem assemble_p2(const GridModel& model, const PartitionedView& view, const Eigen::VectorXd& theta,
                      const Eigen::VectorXd& theta_post, const DeltaSpec& delta, const PriorVector& prior,
                      double c_min = kMinWeight);

struct DiagnosisOptions {
  double c_min = kMinWeight;
  double support_tol = kSupportTolerance;
  double rank_tol = kRankTolerance;
  double consistency_tol = kConsistencyTolerance;
  bool reconstruct_injections = true;
  SimplexOptions simplex;
};

struct DiagnosisResult {
  Eigen::VectorXd x_h;
  Eigen::VectorXd delta_h;
  std::optional<double> alpha;
  double objective = 0.0;
  LpStatus status = LpStatus::Infeasible;
  DeltaMode delta_mode = DeltaMode::Zero;
  int lp_variables = 0;
  int iterations = 0;
  double primal_residual = 0.0;
  ReconstructionReport reconstruction;
  std::vector<int> unidentifiable;  // E_H positions

  bool ok() const { return status == LpStatus::Optimal; }
};

/// Full diagnosis pipeline for one blinded scenario: angle reconstruction,
/// islanding check, optional injection reconstruction, program assembly and
/// LP solve. Throws ReconstructionError or PriorMismatch; LP failures are
/// reported through `status`.
DiagnosisResult diagnose(const GridModel& model, const AttackedArea& area, const MeasurementSet& measurements,
                         const PriorVector& prior, const DiagnosisOptions& options = {});

inline constexpr int kMaxBruteForceEdges = 16;

/// Minimum-cardinality binary x_H satisfying the equality rows of `problem`
/// within `tol` (alpha, when present, is fitted by clamped least squares).
/// Ties go to the lexicographically smallest vector. Throws ValidationError
/// when |E_H| > max_edges and SolverError when no binary vector is feasible.
std::vector<int> brute_force_bip(const P2Problem& problem, int max_edges = kMaxBruteForceEdges, double tol = 1e-6);

}  // namespace pcpa
