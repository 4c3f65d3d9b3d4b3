#pragma once

#include "pcpa/grid.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace pcpa {

inline constexpr double kSupportTolerance = 1e-6;
inline constexpr double kConsistencyTolerance = 1e-6;

/// Buses where |A (theta - theta') - delta| exceeds `tol`.
std::vector<int> localize_attacked_buses(const Eigen::MatrixXd& admittance, const Eigen::VectorXd& theta,
                                         const Eigen::VectorXd& theta_post, const Eigen::VectorXd& delta,
                                         double tol = kSupportTolerance);

struct ThetaReconstruction {
  Eigen::VectorXd theta_post_h;
  double residual = 0.0;  // inf-norm of the least-squares residual
  double smallest_singular_value = 0.0;
  double largest_singular_value = 0.0;
};

/// Recover the blinded post-attack angles of H from the H-bar rows of
///   A_{Hbar|H} theta'_H = A_{Hbar|H} theta_H + A_{Hbar|Hbar} (theta_Hbar - theta'_Hbar) - delta_Hbar
/// by least squares. `theta` is the full pre-attack vector; the other two are
/// ordered like `view.hbar_buses`. Throws ReconstructionError on rank loss or
/// when the residual exceeds `consistency_tol`.
ThetaReconstruction reconstruct_theta_h(const PartitionedView& view, const Eigen::VectorXd& theta,
                                        const Eigen::VectorXd& theta_post_hbar, const Eigen::VectorXd& delta_hbar,
                                        double rank_tol = 1e-8, double consistency_tol = kConsistencyTolerance);

/// True iff some H-bar injection changed by more than `tol`.
bool detect_islanding(const Eigen::VectorXd& p_hbar, const Eigen::VectorXd& p_post_hbar, double tol = kSupportTolerance);

struct InjectionReconstruction {
  Eigen::VectorXd p_post_h;
  Eigen::VectorXd delta_h;
  double alpha = 1.0;
  int reference_bus = -1;  // H-bar bus index the ratio was read from; -1 without islanding
};

/// Recover p'_H from the shedding ratio observed at a boundary neighbour.
///
/// Without islanding, p'_H = p_H. Otherwise the qualifying neighbours are
/// H-bar buses adjacent to H with |p_v| > tol and a changed injection; the one
/// with the largest |p_v| supplies alpha = p'_v / p_v. Returns nullopt when no
/// neighbour qualifies.
std::optional<InjectionReconstruction> reconstruct_p_h(const GridTopology& grid, const PartitionedView& view,
                                                       const Eigen::VectorXd& p,
                                                       const Eigen::VectorXd& p_post_hbar,
                                                       double tol = kSupportTolerance);

/// Everything recovered for the blinded area before the optimization step.
struct ReconstructionReport {
  Eigen::VectorXd theta_post_h;
  Eigen::VectorXd theta_post;  // merged full vector
  bool islanding = false;
  std::optional<InjectionReconstruction> injections;
  double theta_residual = 0.0;
  double smallest_singular_value = 0.0;
  double largest_singular_value = 0.0;
};

}  // namespace pcpa
