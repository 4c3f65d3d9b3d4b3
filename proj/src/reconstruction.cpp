#include "pcpa/reconstruction.hpp"

#include "pcpa/errors.hpp"

#include <cmath>
#include <string>

namespace pcpa {

std::vector<int> localize_attacked_buses(const Eigen::MatrixXd& admittance, const Eigen::VectorXd& theta,
                                         const Eigen::VectorXd& theta_post, const Eigen::VectorXd& delta,
                                         double tol) {
  const Eigen::VectorXd r = admittance * (theta - theta_post) - delta;
  std::vector<int> out;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (std::abs(r[i]) > tol) out.push_back(static_cast<int>(i));
  return out;
}

ThetaReconstruction reconstruct_theta_h(const PartitionedView& view, const Eigen::VectorXd& theta,
                                        const Eigen::VectorXd& theta_post_hbar, const Eigen::VectorXd& delta_hbar,
                                        double rank_tol, double consistency_tol) {
  const auto nh = static_cast<Eigen::Index>(view.h_buses.size());
  const auto nb = static_cast<Eigen::Index>(view.hbar_buses.size());
  if (theta_post_hbar.size() != nb || delta_hbar.size() != nb) {
    throw ValidationError("reconstruct_theta_h: H-bar vectors have the wrong length");
  }
  const Eigen::VectorXd theta_h = gather(theta, view.h_buses);
  const Eigen::VectorXd theta_hbar = gather(theta, view.hbar_buses);
  const Eigen::MatrixXd& m = view.a_hbarh;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  ThetaReconstruction out;
  out.largest_singular_value = s.size() ? s[0] : 0.0;
  out.smallest_singular_value = s.size() ? s[s.size() - 1] : 0.0;
  if (nb < nh || s.size() < nh || !(out.largest_singular_value > 0.0) ||
      !(out.smallest_singular_value > rank_tol * out.largest_singular_value)) {
    throw ReconstructionError("A_{Hbar|H} is rank deficient; post-attack angles of H are not identifiable");
  }

  const Eigen::VectorXd rhs = m * theta_h + view.a_hbarhbar * (theta_hbar - theta_post_hbar) - delta_hbar;
  out.theta_post_h = m.colPivHouseholderQr().solve(rhs);
  out.residual = (m * out.theta_post_h - rhs).lpNorm<Eigen::Infinity>();
  if (!(out.residual <= consistency_tol)) {
    throw ReconstructionError("angle reconstruction residual " + std::to_string(out.residual) +
                              " exceeds the consistency threshold");
  }
  return out;
}

bool detect_islanding(const Eigen::VectorXd& p_hbar, const Eigen::VectorXd& p_post_hbar, double tol) {
  if (p_hbar.size() != p_post_hbar.size()) throw ValidationError("detect_islanding: length mismatch");
  if (p_hbar.size() == 0) return false;
  return (p_hbar - p_post_hbar).lpNorm<Eigen::Infinity>() > tol;
}

std::optional<InjectionReconstruction> reconstruct_p_h(const GridTopology& grid, const PartitionedView& view,
                                                       const Eigen::VectorXd& p,
                                                       const Eigen::VectorXd& p_post_hbar, double tol) {
  const Eigen::VectorXd p_h = gather(p, view.h_buses);
  const Eigen::VectorXd p_hbar = gather(p, view.hbar_buses);
  InjectionReconstruction out;
  if (!detect_islanding(p_hbar, p_post_hbar, tol)) {
    out.p_post_h = p_h;
    out.delta_h = Eigen::VectorXd::Zero(p_h.size());
    return out;
  }

  int best = -1;
  double best_mag = 0.0;
  for (int b : view.h_buses) {
    for (const auto& adj : grid.neighbors(b)) {
      const int pos = view.hbar_position[adj.bus];
      if (pos < 0) continue;
      const double pv = p[adj.bus];
      if (std::abs(pv) <= tol || std::abs(pv - p_post_hbar[pos]) <= tol) continue;
      if (std::abs(pv) > best_mag || (std::abs(pv) == best_mag && adj.bus < best)) {
        best = adj.bus;
        best_mag = std::abs(pv);
      }
    }
  }
  if (best < 0) return std::nullopt;

  out.reference_bus = best;
  out.alpha = p_post_hbar[view.hbar_position[best]] / p[best];
  out.p_post_h = out.alpha * p_h;
  out.delta_h = p_h - out.p_post_h;
  return out;
}

}  // namespace pcpa
