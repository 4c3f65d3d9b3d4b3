#include "pcpa/diagnosis.hpp"

#include "pcpa/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

namespace pcpa {

std::string_view to_string(PriorSource source) {
  switch (source) {
    case PriorSource::Uniform: return "uniform";
    case PriorSource::Oracle: return "oracle";
    case PriorSource::File: return "file";
    case PriorSource::Model: return "model";
  }
  return "uniform";
}

PriorSource parse_prior_source(std::string_view text) {
  if (text == "uniform") return PriorSource::Uniform;
  if (text == "oracle") return PriorSource::Oracle;
  if (text == "file") return PriorSource::File;
  if (text == "model") return PriorSource::Model;
  throw ParseError("unknown prior source '" + std::string(text) + "'");
}

std::string_view to_string(DeltaMode mode) {
  switch (mode) {
    case DeltaMode::Zero: return "zero";
    case DeltaMode::Fixed: return "fixed";
    case DeltaMode::Proportional: return "proportional";
  }
  return "zero";
}

void PriorVector::validate(std::size_t num_lines) const {
  if (y.size() != num_lines) {
    throw PriorMismatch("prior has " + std::to_string(y.size()) + " entries, area has " + std::to_string(num_lines) +
                        " lines");
  }
  for (double v : y)
    if (!(v >= 0.0 && v <= 1.0)) throw PriorMismatch("prior entry outside [0, 1]");
}

PriorVector uniform_prior(std::size_t num_lines) { return {std::vector<double>(num_lines, 0.0), PriorSource::Uniform}; }

PriorVector oracle_prior(const Eigen::VectorXd& x_h_true) {
  PriorVector p{std::vector<double>(x_h_true.size(), 0.0), PriorSource::Oracle};
  for (Eigen::Index i = 0; i < x_h_true.size(); ++i) p.y[i] = x_h_true[i] > 0.0 ? 1.0 : 0.0;
  return p;
}

Eigen::VectorXd prior_weights(const PriorVector& prior, double c_min) {
  Eigen::VectorXd c(prior.y.size());
  for (std::size_t i = 0; i < prior.y.size(); ++i) c[i] = std::max(1.0 - prior.y[i], c_min);
  return c;
}

Eigen::MatrixXd build_d_prime(const IncidenceMatrix& incidence, const Eigen::VectorXd& gamma,
                              const Eigen::VectorXd& theta_post) {
  const auto& d = incidence.values;
  if (gamma.size() != d.cols() || theta_post.size() != d.rows()) throw ValidationError("build_d_prime: dimension mismatch");
  const Eigen::VectorXd drop = d.transpose() * theta_post;
  return d * gamma.cwiseProduct(drop).asDiagonal();
}

Eigen::MatrixXd d_prime_h(const PartitionedView& view, const Eigen::MatrixXd& d_prime) {
  Eigen::MatrixXd out(view.h_buses.size(), view.h_lines.size());
  for (std::size_t i = 0; i < view.h_buses.size(); ++i)
    for (std::size_t j = 0; j < view.h_lines.size(); ++j) out(i, j) = d_prime(view.h_buses[i], view.h_lines[j]);
  return out;
}

P2Problem assemble_p2(const GridModel& model, const PartitionedView& view, const Eigen::VectorXd& theta,
                      const Eigen::VectorXd& theta_post, const DeltaSpec& delta, const PriorVector& prior,
                      double c_min) {
  const auto nh = static_cast<Eigen::Index>(view.h_buses.size());
  const auto ne = static_cast<Eigen::Index>(view.h_lines.size());
  prior.validate(static_cast<std::size_t>(ne));
  if (theta.size() != theta_post.size() || static_cast<std::size_t>(theta.size()) != model.topology.num_buses()) {
    throw ValidationError("assemble_p2: angle vectors must cover every bus");
  }

  P2Problem pb;
  pb.delta = delta;
  pb.flow_term = view.a_hg * (theta - theta_post);
  pb.d_prime_h = d_prime_h(view, build_d_prime(model.incidence, model.gamma, theta_post));
  pb.weights = prior_weights(prior, c_min);
  for (Eigen::Index j = 0; j < ne; ++j)
    if (pb.d_prime_h.col(j).cwiseAbs().maxCoeff() <= 1e-10) pb.unidentifiable.push_back(static_cast<int>(j));

  const bool alpha = delta.mode == DeltaMode::Proportional;
  const Eigen::Index nvar = ne + (alpha ? 1 : 0);
  const Eigen::Index nrow = nh + (alpha ? 1 : 0);
  LinearProgram& lp = pb.lp;
  lp.cost = Eigen::VectorXd::Zero(nvar);
  lp.cost.head(ne) = pb.weights;
  lp.lower = Eigen::VectorXd::Zero(nvar);
  lp.upper = Eigen::VectorXd::Ones(nvar);
  lp.eq_matrix = Eigen::MatrixXd::Zero(nrow, nvar);
  lp.eq_matrix.topLeftCorner(nh, ne) = pb.d_prime_h;
  lp.eq_rhs = Eigen::VectorXd::Zero(nrow);

  switch (delta.mode) {
    case DeltaMode::Zero:
      lp.eq_rhs.head(nh) = -pb.flow_term;
      break;
    case DeltaMode::Fixed:
      if (delta.fixed_delta_h.size() != nh) throw ValidationError("assemble_p2: fixed Delta_H has the wrong length");
      lp.eq_rhs.head(nh) = delta.fixed_delta_h - pb.flow_term;
      break;
    case DeltaMode::Proportional: {
      if (delta.p_h.size() != nh) throw ValidationError("assemble_p2: p_H has the wrong length");
      // (1 - alpha) p_H = flow + D'_H x   <=>   D'_H x + alpha p_H = p_H - flow
      lp.eq_matrix.block(0, ne, nh, 1) = delta.p_h;
      lp.eq_rhs.head(nh) = delta.p_h - pb.flow_term;
      // (1 - alpha) 1^T p_H = -1^T Delta_Hbar
      const double sum_p = delta.p_h.sum();
      lp.eq_matrix(nh, ne) = sum_p;
      lp.eq_rhs[nh] = sum_p + delta.delta_hbar_sum;
      break;
    }
  }
  return pb;
}

DiagnosisResult diagnose(const GridModel& model, const AttackedArea& area, const MeasurementSet& m,
                         const PriorVector& prior, const DiagnosisOptions& options) {
  const PartitionedView view = partition_by_index(model, area.buses);
  prior.validate(view.h_lines.size());
  if (m.observed_buses != view.hbar_buses) throw ValidationError("measurements do not match the attacked area");
  const auto n = static_cast<Eigen::Index>(model.topology.num_buses());
  if (m.theta.size() != n || m.p.size() != n) throw ValidationError("pre-attack measurements must cover every bus");

  DiagnosisResult res;
  ReconstructionReport& rep = res.reconstruction;

  const Eigen::VectorXd p_hbar = gather(m.p, view.hbar_buses);
  const Eigen::VectorXd delta_hbar = p_hbar - m.p_post_observed;
  const ThetaReconstruction tr = reconstruct_theta_h(view, m.theta, m.theta_post_observed, delta_hbar,
                                                     options.rank_tol, options.consistency_tol);
  rep.theta_post_h = tr.theta_post_h;
  rep.theta_residual = tr.residual;
  rep.smallest_singular_value = tr.smallest_singular_value;
  rep.largest_singular_value = tr.largest_singular_value;
  rep.theta_post = Eigen::VectorXd(n);
  for (std::size_t i = 0; i < view.h_buses.size(); ++i) rep.theta_post[view.h_buses[i]] = tr.theta_post_h[i];
  for (std::size_t i = 0; i < view.hbar_buses.size(); ++i) rep.theta_post[view.hbar_buses[i]] = m.theta_post_observed[i];

  rep.islanding = detect_islanding(p_hbar, m.p_post_observed, options.support_tol);
  DeltaSpec spec;
  const Eigen::VectorXd p_h = gather(m.p, view.h_buses);
  if (rep.islanding) {
    if (options.reconstruct_injections) rep.injections = reconstruct_p_h(model.topology, view, m.p, m.p_post_observed, options.support_tol);
    if (rep.injections) {
      spec.mode = DeltaMode::Fixed;
      spec.fixed_delta_h = rep.injections->delta_h;
    } else {
      spec.mode = DeltaMode::Proportional;
      spec.p_h = p_h;
      spec.delta_hbar_sum = delta_hbar.sum();
    }
  }

  const P2Problem pb = assemble_p2(model, view, m.theta, rep.theta_post, spec, prior, options.c_min);
  res.delta_mode = spec.mode;
  res.unidentifiable = pb.unidentifiable;
  res.lp_variables = static_cast<int>(pb.lp.num_variables());

  const LpSolution sol = solve_lp(pb.lp, options.simplex);
  res.status = sol.status;
  res.iterations = sol.iterations;
  if (!res.ok()) return res;

  const auto ne = static_cast<Eigen::Index>(view.h_lines.size());
  res.x_h = sol.x.head(ne);
  res.objective = sol.objective;
  res.primal_residual = sol.primal_residual;
  switch (spec.mode) {
    case DeltaMode::Zero: res.delta_h = Eigen::VectorXd::Zero(p_h.size()); break;
    case DeltaMode::Fixed: res.delta_h = spec.fixed_delta_h; break;
    case DeltaMode::Proportional:
      res.alpha = sol.x[ne];
      res.delta_h = (1.0 - *res.alpha) * p_h;
      break;
  }
  if (rep.injections && rep.injections->reference_bus >= 0) res.alpha = rep.injections->alpha;
  return res;
}

std::vector<int> brute_force_bip(const P2Problem& pb, int max_edges, double tol) {
  const auto ne = static_cast<int>(pb.num_lines());
  if (ne > max_edges) {
    throw ValidationError("brute force limited to " + std::to_string(max_edges) + " lines, area has " +
                          std::to_string(ne));
  }
  const Eigen::MatrixXd& a = pb.lp.eq_matrix;
  const Eigen::VectorXd& b = pb.lp.eq_rhs;
  const Eigen::MatrixXd ax = a.leftCols(ne);
  const bool alpha = pb.has_alpha();
  const Eigen::VectorXd alpha_col = alpha ? Eigen::VectorXd(a.col(ne)) : Eigen::VectorXd();
  const double alpha_norm2 = alpha ? alpha_col.squaredNorm() : 0.0;

  std::vector<int> best;
  int best_count = ne + 1;
  Eigen::VectorXd x(ne);
  for (std::uint32_t mask = 0; mask < (1u << ne); ++mask) {
    const int count = std::popcount(mask);
    if (count > best_count) continue;
    for (int j = 0; j < ne; ++j) x[j] = (mask >> j) & 1u ? 1.0 : 0.0;
    Eigen::VectorXd r = b - ax * x;
    if (alpha) {
      double al = alpha_norm2 > 0.0 ? alpha_col.dot(r) / alpha_norm2 : 0.0;
      al = std::clamp(al, 0.0, 1.0);
      r -= al * alpha_col;
    }
    if (r.lpNorm<Eigen::Infinity>() > tol) continue;
    std::vector<int> cand(ne);
    for (int j = 0; j < ne; ++j) cand[j] = static_cast<int>(x[j]);
    if (count < best_count || cand < best) {
      best = std::move(cand);
      best_count = count;
    }
  }
  if (best.empty() && ne > 0) throw SolverError("no binary attack vector is consistent with the measurements");
  if (ne == 0 && b.lpNorm<Eigen::Infinity>() > tol) throw SolverError("no binary attack vector is consistent with the measurements");
  return best;
}

}  // namespace pcpa
