#include "pcpa/lp.hpp"

#include "pcpa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace pcpa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTol = 1e-12;

enum class Outcome { Optimal, Unbounded, IterationLimit };

// Working problem in equality form with box bounds. Nonbasic variables sit
// at a bound; basic values are recomputed from the basis each iteration.
class BoundedSimplex {
 public:
  BoundedSimplex(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd lower, Eigen::VectorXd upper,
                 const SimplexOptions& opt)
      : a_(std::move(a)), b_(std::move(b)), lower_(std::move(lower)), upper_(std::move(upper)), opt_(opt) {
    const auto n = a_.cols();
    at_upper_.assign(n, false);
    basic_pos_.assign(n, -1);
  }

  void set_basis(std::vector<int> basis) {
    basis_ = std::move(basis);
    std::fill(basic_pos_.begin(), basic_pos_.end(), -1);
    for (std::size_t i = 0; i < basis_.size(); ++i) basic_pos_[basis_[i]] = static_cast<int>(i);
  }

  Outcome run(const Eigen::VectorXd& cost, int& iterations) {
    const auto n = a_.cols();
    while (true) {
      if (iterations >= opt_.max_iterations) return Outcome::IterationLimit;
      factor();
      const Eigen::VectorXd xb = basic_values();
      Eigen::VectorXd cb(basis_.size());
      for (std::size_t i = 0; i < basis_.size(); ++i) cb[i] = cost[basis_[i]];
      const Eigen::VectorXd y = solve_bt(cb);

      // Bland: lowest-index improving nonbasic variable.
      int entering = -1;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (basic_pos_[j] >= 0 || lower_[j] == upper_[j]) continue;
        const double d = cost[j] - a_.col(j).dot(y);
        if ((!at_upper_[j] && d < -opt_.optimality_tol) || (at_upper_[j] && d > opt_.optimality_tol)) {
          entering = static_cast<int>(j);
          break;
        }
      }
      if (entering < 0) return Outcome::Optimal;
      ++iterations;

      const double dir = at_upper_[entering] ? -1.0 : 1.0;
      const Eigen::VectorXd w = solve_b(a_.col(entering));
      double best = kInf;
      int leaving_pos = -1;
      bool leaving_to_upper = false;
      for (std::size_t i = 0; i < basis_.size(); ++i) {
        const double change = -dir * w[i];  // d x_B[i] / d t
        const int var = basis_[i];
        double t = kInf;
        bool to_upper = false;
        if (change < -opt_.pivot_tol) {
          t = (xb[i] - lower_[var]) / -change;
        } else if (change > opt_.pivot_tol && std::isfinite(upper_[var])) {
          t = (upper_[var] - xb[i]) / change;
          to_upper = true;
        } else {
          continue;
        }
        t = std::max(t, 0.0);
        const bool tie = leaving_pos >= 0 && std::abs(t - best) <= kTieTol;
        if ((!tie && t < best) || (tie && var < basis_[leaving_pos])) {
          best = t;
          leaving_pos = static_cast<int>(i);
          leaving_to_upper = to_upper;
        }
      }
      const double flip = upper_[entering] - lower_[entering];
      double step = best;
      if (flip <= best) {
        step = flip;
        leaving_pos = -1;
      }
      if (!std::isfinite(step)) return Outcome::Unbounded;

      if (leaving_pos < 0) {
        at_upper_[entering] = !at_upper_[entering];
        continue;
      }
      const int leaving = basis_[leaving_pos];
      basic_pos_[leaving] = -1;
      at_upper_[leaving] = leaving_to_upper;
      basis_[leaving_pos] = entering;
      basic_pos_[entering] = leaving_pos;
      at_upper_[entering] = false;
    }
  }

  Eigen::VectorXd values() {
    factor();
    const Eigen::VectorXd xb = basic_values();
    Eigen::VectorXd x(a_.cols());
    for (Eigen::Index j = 0; j < a_.cols(); ++j) x[j] = nonbasic_value(static_cast<int>(j));
    for (std::size_t i = 0; i < basis_.size(); ++i) x[basis_[i]] = xb[i];
    return x;
  }

  // Pivot basic variables with index >= `first_artificial` out of the basis.
  // Rows where that is impossible are redundant and are removed.
  void drive_out(int first_artificial) {
    for (std::size_t pos = 0; pos < basis_.size();) {
      if (basis_[pos] < first_artificial) {
        ++pos;
        continue;
      }
      factor();
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(basis_.size());
      unit[pos] = 1.0;
      const Eigen::VectorXd row = solve_bt(unit);  // row `pos` of B^-1
      int best = -1;
      double best_mag = 1e-9;
      for (int j = 0; j < first_artificial; ++j) {
        if (basic_pos_[j] >= 0) continue;
        const double mag = std::abs(row.dot(a_.col(j)));
        if (mag > best_mag) {
          best_mag = mag;
          best = j;
        }
      }
      if (best >= 0) {
        basic_pos_[basis_[pos]] = -1;
        at_upper_[basis_[pos]] = false;
        basis_[pos] = best;
        basic_pos_[best] = static_cast<int>(pos);
        at_upper_[best] = false;
        ++pos;
        continue;
      }
      // Redundant row: the basic artificial's own row carries no structural information.
      const int art = basis_[pos];
      const int drop_row = redundant_row_for(art);
      remove_row(drop_row);
      basic_pos_[art] = -1;
      basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(pos));
      for (std::size_t i = 0; i < basis_.size(); ++i) basic_pos_[basis_[i]] = static_cast<int>(i);
    }
  }

  // Keep only the first `n` columns (drops the artificials).
  void truncate_columns(int n) {
    a_.conservativeResize(Eigen::NoChange, n);
    lower_.conservativeResize(n);
    upper_.conservativeResize(n);
    at_upper_.resize(n);
    basic_pos_.resize(n);
  }

  const std::vector<int>& basis() const { return basis_; }
  Eigen::Index rows() const { return a_.rows(); }
  const std::vector<char>& removed_rows() const { return removed_; }
  void mark_rows(Eigen::Index m) { removed_.assign(m, 0); row_map_.resize(m); for (Eigen::Index i = 0; i < m; ++i) row_map_[i] = static_cast<int>(i); }

 private:
  double nonbasic_value(int j) const { return at_upper_[j] ? upper_[j] : lower_[j]; }

  void factor() {
    if (basis_.empty()) return;
    Eigen::MatrixXd bmat(a_.rows(), static_cast<Eigen::Index>(basis_.size()));
    for (std::size_t i = 0; i < basis_.size(); ++i) bmat.col(i) = a_.col(basis_[i]);
    lu_.compute(bmat);
  }

  Eigen::VectorXd basic_values() const {
    Eigen::VectorXd rhs = b_;
    for (Eigen::Index j = 0; j < a_.cols(); ++j) {
      if (basic_pos_[j] >= 0) continue;
      const double v = nonbasic_value(static_cast<int>(j));
      if (v != 0.0) rhs -= v * a_.col(j);
    }
    return solve_b(rhs);
  }

  Eigen::VectorXd solve_b(const Eigen::VectorXd& rhs) const {
    if (basis_.empty()) return Eigen::VectorXd(0);
    return lu_.solve(rhs);
  }

  Eigen::VectorXd solve_bt(const Eigen::VectorXd& rhs) const {
    if (basis_.empty()) return Eigen::VectorXd::Zero(a_.rows());
    return lu_.transpose().solve(rhs);
  }

  // An artificial column is a signed unit vector; its row is the redundant one.
  int redundant_row_for(int artificial) const {
    Eigen::Index r = 0;
    a_.col(artificial).cwiseAbs().maxCoeff(&r);
    return static_cast<int>(r);
  }

  void remove_row(int r) {
    const Eigen::Index m = a_.rows();
    Eigen::MatrixXd a(m - 1, a_.cols());
    Eigen::VectorXd b(m - 1);
    for (Eigen::Index i = 0, k = 0; i < m; ++i) {
      if (i == r) continue;
      a.row(k) = a_.row(i);
      b[k] = b_[i];
      ++k;
    }
    if (!row_map_.empty()) {
      removed_[row_map_[r]] = 1;
      row_map_.erase(row_map_.begin() + r);
    }
    a_ = std::move(a);
    b_ = std::move(b);
  }

  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  SimplexOptions opt_;
  std::vector<int> basis_;
  std::vector<int> basic_pos_;
  std::vector<bool> at_upper_;
  std::vector<char> removed_;
  std::vector<int> row_map_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace

void LinearProgram::validate() const {
  const auto n = cost.size();
  if (eq_matrix.cols() != n && eq_matrix.rows() > 0) throw ValidationError("LP: constraint matrix has wrong column count");
  if (eq_rhs.size() != eq_matrix.rows()) throw ValidationError("LP: right-hand side length mismatch");
  if (lower.size() != n || upper.size() != n) throw ValidationError("LP: bound length mismatch");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!std::isfinite(lower[j])) throw ValidationError("LP: lower bounds must be finite");
    if (std::isnan(upper[j]) || upper[j] < lower[j]) throw ValidationError("LP: lower bound exceeds upper bound");
    if (!std::isfinite(cost[j])) throw ValidationError("LP: non-finite cost");
  }
  if (!eq_matrix.allFinite() || !eq_rhs.allFinite()) throw ValidationError("LP: non-finite constraint data");
}

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
  }
  return "infeasible";
}

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  lp.validate();
  const auto n = lp.num_variables();
  const auto m = lp.num_constraints();
  LpSolution sol;

  // Row equilibration and cost normalization; both are undone when reporting.
  Eigen::MatrixXd a = m > 0 ? lp.eq_matrix : Eigen::MatrixXd(0, n);
  Eigen::VectorXd b = lp.eq_rhs;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = a.row(i).cwiseAbs().maxCoeff();
    if (s > 0.0) {
      a.row(i) /= s;
      b[i] /= s;
    }
  }
  const double cscale = n > 0 ? std::max(lp.cost.cwiseAbs().maxCoeff(), 0.0) : 0.0;
  const Eigen::VectorXd cost = cscale > 0.0 ? Eigen::VectorXd(lp.cost / cscale) : Eigen::VectorXd(lp.cost);

  // Phase 1: artificials absorb the residual with every structural variable at its lower bound.
  const Eigen::VectorXd residual = b - a * lp.lower;
  Eigen::MatrixXd a1(m, n + m);
  a1.leftCols(n) = a;
  a1.rightCols(m).setZero();
  for (Eigen::Index i = 0; i < m; ++i) a1(i, n + i) = residual[i] >= 0.0 ? 1.0 : -1.0;
  Eigen::VectorXd lower1(n + m), upper1(n + m);
  lower1 << lp.lower, Eigen::VectorXd::Zero(m);
  upper1 << lp.upper, Eigen::VectorXd::Constant(m, kInf);
  Eigen::VectorXd cost1 = Eigen::VectorXd::Zero(n + m);
  cost1.tail(m).setOnes();

  BoundedSimplex simplex(a1, b, lower1, upper1, options);
  simplex.mark_rows(m);
  std::vector<int> basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = static_cast<int>(n + i);
  simplex.set_basis(basis);

  int iterations = 0;
  Outcome out = simplex.run(cost1, iterations);
  if (out == Outcome::IterationLimit) {
    sol.status = LpStatus::IterationLimit;
    sol.iterations = iterations;
    return sol;
  }
  const Eigen::VectorXd x1 = simplex.values();
  const double infeasibility = m > 0 ? x1.tail(m).sum() : 0.0;
  if (infeasibility > options.feasibility_tol * std::max(1.0, (m > 0 ? b.cwiseAbs().maxCoeff() : 0.0))) {
    sol.status = LpStatus::Infeasible;
    sol.iterations = iterations;
    sol.x = x1.head(n);
    return sol;
  }

  simplex.drive_out(static_cast<int>(n));
  simplex.truncate_columns(static_cast<int>(n));

  // Phase 2.
  out = simplex.run(cost, iterations);
  sol.iterations = iterations;
  if (out == Outcome::Unbounded) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }
  if (out == Outcome::IterationLimit) {
    sol.status = LpStatus::IterationLimit;
    return sol;
  }

  sol.x = simplex.values();
  for (Eigen::Index j = 0; j < n; ++j) {
    sol.bound_violation = std::max({sol.bound_violation, lp.lower[j] - sol.x[j], sol.x[j] - lp.upper[j]});
    sol.x[j] = std::clamp(sol.x[j], lp.lower[j], lp.upper[j]);
  }
  sol.status = LpStatus::Optimal;
  sol.objective = lp.cost.dot(sol.x);
  sol.primal_residual = m > 0 ? (lp.eq_matrix * sol.x - lp.eq_rhs).lpNorm<Eigen::Infinity>() : 0.0;

  // Dual certificate on the reduced (row-equilibrated, redundancy-free) system.
  {
    const auto& removed = simplex.removed_rows();
    std::vector<int> kept;
    for (Eigen::Index i = 0; i < m; ++i)
      if (removed.empty() || !removed[i]) kept.push_back(static_cast<int>(i));
    const auto& bas = simplex.basis();
    Eigen::MatrixXd ak(kept.size(), n);
    for (std::size_t i = 0; i < kept.size(); ++i) ak.row(i) = a.row(kept[i]);
    double dual_bad = 0.0;
    if (!bas.empty()) {
      Eigen::MatrixXd bmat(ak.rows(), static_cast<Eigen::Index>(bas.size()));
      Eigen::VectorXd cb(bas.size());
      for (std::size_t i = 0; i < bas.size(); ++i) {
        bmat.col(i) = ak.col(bas[i]);
        cb[i] = cost[bas[i]];
      }
      const Eigen::VectorXd y = bmat.transpose().partialPivLu().solve(cb);
      const Eigen::VectorXd d = cost - ak.transpose() * y;
      const double tol = 1e-7 * std::max(1.0, options.feasibility_tol);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (lp.lower[j] == lp.upper[j]) continue;
        const bool at_low = std::abs(sol.x[j] - lp.lower[j]) <= tol;
        const bool at_up = std::abs(sol.x[j] - lp.upper[j]) <= tol;
        if (at_low && !at_up) dual_bad = std::max(dual_bad, -d[j]);
        else if (at_up && !at_low) dual_bad = std::max(dual_bad, d[j]);
        else if (!at_low && !at_up) dual_bad = std::max(dual_bad, std::abs(d[j]));
      }
    } else {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (lp.lower[j] == lp.upper[j]) continue;
        const bool at_low = sol.x[j] == lp.lower[j];
        dual_bad = std::max(dual_bad, at_low ? -cost[j] : cost[j]);
      }
    }
    sol.dual_infeasibility = dual_bad;
  }

  const double scale = std::max(1.0, lp.eq_rhs.size() ? lp.eq_rhs.cwiseAbs().maxCoeff() : 0.0);
  if (sol.primal_residual > options.certify_tol * scale || sol.bound_violation > options.certify_tol ||
      sol.dual_infeasibility > options.certify_tol) {
    throw SolverError("LP certificate failed: primal residual " + std::to_string(sol.primal_residual) +
                      ", bound violation " + std::to_string(sol.bound_violation) + ", dual infeasibility " +
                      std::to_string(sol.dual_infeasibility));
  }
  return sol;
}

}  // namespace pcpa
