#include "pcpa/powerflow.hpp"

#include "pcpa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pcpa {

namespace {

// Union-find over bus indices.
class Components {
 public:
  explicit Components(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void join(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }
  std::vector<Island> groups() {
    const int n = static_cast<int>(parent_.size());
    std::vector<Island> out;
    std::vector<int> slot(n, -1);
    for (int v = 0; v < n; ++v) {
      int r = find(v);
      if (slot[r] < 0) {
        slot[r] = static_cast<int>(out.size());
        out.emplace_back();
      }
      out[slot[r]].push_back(v);
    }
    return out;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

std::vector<Island> find_islands(const Eigen::MatrixXd& admittance, double tol) {
  const int n = static_cast<int>(admittance.rows());
  Components c(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (std::abs(admittance(u, v)) > tol || std::abs(admittance(v, u)) > tol) c.join(u, v);
  return c.groups();
}

std::vector<Island> find_islands(const GridTopology& grid) {
  Components c(static_cast<int>(grid.num_buses()));
  for (int j = 0; j < static_cast<int>(grid.num_lines()); ++j) c.join(grid.from_index(j), grid.to_index(j));
  return c.groups();
}

std::vector<Island> find_islands(const GridTopology& grid, const Eigen::VectorXd& attack) {
  if (static_cast<std::size_t>(attack.size()) != grid.num_lines()) throw ValidationError("find_islands: dimension mismatch");
  Components c(static_cast<int>(grid.num_buses()));
  for (int j = 0; j < static_cast<int>(grid.num_lines()); ++j)
    if (attack[j] < 1.0) c.join(grid.from_index(j), grid.to_index(j));
  return c.groups();
}

static double structural_tolerance(const Eigen::MatrixXd& admittance) {
  return admittance.size() == 0 ? 0.0 : 1e-12 * admittance.diagonal().cwiseAbs().maxCoeff();
}

std::vector<int> default_references(const std::vector<Island>& islands) {
  std::vector<int> refs;
  refs.reserve(islands.size());
  for (const auto& isl : islands) refs.push_back(isl.front());
  return refs;
}

AngleVector solve_dc(const Eigen::MatrixXd& admittance, const InjectionVector& p, std::span<const int> references) {
  const auto n = admittance.rows();
  if (admittance.cols() != n || p.size() != n) throw ValidationError("solve_dc: dimension mismatch");

  const auto islands = find_islands(admittance, structural_tolerance(admittance));
  std::vector<char> is_ref(n, 0);
  for (int r : references) {
    if (r < 0 || r >= n) throw ValidationError("solve_dc: reference bus out of range");
    is_ref[r] = 1;
  }
  for (const auto& isl : islands) {
    double sum = 0.0;
    int refs = 0;
    for (int b : isl) {
      sum += p[b];
      refs += is_ref[b];
    }
    if (std::abs(sum) > kBalanceTolerance) {
      throw ValidationError("solve_dc: island containing bus index " + std::to_string(isl.front()) +
                            " is unbalanced by " + std::to_string(sum));
    }
    if (refs != 1) {
      throw ValidationError("solve_dc: island containing bus index " + std::to_string(isl.front()) + " has " +
                            std::to_string(refs) + " reference buses");
    }
  }

  std::vector<int> keep;
  for (int b = 0; b < n; ++b)
    if (!is_ref[b]) keep.push_back(b);

  AngleVector theta = AngleVector::Zero(n);
  if (!keep.empty()) {
    const auto m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd reduced(m, m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      rhs[i] = p[keep[i]];
      for (Eigen::Index j = 0; j < m; ++j) reduced(i, j) = admittance(keep[i], keep[j]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reduced);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        (ldlt.vectorD().array().abs() < 1e-14 * std::max(1.0, ldlt.vectorD().cwiseAbs().maxCoeff())).any()) {
      throw SolverError("solve_dc: reduced admittance matrix is singular");
    }
    Eigen::VectorXd sol = ldlt.solve(rhs);
    for (Eigen::Index i = 0; i < m; ++i) theta[keep[i]] = sol[i];
  }

  const double residual = (admittance * theta - p).lpNorm<Eigen::Infinity>();
  if (!(residual <= kBalanceTolerance)) {
    throw SolverError("solve_dc: residual " + std::to_string(residual) + " exceeds tolerance");
  }
  return theta;
}

AngleVector solve_dc(const Eigen::MatrixXd& admittance, const InjectionVector& p) {
  const auto refs = default_references(find_islands(admittance, structural_tolerance(admittance)));
  return solve_dc(admittance, p, refs);
}

FlowVector line_flows(const AngleVector& theta, const GridTopology& grid) {
  if (static_cast<std::size_t>(theta.size()) != grid.num_buses()) throw ValidationError("line_flows: dimension mismatch");
  FlowVector f(grid.num_lines());
  for (int j = 0; j < static_cast<int>(grid.num_lines()); ++j) {
    f[j] = (theta[grid.from_index(j)] - theta[grid.to_index(j)]) / grid.lines()[j].reactance;
  }
  return f;
}

}  // namespace pcpa
