#include "pcpa/errors.hpp"
#include "pcpa/lp.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

using namespace pcpa;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimum of c^T x over all basic solutions of {A x = b, l <= x <= u}:
// every choice of rank(A) basic columns and every bound pattern on the rest.
// Assumes A has full row rank and finite bounds. nullopt means infeasible.
std::optional<double> vertex_enumeration(const LinearProgram& lp) {
  const int n = static_cast<int>(lp.num_variables());
  const int m = static_cast<int>(lp.num_constraints());
  std::optional<double> best;
  for (unsigned cols = 0; cols < (1u << n); ++cols) {
    if (std::popcount(cols) != m) continue;
    std::vector<int> basic, nonbasic;
    for (int j = 0; j < n; ++j) ((cols >> j) & 1u ? basic : nonbasic).push_back(j);
    Eigen::MatrixXd bm(m, m);
    for (int k = 0; k < m; ++k) bm.col(k) = lp.eq_matrix.col(basic[k]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(bm);
    if (m > 0 && !lu.isInvertible()) continue;
    const int nn = static_cast<int>(nonbasic.size());
    for (unsigned pattern = 0; pattern < (1u << nn); ++pattern) {
      Eigen::VectorXd x(n);
      for (int k = 0; k < nn; ++k) x[nonbasic[k]] = (pattern >> k) & 1u ? lp.upper[nonbasic[k]] : lp.lower[nonbasic[k]];
      Eigen::VectorXd rhs = lp.eq_rhs;
      for (int k = 0; k < nn; ++k) rhs -= lp.eq_matrix.col(nonbasic[k]) * x[nonbasic[k]];
      if (m > 0) {
        const Eigen::VectorXd xb = lu.solve(rhs);
        for (int k = 0; k < m; ++k) x[basic[k]] = xb[k];
      }
      bool ok = true;
      for (int j = 0; j < n; ++j) ok &= x[j] >= lp.lower[j] - 1e-10 && x[j] <= lp.upper[j] + 1e-10;
      if (!ok) continue;
      const double obj = lp.cost.dot(x);
      if (!best || obj < *best) best = obj;
    }
  }
  return best;
}

LinearProgram random_lp(std::mt19937_64& rng, bool feasible_by_construction, bool integer_data) {
  std::uniform_int_distribution<int> nd(1, 6);
  const int n = nd(rng);
  const int m = std::uniform_int_distribution<int>(0, n)(rng);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<int> ui(-3, 3);
  auto draw = [&] { return integer_data ? static_cast<double>(ui(rng)) : u(rng); };
  LinearProgram lp;
  lp.cost.resize(n);
  lp.lower.resize(n);
  lp.upper.resize(n);
  lp.eq_matrix.resize(m, n);
  for (int j = 0; j < n; ++j) {
    lp.cost[j] = draw();
    lp.lower[j] = integer_data ? static_cast<double>(std::uniform_int_distribution<int>(-2, 0)(rng)) : -std::abs(u(rng));
    lp.upper[j] = lp.lower[j] + (integer_data ? static_cast<double>(std::uniform_int_distribution<int>(0, 3)(rng))
                                              : std::abs(u(rng)) + 0.1);
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) lp.eq_matrix(i, j) = draw();
  if (feasible_by_construction) {
    Eigen::VectorXd x0(n);
    for (int j = 0; j < n; ++j) {
      const double t = integer_data ? std::round(std::uniform_real_distribution<double>(0, 1)(rng))
                                    : std::uniform_real_distribution<double>(0, 1)(rng);
      x0[j] = lp.lower[j] + t * (lp.upper[j] - lp.lower[j]);
    }
    lp.eq_rhs = lp.eq_matrix * x0;
  } else {
    lp.eq_rhs.resize(m);
    for (int i = 0; i < m; ++i) lp.eq_rhs[i] = 3.0 * draw();
  }
  return lp;
}

bool full_row_rank(const LinearProgram& lp) {
  if (lp.num_constraints() == 0) return true;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(lp.eq_matrix);
  return lu.rank() == lp.num_constraints();
}

}  // namespace

TEST_CASE("single variable fixed by an equality") {
  LinearProgram lp;
  lp.cost = Eigen::VectorXd::Ones(1);
  lp.eq_matrix = Eigen::MatrixXd::Ones(1, 1);
  lp.eq_rhs = Eigen::VectorXd::Constant(1, 0.5);
  lp.lower = Eigen::VectorXd::Zero(1);
  lp.upper = Eigen::VectorXd::Ones(1);
  const LpSolution s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.x[0] == doctest::Approx(0.5));
  CHECK(s.objective == doctest::Approx(0.5));
}

TEST_CASE("contradictory equalities are infeasible") {
  LinearProgram lp;
  lp.cost = Eigen::VectorXd::Ones(2);
  lp.eq_matrix.resize(2, 2);
  lp.eq_matrix << 1, 1, 1, 1;
  lp.eq_rhs = Eigen::Vector2d(1.0, 2.0);
  lp.lower = Eigen::VectorXd::Zero(2);
  lp.upper = Eigen::VectorXd::Constant(2, kInf);
  CHECK(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("bounds can make an LP infeasible") {
  LinearProgram lp;
  lp.cost = Eigen::VectorXd::Ones(2);
  lp.eq_matrix = Eigen::MatrixXd::Ones(1, 2);
  lp.eq_rhs = Eigen::VectorXd::Constant(1, 3.0);
  lp.lower = Eigen::VectorXd::Zero(2);
  lp.upper = Eigen::VectorXd::Ones(2);
  CHECK(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded direction is reported") {
  LinearProgram lp;
  lp.cost = Eigen::Vector2d(-1.0, 0.0);
  lp.eq_matrix = Eigen::MatrixXd(1, 2);
  lp.eq_matrix << 1, -1;
  lp.eq_rhs = Eigen::VectorXd::Zero(1);
  lp.lower = Eigen::VectorXd::Zero(2);
  lp.upper = Eigen::VectorXd::Constant(2, kInf);
  CHECK(solve_lp(lp).status == LpStatus::Unbounded);
}

TEST_CASE("iteration limit is reported") {
  LinearProgram lp;
  lp.cost = Eigen::Vector3d(-1.0, -2.0, -3.0);
  lp.eq_matrix = Eigen::MatrixXd::Ones(1, 3);
  lp.eq_rhs = Eigen::VectorXd::Constant(1, 1.5);
  lp.lower = Eigen::VectorXd::Zero(3);
  lp.upper = Eigen::VectorXd::Ones(3);
  SimplexOptions opts;
  opts.max_iterations = 0;
  CHECK(solve_lp(lp, opts).status == LpStatus::IterationLimit);
  const LpSolution s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-4.0));  // x = (0, 0.5, 1)
}

TEST_CASE("malformed programs are rejected") {
  LinearProgram lp;
  lp.cost = Eigen::VectorXd::Ones(2);
  lp.eq_matrix = Eigen::MatrixXd::Ones(1, 3);
  lp.eq_rhs = Eigen::VectorXd::Ones(1);
  lp.lower = Eigen::VectorXd::Zero(2);
  lp.upper = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(solve_lp(lp), ValidationError);
  lp.eq_matrix = Eigen::MatrixXd::Ones(1, 2);
  lp.lower[0] = -kInf;
  CHECK_THROWS_AS(solve_lp(lp), ValidationError);
  lp.lower[0] = 2.0;
  CHECK_THROWS_AS(solve_lp(lp), ValidationError);
}

TEST_CASE("redundant rows are dropped") {
  LinearProgram lp;
  lp.cost = Eigen::Vector3d(1.0, 2.0, 3.0);
  lp.eq_matrix.resize(3, 3);
  lp.eq_matrix << 1, 1, 1, 1, -1, 0, 2, 0, 1;  // row 3 = row 1 + row 2
  lp.eq_rhs = Eigen::Vector3d(2.0, 0.0, 2.0);
  lp.lower = Eigen::VectorXd::Zero(3);
  lp.upper = Eigen::VectorXd::Constant(3, 5.0);
  const LpSolution s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(3.0));  // x = (1, 1, 0)
  CHECK(s.primal_residual <= 1e-12);
}

TEST_CASE("random LPs match vertex enumeration") {
  std::mt19937_64 rng(20240601);
  int solved = 0, infeasible = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const bool feasible = trial % 3 != 0;
    const bool integer_data = trial % 2 == 0;  // integer data exercises degeneracy
    const LinearProgram lp = random_lp(rng, feasible, integer_data);
    if (!full_row_rank(lp)) continue;
    const auto expected = vertex_enumeration(lp);
    const LpSolution s = solve_lp(lp);
    if (!expected) {
      CHECK(s.status == LpStatus::Infeasible);
      ++infeasible;
      continue;
    }
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(std::abs(s.objective - *expected) <= 1e-9);
    CHECK(s.primal_residual <= 1e-9);
    CHECK(s.bound_violation <= 1e-12);
    for (Eigen::Index j = 0; j < s.x.size(); ++j) CHECK((s.x[j] >= lp.lower[j] && s.x[j] <= lp.upper[j]));
    ++solved;
  }
  CHECK(solved > 200);
  CHECK(infeasible > 20);
}

TEST_CASE("solutions are deterministic") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const LinearProgram lp = random_lp(rng, true, true);
    const LpSolution a = solve_lp(lp);
    const LpSolution b = solve_lp(lp);
    CHECK(a.status == b.status);
    if (a.status == LpStatus::Optimal) CHECK(a.x == b.x);
  }
}
