#include "fixtures.hpp"

#include "pcpa/case_io.hpp"
#include "pcpa/errors.hpp"
#include "pcpa/grid.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <vector>

using namespace pcpa;

namespace {

// Admittance by case analysis on bus pairs, written without D.
Eigen::MatrixXd admittance_by_cases(const GridTopology& g) {
  const int n = static_cast<int>(g.num_buses());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      double s = 0.0;
      for (std::size_t l = 0; l < g.num_lines(); ++l) {
        const int f = g.from_index(static_cast<int>(l));
        const int t = g.to_index(static_cast<int>(l));
        const double b = 1.0 / g.lines()[l].reactance;
        if (u == v && (f == u || t == u)) s += b;
        if (u != v && ((f == u && t == v) || (f == v && t == u))) s -= b;
      }
      a(u, v) = s;
    }
  }
  return a;
}

}  // namespace

TEST_CASE("incidence has +1 at from-bus and -1 at to-bus") {
  const GridTopology g = fixtures::ring4();
  const IncidenceMatrix d = build_incidence(g);
  CHECK(d.values.rows() == 4);
  CHECK(d.values.cols() == 5);
  for (int l = 0; l < 5; ++l) {
    CHECK(d.values(g.from_index(l), l) == 1.0);
    CHECK(d.values(g.to_index(l), l) == -1.0);
    CHECK(d.values.col(l).cwiseAbs().sum() == 2.0);
  }
}

TEST_CASE("admittance matches case analysis") {
  for (const GridTopology& g : {fixtures::ring4(), fixtures::ieee30().topology, fixtures::ieee118().topology}) {
    const GridModel m(g);
    CHECK((m.admittance.values - admittance_by_cases(g)).lpNorm<Eigen::Infinity>() <= 1e-9);
    // Laplacian: symmetric, zero row sums, rank n - 1 on a connected grid.
    CHECK((m.admittance.values - m.admittance.values.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(m.admittance.values.rowwise().sum().lpNorm<Eigen::Infinity>() <= 1e-9);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m.admittance.values);
    lu.setThreshold(1e-10);
    CHECK(lu.rank() == static_cast<Eigen::Index>(g.num_buses()) - 1);
  }
}

TEST_CASE("build_admittance rejects mismatched dimensions") {
  const GridTopology g = fixtures::ring4();
  CHECK_THROWS_AS(build_admittance(build_incidence(g), Eigen::VectorXd::Ones(3)), ValidationError);
}

TEST_CASE("topology validation") {
  CHECK_THROWS_AS(GridTopology("dup", {{1, 0, 0}, {1, 0, 0}}, {{1, 1, 1, 0.1}}), ValidationError);
  CHECK_THROWS_AS(GridTopology("neg", {{1, 0, 0}, {2, 0, 0}}, {{1, 1, 2, -0.1}}), ValidationError);
  CHECK_THROWS_AS(GridTopology("zero", {{1, 0, 0}, {2, 0, 0}}, {{1, 1, 2, 0.0}}), ValidationError);
  CHECK_THROWS_AS(GridTopology("unknown", {{1, 0, 0}, {2, 0, 0}}, {{1, 1, 3, 0.1}}), ValidationError);
  CHECK_THROWS_AS(GridTopology("loop", {{1, 0, 0}, {2, 0, 0}}, {{1, 1, 2, 0.1}, {2, 2, 2, 0.1}}), ValidationError);
  CHECK_THROWS_AS(GridTopology("split", {{1, 0, 0}, {2, 0, 0}, {3, 0, 0}}, {{1, 1, 2, 0.1}}), ValidationError);
  CHECK_NOTHROW(GridTopology("ok", {{2, 0, 0}, {1, 0, 0}}, {{7, 1, 2, 0.1}}));
}

TEST_CASE("buses are sorted by id and lookups agree") {
  const GridTopology g("perm", {{30, 0, 0}, {10, 0, 0}, {20, 0, 0}}, {{5, 30, 10, 0.1}, {6, 10, 20, 0.2}});
  CHECK(g.buses()[0].id == 10);
  CHECK(g.bus_index(30) == 2);
  CHECK(g.line_index(6) == 1);
  CHECK(g.from_index(0) == 2);
  CHECK(g.to_index(0) == 0);
  CHECK_THROWS_AS(g.bus_index(99), ValidationError);
}

TEST_CASE("partition blocks reassemble the admittance matrix") {
  const GridModel& m = fixtures::ieee30();
  const AttackedArea& area = fixtures::area30();
  const PartitionedView v = partition_by_index(m, area.buses);
  CHECK((v.reassemble() - m.admittance.values).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(v.a_hh.rows() == 8);
  CHECK(v.a_hbarh.rows() == 22);
  CHECK(v.a_hg.cols() == 30);
  CHECK(v.h_lines == area.lines);
  CHECK(v.d_h.rows() == 8);
  CHECK(v.d_h.cols() == 8);
  // Every line with both ends in H is in E_H, every line with one end is a boundary line.
  for (std::size_t l = 0; l < m.topology.num_lines(); ++l) {
    const int l_int = static_cast<int>(l);
    const bool f = v.h_position[m.topology.from_index(l_int)] >= 0;
    const bool t = v.h_position[m.topology.to_index(l_int)] >= 0;
    CHECK((v.h_line_position[l] >= 0) == (f && t));
  }
  CHECK_THROWS_AS(partition_by_index(m, std::vector<int>{}), ValidationError);
  std::vector<int> all(30);
  for (int i = 0; i < 30; ++i) all[i] = i;
  CHECK_THROWS_AS(partition_by_index(m, all), ValidationError);
  CHECK_THROWS_AS(partition(m, std::vector<BusId>{999}), ValidationError);
}

TEST_CASE("MATPOWER parsing") {
  const char* text = R"(
function mpc = tiny
mpc.baseMVA = 100;
% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin
mpc.bus = [
  1 3 0   0 0 0 1 1 0 135 1 1.05 0.95;
  2 1 50  0 0 0 1 1 0 135 1 1.05 0.95;
  3 1 30  0 0 0 1 1 0 135 1 1.05 0.95;
];
mpc.gen = [
  1 60 0 0 0 1 100 1 100 0;
  3 20 0 0 0 1 100 1 100 0;
  3 99 0 0 0 1 100 0 100 0;
];
mpc.branch = [
  1 2 0.01 0.1 0 0 0 0 0 0 1 -360 360;
  2 3 0.01 0.2 0 0 0 0 0 0 1 -360 360;
  1 3 0.01 0.3 0 0 0 0 0 0 0 -360 360;
];
)";
  const GridTopology g = parse_matpower_case(text, "tiny");
  REQUIRE(g.num_buses() == 3);
  REQUIRE(g.num_lines() == 2);  // third branch is out of service
  CHECK(g.lines()[1].id == 2);
  CHECK(g.lines()[1].reactance == doctest::Approx(0.2));
  CHECK(g.buses()[0].p_base == doctest::Approx(0.6));
  CHECK(g.buses()[1].p_base == doctest::Approx(-0.5));
  CHECK(g.buses()[2].p_base == doctest::Approx(-0.1));  // offline generator ignored
  CHECK(g.buses()[1].load == doctest::Approx(0.5));
  CHECK_THROWS_AS(parse_matpower_case("mpc.baseMVA = 100;", "bad"), ParseError);
}

TEST_CASE("bundled cases have the expected size") {
  const GridTopology& g30 = fixtures::ieee30().topology;
  const GridTopology& g118 = fixtures::ieee118().topology;
  CHECK(g30.num_buses() == 30);
  CHECK(g30.num_lines() == 41);
  CHECK(g118.num_buses() == 118);
  CHECK(g118.num_lines() == 186);
  CHECK(g30.name() == "case30");
}

TEST_CASE("JSON grid round trip") {
  const GridTopology& g = fixtures::ieee30().topology;
  const GridTopology back = parse_case_file(grid_to_json(g));
  REQUIRE(back.num_buses() == g.num_buses());
  REQUIRE(back.num_lines() == g.num_lines());
  CHECK(back.name() == g.name());
  for (std::size_t i = 0; i < g.num_buses(); ++i) {
    CHECK(back.buses()[i].id == g.buses()[i].id);
    CHECK(back.buses()[i].p_base == g.buses()[i].p_base);
    CHECK(back.buses()[i].load == g.buses()[i].load);
  }
  for (std::size_t l = 0; l < g.num_lines(); ++l) CHECK(back.lines()[l].reactance == g.lines()[l].reactance);
  CHECK(grid_to_json(back) == grid_to_json(g));
  CHECK_THROWS_AS(parse_grid_json("{\"buses\": 3}"), ParseError);
}
