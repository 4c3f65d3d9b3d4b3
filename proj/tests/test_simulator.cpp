#include "fixtures.hpp"

#include "pcpa/errors.hpp"
#include "pcpa/powerflow.hpp"
#include "pcpa/reconstruction.hpp"
#include "pcpa/simulator.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

using namespace pcpa;

namespace {

SimulationConfig open_config() {
  SimulationConfig c;
  c.mix = KindMix::only(AttackKind::Open);
  return c;
}

}  // namespace

TEST_CASE("impedance factor to attack fraction") {
  CHECK(attack_fraction(2.0) == doctest::Approx(0.5));
  CHECK(attack_fraction(1.0) == 0.0);
  CHECK(attack_fraction(std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(attack_fraction(100.0) == doctest::Approx(0.99));
}

TEST_CASE("attack kind names round trip") {
  for (auto k : {AttackKind::Alter, AttackKind::Cut, AttackKind::Open}) CHECK(parse_attack_kind(to_string(k)) == k);
  CHECK_THROWS(parse_attack_kind("melt"));
}

TEST_CASE("sampled attacks stay inside E_H and the factor ranges") {
  const GridModel& m = fixtures::ieee30();
  const AttackedArea& area = fixtures::area30();
  for (std::uint64_t s = 0; s < 200; ++s) {
    const int card = 1 + static_cast<int>(s % 8);
    const Attack a = sample_attack(m.topology, area, card, KindMix{}, s);
    REQUIRE(a.lines.size() == static_cast<std::size_t>(card));
    CHECK(std::set<int>(a.lines.begin(), a.lines.end()).size() == a.lines.size());
    int nonzero = 0;
    for (std::size_t i = 0; i < a.lines.size(); ++i) {
      CHECK(std::find(area.lines.begin(), area.lines.end(), a.lines[i]) != area.lines.end());
      const double f = a.factors[i];
      if (a.kinds[i] == AttackKind::Alter) CHECK((f > 1.5 && f < 5.0));
      if (a.kinds[i] == AttackKind::Cut) CHECK((f > 100.0 && f < 1000.0));
      CHECK(a.x[a.lines[i]] == doctest::Approx(1.0 - 1.0 / f));
    }
    for (Eigen::Index j = 0; j < a.x.size(); ++j) nonzero += a.x[j] != 0.0;
    CHECK(nonzero == card);
    CHECK(a.x_h.sum() == doctest::Approx(a.x.sum()));
  }
  CHECK_THROWS(sample_attack(m.topology, area, 9, KindMix{}, 1));
  CHECK_THROWS(sample_attack(m.topology, area, -1, KindMix{}, 1));
  CHECK(sample_attack(m.topology, area, 0, KindMix{}, 1).lines.empty());
}

TEST_CASE("apply_attack removes the attacked share of each line") {
  const GridModel m(fixtures::ring4());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(5);
  x[4] = 0.25;
  const Eigen::MatrixXd a = apply_attack(m.admittance.values, m.incidence, m.gamma, x);
  // Line 5 joins buses 1 and 3 with r = 0.4.
  CHECK(a(0, 2) == doctest::Approx(m.admittance.values(0, 2) + 0.25 / 0.4));
  CHECK(a(0, 0) == doctest::Approx(m.admittance.values(0, 0) - 0.25 / 0.4));
  x[4] = 1.5;
  CHECK_THROWS_AS(apply_attack(m.admittance.values, m.incidence, m.gamma, x), ValidationError);
}

TEST_CASE("scenario identities hold on mixed and islanding scenarios") {
  const GridModel& m = fixtures::ieee30();
  const Eigen::MatrixXd& a = m.admittance.values;
  const Eigen::MatrixXd& d = m.incidence.values;
  int islanding = 0;
  for (int mode = 0; mode < 2; ++mode) {
    const AttackedArea& area = mode == 0 ? fixtures::area30() : fixtures::island30();
    const PartitionedView v = partition_by_index(m, area.buses);
    SimulationConfig cfg = mode == 0 ? SimulationConfig{} : open_config();
    for (std::uint64_t s = 0; s < 150; ++s) {
      const Scenario sc = generate_scenario(m, area, 1 + static_cast<int>(s % 8), cfg, derive_seed(9, mode, s));
      islanding += sc.islanding;
      const Eigen::VectorXd gx = m.gamma.cwiseProduct(sc.attack.x);
      // Attack identity.
      const Eigen::VectorXd lhs = a * (sc.theta - sc.theta_post) + d * gx.asDiagonal() * d.transpose() * sc.theta_post;
      CHECK((lhs - sc.delta).lpNorm<Eigen::Infinity>() <= 1e-8);
      // Total shedding balances.
      CHECK(std::abs(sc.delta.sum()) <= 1e-9);
      // Uniform ratio inside H with 0 <= p'_u / p_u <= 1.
      for (int b : area.buses) {
        CHECK(sc.p_post[b] == doctest::Approx(sc.alpha * sc.p[b]).epsilon(1e-12));
        CHECK(sc.delta[b] * sc.p[b] >= 0.0);
        CHECK(std::abs(sc.delta[b]) <= std::abs(sc.p[b]) + 1e-15);
      }
      // D' x has no H-bar component: attacked lines never touch H-bar.
      const Eigen::VectorXd dpx = d * gx.cwiseProduct(d.transpose() * sc.theta_post);
      CHECK(gather(dpx, v.hbar_buses).lpNorm<Eigen::Infinity>() == 0.0);
      // Attacked-bus support lies inside H.
      for (int b : localize_attacked_buses(a, sc.theta, sc.theta_post, sc.delta))
        CHECK(v.h_position[b] >= 0);
      // Post-attack power flow holds on the attacked grid.
      const Eigen::MatrixXd a_post = apply_attack(a, m.incidence, m.gamma, sc.attack.x);
      CHECK((a_post * sc.theta_post - sc.p_post).lpNorm<Eigen::Infinity>() <= 1e-9);
      if (!sc.islanding) CHECK(sc.delta.lpNorm<Eigen::Infinity>() == 0.0);
    }
  }
  CHECK(islanding > 0);
}

TEST_CASE("rebalance keeps every island balanced") {
  const GridModel& m = fixtures::ieee30();
  const AttackedArea& area = fixtures::island30();
  const SimulationConfig cfg = open_config();
  int islanding = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Scenario sc = generate_scenario(m, area, 3, cfg, derive_seed(17, 0, s));
    islanding += sc.islanding;
    for (const auto& island : sc.islands) {
      double sum = 0.0;
      for (int b : island) sum += sc.p_post[b];
      CHECK(std::abs(sum) <= 1e-9);
    }
  }
  CHECK(islanding >= 5);
}

TEST_CASE("rebalance rejects an out-of-range ratio") {
  const GridModel& m = fixtures::ieee30();
  const AttackedArea& area = fixtures::island30();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.topology.num_lines()));
  for (int l : area.lines) x[l] = 1.0;
  const Eigen::MatrixXd a_post = apply_attack(m.admittance.values, m.incidence, m.gamma, x);
  CHECK_THROWS_AS(rebalance_injections(m.topology, a_post, fixtures::balanced_injections(m.topology), area, 1.5), InfeasibleScenario);
}

TEST_CASE("generation is deterministic per seed") {
  const GridModel& m = fixtures::ieee30();
  const AttackedArea& area = fixtures::area30();
  const Scenario a = generate_scenario(m, area, 3, SimulationConfig{}, 123);
  const Scenario b = generate_scenario(m, area, 3, SimulationConfig{}, 123);
  const Scenario c = generate_scenario(m, area, 3, SimulationConfig{}, 124);
  CHECK(a.attack.lines == b.attack.lines);
  CHECK(a.theta_post == b.theta_post);
  CHECK(a.p != c.p);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("sampled injections balance") {
  const GridModel& m = fixtures::ieee118();
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const Injections inj = sample_injections(m.topology, LoadModel{}, rng);
    CHECK(std::abs(inj.p.sum()) <= 1e-12);
    CHECK(inj.load.minCoeff() >= 0.0);
  }
}
