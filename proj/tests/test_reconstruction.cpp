#include "fixtures.hpp"

#include "pcpa/errors.hpp"
#include "pcpa/reconstruction.hpp"
#include "pcpa/simulator.hpp"

#include <doctest.h>

#include <random>

using namespace pcpa;

TEST_CASE("blinded angles and injections are recovered exactly") {
  const GridModel& m = fixtures::ieee30();
  int islanding = 0;
  for (int mode = 0; mode < 2; ++mode) {
    const AttackedArea& area = mode == 0 ? fixtures::area30() : fixtures::island30();
    const PartitionedView v = partition_by_index(m, area.buses);
    SimulationConfig cfg;
    if (mode == 1) cfg.mix = KindMix::only(AttackKind::Open);
    for (std::uint64_t s = 0; s < 100; ++s) {
      const Scenario sc = generate_scenario(m, area, 1 + static_cast<int>(s % 8), cfg, derive_seed(31, mode, s));
      const MeasurementSet& ms = sc.measurements;
      const Eigen::VectorXd delta_hbar = gather(ms.p, v.hbar_buses) - ms.p_post_observed;
      const ThetaReconstruction tr = reconstruct_theta_h(v, ms.theta, ms.theta_post_observed, delta_hbar);
      CHECK((tr.theta_post_h - gather(sc.theta_post, v.h_buses)).lpNorm<Eigen::Infinity>() <= 1e-8);
      CHECK(tr.residual <= 1e-9);
      CHECK(tr.smallest_singular_value > 0.0);

      const bool isl = detect_islanding(gather(ms.p, v.hbar_buses), ms.p_post_observed);
      CHECK(isl == sc.islanding);
      const auto inj = reconstruct_p_h(m.topology, v, ms.p, ms.p_post_observed);
      REQUIRE(inj.has_value());
      CHECK((inj->p_post_h - gather(sc.p_post, v.h_buses)).lpNorm<Eigen::Infinity>() <= 1e-9);
      CHECK((inj->delta_h - gather(sc.delta, v.h_buses)).lpNorm<Eigen::Infinity>() <= 1e-9);
      if (sc.islanding) {
        ++islanding;
        CHECK(inj->alpha == doctest::Approx(sc.alpha).epsilon(1e-12));
        CHECK(inj->reference_bus >= 0);
      } else {
        CHECK(inj->reference_bus == -1);
      }
    }
  }
  CHECK(islanding > 20);
}

TEST_CASE("rank-deficient boundary blocks are refused") {
  const GridModel& m = fixtures::ieee30();
  std::mt19937_64 rng(2);
  bool found = false;
  for (int trial = 0; trial < 500 && !found; ++trial) {
    std::vector<int> all(30);
    for (int i = 0; i < 30; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    const AttackedArea a = make_area(m, std::vector<int>(all.begin(), all.begin() + 12));
    if (a.full_column_rank_ok) continue;
    found = true;
    const PartitionedView v = partition_by_index(m, a.buses);
    const Eigen::VectorXd theta = Eigen::VectorXd::Zero(30);
    const auto nb = static_cast<Eigen::Index>(v.hbar_buses.size());
    CHECK_THROWS_AS(reconstruct_theta_h(v, theta, Eigen::VectorXd::Zero(nb), Eigen::VectorXd::Zero(nb)),
                    ReconstructionError);
  }
  CHECK(found);
}

TEST_CASE("inconsistent measurements are refused") {
  const GridModel& m = fixtures::ieee30();
  const AttackedArea& area = fixtures::area30();
  const PartitionedView v = partition_by_index(m, area.buses);
  const Scenario sc = generate_scenario(m, area, 2, SimulationConfig{}, 5);
  Eigen::VectorXd theta_obs = sc.measurements.theta_post_observed;
  theta_obs[0] += 0.05;
  CHECK_THROWS_AS(reconstruct_theta_h(v, sc.theta, theta_obs, Eigen::VectorXd::Zero(theta_obs.size())),
                  ReconstructionError);
}

TEST_CASE("no usable boundary neighbour gives no injection estimate") {
  const GridModel& m = fixtures::ieee30();
  const AttackedArea& area = fixtures::area30();
  const PartitionedView v = partition_by_index(m, area.buses);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(30);
  // Only a bus far from the boundary changes: islanding is detected but no neighbour qualifies.
  Eigen::VectorXd p_post_hbar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(v.hbar_buses.size()));
  int far = -1;
  for (std::size_t i = 0; i < v.hbar_buses.size() && far < 0; ++i) {
    bool touches = false;
    for (const auto& adj : m.topology.neighbors(v.hbar_buses[i])) touches |= v.h_position[adj.bus] >= 0;
    if (!touches) far = static_cast<int>(i);
  }
  REQUIRE(far >= 0);
  p[v.hbar_buses[far]] = 1.0;
  p_post_hbar[far] = 0.5;
  CHECK(detect_islanding(gather(p, v.hbar_buses), p_post_hbar));
  CHECK_FALSE(reconstruct_p_h(m.topology, v, p, p_post_hbar).has_value());
}
