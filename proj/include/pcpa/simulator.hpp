#pragma once

#include "pcpa/area.hpp"
#include "pcpa/grid.hpp"
#include "pcpa/powerflow.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace pcpa {

/// Physical attack on a single line.
///  - Alter: impedance multiplied by a factor in (1.5, 5).
///  - Cut:   impedance multiplied by a factor in (100, 1000), emulating a disconnection.
///  - Open:  exact disconnection, x_e = 1. Not part of the default mix; used to
///           produce islanding and strictly binary scenarios.
enum class AttackKind { Alter, Cut, Open };

std::string_view to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view text);

struct FactorRange {
  double low = 0.0;
  double high = 0.0;
};

struct FactorRanges {
  FactorRange alter{1.5, 5.0};
  FactorRange cut{100.0, 1000.0};
};

/// Relative weights of the attack kinds when sampling a line's kind.
struct KindMix {
  double alter = 0.5;
  double cut = 0.5;
  double open = 0.0;

  static KindMix only(AttackKind kind);
};

/// Fraction of admittance removed by an impedance factor f: x = 1 - 1/f.
double attack_fraction(double impedance_factor);

struct Attack {
  std::vector<int> lines;  // grid line indices in E_H order
  std::vector<AttackKind> kinds;
  std::vector<double> factors;  // +inf for Open
  Eigen::VectorXd x;            // over all grid lines
  Eigen::VectorXd x_h;          // over E_H
};

/// Assemble an attack from explicit per-line kinds and factors.
Attack make_attack(const GridTopology& grid, const AttackedArea& area, std::vector<int> lines,
                   std::vector<AttackKind> kinds, std::vector<double> factors);

/// Sample |F| = `cardinality` distinct lines of E_H uniformly, a kind per line
/// from `mix` and a factor uniformly from the kind's range.
Attack sample_attack(const GridTopology& grid, const AttackedArea& area, int cardinality, const KindMix& mix,
                     std::uint64_t rng_seed, const FactorRanges& ranges = {});

/// A' = A - D Gamma diag(x) D^T.
Eigen::MatrixXd apply_attack(const Eigen::MatrixXd& admittance, const IncidenceMatrix& incidence,
                             const Eigen::VectorXd& gamma, const Eigen::VectorXd& x);

struct RebalanceResult {
  Eigen::VectorXd p_post;
  Eigen::VectorXd delta;  // p - p'
  bool islanding = false;
  double alpha = 1.0;                 // ratio applied to V_H and its H-bar neighbours
  std::vector<Island> islands;        // islands of A'
  std::vector<double> compensation;   // ratio applied to the remaining buses of each island
};

inline constexpr double kDefaultMaxCompensation = 3.0;

/// Post-attack injections under proportional shedding.
///
/// Connected A': p' = p. Otherwise every V_H bus and every H-bar bus adjacent
/// to V_H is scaled by `alpha`, and the other buses of island k by the ratio
/// beta_k solving alpha * Z_k + beta_k * R_k = 0 so that each island balances.
/// Throws InfeasibleScenario when alpha is outside [0, 1] or some beta_k is
/// negative, above `max_compensation`, or undefined.
RebalanceResult rebalance_injections(const GridTopology& grid, const Eigen::MatrixXd& admittance_post,
                                     const Eigen::VectorXd& p, const AttackedArea& area, double alpha,
                                     double max_compensation = kDefaultMaxCompensation);

struct Injections {
  Eigen::VectorXd p;
  Eigen::VectorXd load;
};

/// Per-bus lognormal load multipliers around the base loads; generation is
/// the base generation rescaled to cover the sampled total load.
struct LoadModel {
  double sigma = 0.2;
};

Injections sample_injections(const GridTopology& grid, const LoadModel& model, std::mt19937_64& rng);

/// Control-center view: full pre-attack data, post-attack data for H-bar only.
struct MeasurementSet {
  Eigen::VectorXd theta;
  Eigen::VectorXd p;
  Eigen::VectorXd load;
  std::vector<int> observed_buses;  // H-bar, ascending bus indices
  Eigen::VectorXd theta_post_observed;
  Eigen::VectorXd p_post_observed;
};

struct Scenario {
  Attack attack;
  Eigen::VectorXd theta;
  Eigen::VectorXd p;
  Eigen::VectorXd load;
  Eigen::VectorXd theta_post;
  Eigen::VectorXd p_post;
  Eigen::VectorXd delta;
  double alpha = 1.0;
  bool islanding = false;
  std::vector<Island> islands;
  MeasurementSet measurements;
};

/// Pre-attack flow, attack, rebalance, post-attack flow per island, blinding.
Scenario simulate(const GridModel& model, const AttackedArea& area, const Attack& attack,
                  const Injections& injections, double alpha, double max_compensation = kDefaultMaxCompensation);

struct SimulationConfig {
  KindMix mix;
  FactorRanges ranges;
  LoadModel loads;
  double alpha_min = 0.5;
  double alpha_max = 0.95;
  double max_compensation = kDefaultMaxCompensation;
  int max_attempts = 200;
};

/// Sample loads, attack and shedding ratio from `rng_seed`, resampling
/// rejected (infeasible) scenarios.
Scenario generate_scenario(const GridModel& model, const AttackedArea& area, int cardinality,
                           const SimulationConfig& config, std::uint64_t rng_seed);

/// Independent 64-bit stream seed derived from a root seed and indices.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace pcpa
