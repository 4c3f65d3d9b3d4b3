#include "pcpa/simulator.hpp"

#include "pcpa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace pcpa {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::Alter: return "alter";
    case AttackKind::Cut: return "cut";
    case AttackKind::Open: return "open";
  }
  return "alter";
}

AttackKind parse_attack_kind(std::string_view text) {
  if (text == "alter") return AttackKind::Alter;
  if (text == "cut") return AttackKind::Cut;
  if (text == "open") return AttackKind::Open;
  throw ParseError("unknown attack kind '" + std::string(text) + "'");
}

KindMix KindMix::only(AttackKind kind) {
  KindMix mix{0.0, 0.0, 0.0};
  switch (kind) {
    case AttackKind::Alter: mix.alter = 1.0; break;
    case AttackKind::Cut: mix.cut = 1.0; break;
    case AttackKind::Open: mix.open = 1.0; break;
  }
  return mix;
}

double attack_fraction(double impedance_factor) {
  if (std::isinf(impedance_factor) && impedance_factor > 0) return 1.0;
  if (!(impedance_factor >= 1.0)) throw ValidationError("impedance factor must be >= 1");
  return 1.0 - 1.0 / impedance_factor;
}

Attack make_attack(const GridTopology& grid, const AttackedArea& area, std::vector<int> lines,
                   std::vector<AttackKind> kinds, std::vector<double> factors) {
  if (lines.size() != kinds.size() || lines.size() != factors.size()) {
    throw ValidationError("attack lines, kinds and factors differ in length");
  }
  std::vector<int> position(grid.num_lines(), -1);
  for (std::size_t k = 0; k < area.lines.size(); ++k) position[area.lines[k]] = static_cast<int>(k);

  std::vector<std::size_t> order(lines.size());
  std::iota(order.begin(), order.end(), 0);
  for (int j : lines) {
    if (j < 0 || j >= static_cast<int>(grid.num_lines()) || position[j] < 0) {
      throw ValidationError("attacked line is not in E_H");
    }
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return position[lines[a]] < position[lines[b]]; });

  Attack attack;
  attack.x = Eigen::VectorXd::Zero(grid.num_lines());
  attack.x_h = Eigen::VectorXd::Zero(area.lines.size());
  for (std::size_t i : order) {
    const int j = lines[i];
    if (attack.x[j] != 0.0) throw ValidationError("line attacked twice");
    double f = factors[i];
    if (kinds[i] == AttackKind::Open) f = std::numeric_limits<double>::infinity();
    const double xe = attack_fraction(f);
    if (!(xe > 0.0)) throw ValidationError("attack factor must exceed 1");
    attack.lines.push_back(j);
    attack.kinds.push_back(kinds[i]);
    attack.factors.push_back(f);
    attack.x[j] = xe;
    attack.x_h[position[j]] = xe;
  }
  return attack;
}

Attack sample_attack(const GridTopology& grid, const AttackedArea& area, int cardinality, const KindMix& mix,
                     std::uint64_t rng_seed, const FactorRanges& ranges) {
  if (cardinality < 0 || static_cast<std::size_t>(cardinality) > area.lines.size()) {
    throw ValidationError("attack cardinality " + std::to_string(cardinality) + " outside [0, |E_H| = " +
                          std::to_string(area.lines.size()) + "]");
  }
  if (mix.alter < 0 || mix.cut < 0 || mix.open < 0 || mix.alter + mix.cut + mix.open <= 0) {
    throw ValidationError("attack kind mix needs a positive weight");
  }
  std::mt19937_64 rng(rng_seed);
  std::vector<int> pool = area.lines;
  // partial Fisher-Yates
  for (int i = 0; i < cardinality; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  std::discrete_distribution<int> kind_dist({mix.alter, mix.cut, mix.open});
  std::vector<int> lines(pool.begin(), pool.begin() + cardinality);
  std::vector<AttackKind> kinds;
  std::vector<double> factors;
  for (int i = 0; i < cardinality; ++i) {
    const auto kind = static_cast<AttackKind>(kind_dist(rng));
    kinds.push_back(kind);
    const FactorRange r = kind == AttackKind::Alter ? ranges.alter : ranges.cut;
    if (kind == AttackKind::Open) {
      factors.push_back(std::numeric_limits<double>::infinity());
    } else {
      if (!(r.low > 1.0) || !(r.high >= r.low)) throw ValidationError("invalid impedance factor range");
      factors.push_back(std::uniform_real_distribution<double>(r.low, r.high)(rng));
    }
  }
  return make_attack(grid, area, std::move(lines), std::move(kinds), std::move(factors));
}

Eigen::MatrixXd apply_attack(const Eigen::MatrixXd& admittance, const IncidenceMatrix& incidence,
                             const Eigen::VectorXd& gamma, const Eigen::VectorXd& x) {
  const auto& d = incidence.values;
  if (x.size() != d.cols() || gamma.size() != d.cols() || admittance.rows() != d.rows()) {
    throw ValidationError("apply_attack: dimension mismatch");
  }
  if ((x.array() < 0.0).any() || (x.array() > 1.0).any()) throw ValidationError("attack entries must lie in [0, 1]");
  return admittance - d * gamma.cwiseProduct(x).asDiagonal() * d.transpose();
}

RebalanceResult rebalance_injections(const GridTopology& grid, const Eigen::MatrixXd& admittance_post,
                                     const Eigen::VectorXd& p, const AttackedArea& area, double alpha,
                                     double max_compensation) {
  const int n = static_cast<int>(grid.num_buses());
  if (p.size() != n || admittance_post.rows() != n) throw ValidationError("rebalance: dimension mismatch");

  RebalanceResult out;
  const double tol = 1e-12 * admittance_post.diagonal().cwiseAbs().maxCoeff();
  out.islands = find_islands(admittance_post, tol);
  out.compensation.assign(out.islands.size(), 1.0);
  if (out.islands.size() == 1) {
    out.p_post = p;
    out.delta = Eigen::VectorXd::Zero(n);
    return out;
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InfeasibleScenario("shedding ratio outside [0, 1]");

  out.islanding = true;
  out.alpha = alpha;
  std::vector<char> zone(n, 0);
  for (int b : area.buses) {
    zone[b] = 1;
    for (const auto& adj : grid.neighbors(b)) zone[adj.bus] = 1;
  }

  out.p_post = p;
  const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  for (std::size_t k = 0; k < out.islands.size(); ++k) {
    double z = 0.0, r = 0.0;
    bool has_zone = false;
    for (int b : out.islands[k]) {
      if (zone[b]) {
        z += p[b];
        has_zone = true;
      } else {
        r += p[b];
      }
    }
    if (!has_zone) {
      if (std::abs(r) > kBalanceTolerance) throw InfeasibleScenario("island outside the attacked area is unbalanced");
      continue;
    }
    double beta = alpha;
    if (std::abs(r) > 1e-12 * scale) {
      beta = -alpha * z / r;
    } else if (std::abs(alpha * z) > kBalanceTolerance) {
      throw InfeasibleScenario("island has no injection left to compensate shedding");
    }
    if (beta < 0.0 || beta > max_compensation) {
      throw InfeasibleScenario("compensating ratio " + std::to_string(beta) + " outside [0, " +
                               std::to_string(max_compensation) + "]");
    }
    out.compensation[k] = beta;
    for (int b : out.islands[k]) out.p_post[b] = (zone[b] ? alpha : beta) * p[b];
  }
  out.delta = p - out.p_post;
  return out;
}

Injections sample_injections(const GridTopology& grid, const LoadModel& model, std::mt19937_64& rng) {
  const Eigen::VectorXd base_load = grid.base_loads();
  const Eigen::VectorXd base_gen = grid.base_generation();
  std::lognormal_distribution<double> mult(0.0, model.sigma);
  Injections inj;
  inj.load.resize(base_load.size());
  for (Eigen::Index i = 0; i < base_load.size(); ++i) inj.load[i] = base_load[i] * mult(rng);

  const double total_load = inj.load.sum();
  const double total_gen = base_gen.sum();
  if (std::abs(total_gen) < 1e-12) {
    if (std::abs(total_load) > 1e-12) throw ValidationError("grid has load but no generation");
    inj.p = Eigen::VectorXd::Zero(base_load.size());
    return inj;
  }
  Eigen::VectorXd gen = base_gen * (total_load / total_gen);
  inj.p = gen - inj.load;
  Eigen::Index slack = 0;
  gen.cwiseAbs().maxCoeff(&slack);
  inj.p[slack] -= inj.p.sum();
  return inj;
}

Scenario simulate(const GridModel& model, const AttackedArea& area, const Attack& attack,
                  const Injections& injections, double alpha, double max_compensation) {
  const GridTopology& grid = model.topology;
  Scenario s;
  s.attack = attack;
  s.p = injections.p;
  s.load = injections.load;
  s.theta = solve_dc(model.admittance.values, s.p);

  const Eigen::VectorXd x = attack.x.size() == 0 ? Eigen::VectorXd::Zero(grid.num_lines()) : attack.x;
  if (attack.x.size() == 0) s.attack.x = x;
  if (s.attack.x_h.size() == 0) s.attack.x_h = Eigen::VectorXd::Zero(area.lines.size());

  const Eigen::MatrixXd a_post = apply_attack(model.admittance.values, model.incidence, model.gamma, x);
  RebalanceResult rb = rebalance_injections(grid, a_post, s.p, area, alpha, max_compensation);
  s.p_post = rb.p_post;
  s.delta = rb.delta;
  s.islanding = rb.islanding;
  s.alpha = rb.alpha;
  s.islands = rb.islands;
  s.theta_post = solve_dc(a_post, s.p_post);

  MeasurementSet& m = s.measurements;
  m.theta = s.theta;
  m.p = s.p;
  m.load = s.load;
  m.observed_buses = complement_buses(grid, area);
  m.theta_post_observed = gather(s.theta_post, m.observed_buses);
  m.p_post_observed = gather(s.p_post, m.observed_buses);
  return s;
}

Scenario generate_scenario(const GridModel& model, const AttackedArea& area, int cardinality,
                           const SimulationConfig& config, std::uint64_t rng_seed) {
  if (!(config.alpha_min >= 0.0 && config.alpha_max <= 1.0 && config.alpha_min <= config.alpha_max)) {
    throw ValidationError("shedding ratio range must lie in [0, 1]");
  }
  std::mt19937_64 rng(rng_seed);
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    Injections inj = sample_injections(model.topology, config.loads, rng);
    Attack attack = sample_attack(model.topology, area, cardinality, config.mix, rng(), config.ranges);
    const double alpha = std::uniform_real_distribution<double>(config.alpha_min, config.alpha_max)(rng);
    try {
      return simulate(model, area, attack, inj, alpha, config.max_compensation);
    } catch (const InfeasibleScenario&) {
      continue;
    }
  }
  throw InfeasibleScenario("no feasible scenario after " + std::to_string(config.max_attempts) + " attempts");
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(root) ^ stream) ^ index);
}

}  // namespace pcpa
