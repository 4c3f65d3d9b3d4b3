#include "pcpa/records.hpp"

#include "pcpa/errors.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pcpa {

using nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json bus_ids(const GridTopology& grid, const std::vector<int>& indices) {
  json a = json::array();
  for (int b : indices) a.push_back(grid.buses()[b].id);
  return a;
}

std::vector<int> bus_indices(const GridTopology& grid, const json& ids) {
  std::vector<int> out;
  for (const auto& id : ids) {
    const BusId b = id.get<BusId>();
    if (!grid.has_bus(b)) throw ValidationError("unknown bus id " + std::to_string(b));
    out.push_back(grid.bus_index(b));
  }
  return out;
}

template <class F>
auto guarded(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::vector<LineId> area_edge_ids(const GridTopology& grid, const AttackedArea& area) {
  std::vector<LineId> out;
  out.reserve(area.lines.size());
  for (int l : area.lines) out.push_back(grid.lines()[l].id);
  return out;
}

std::string area_to_json(const GridTopology& grid, const AttackedArea& area) {
  json j;
  j["area_id"] = area.id;
  j["grid"] = grid.name();
  j["buses"] = bus_ids(grid, area.buses);
  j["edges"] = area_edge_ids(grid, area);
  json boundary = json::array();
  for (int l : area.boundary_lines) boundary.push_back(grid.lines()[l].id);
  j["boundary_edges"] = boundary;
  j["seed"] = area.seed;
  j["seed_bus"] = area.seed_bus >= 0 ? json(grid.buses()[area.seed_bus].id) : json(nullptr);
  j["attempts"] = area.attempts;
  j["certification"] = {{"assumption1", area.assumption1_ok},
                        {"matching_cover", area.matching_cover_ok},
                        {"full_column_rank", area.full_column_rank_ok}};
  return j.dump(2) + "\n";
}

AttackedArea area_from_json(const GridModel& model, std::string_view text) {
  return guarded("area file", [&] {
    const json j = json::parse(text);
    const GridTopology& grid = model.topology;
    AttackedArea area = make_area(model, bus_indices(grid, j.at("buses")));
    if (j.contains("edges")) {
      const auto edges = j.at("edges").get<std::vector<LineId>>();
      if (edges != area_edge_ids(grid, area)) throw ValidationError("area file edge list does not match its buses");
    }
    area.id = j.value("area_id", area.id);
    area.seed = j.value("seed", std::uint64_t{0});
    area.attempts = j.value("attempts", 0);
    if (j.contains("seed_bus") && !j["seed_bus"].is_null()) area.seed_bus = grid.bus_index(j["seed_bus"].get<BusId>());
    return area;
  });
}

ScenarioRecord make_record(const GridModel& model, const AttackedArea& area, const Scenario& s, std::string id,
                           std::string split, std::string attack_mix) {
  const PartitionedView view = partition_by_index(model, area.buses);
  ScenarioRecord r;
  r.id = std::move(id);
  r.split = std::move(split);
  r.attack_mix = std::move(attack_mix);
  r.cardinality = static_cast<int>(s.attack.lines.size());
  for (int l : s.attack.lines) r.attacked.push_back(view.h_line_position[l]);
  r.kinds = s.attack.kinds;
  r.factors = s.attack.factors;
  r.x_h = s.attack.x_h;
  r.labels.assign(area.lines.size(), 0);
  for (int pos : r.attacked) r.labels[pos] = 1;
  r.measurements = s.measurements;
  r.theta_post_h = gather(s.theta_post, view.h_buses);
  r.p_post_h = gather(s.p_post, view.h_buses);
  r.delta_h = gather(s.delta, view.h_buses);
  r.alpha = s.alpha;
  r.islanding = s.islanding;
  return r;
}

std::string record_to_json(const GridTopology& grid, const AttackedArea& area, const ScenarioRecord& r) {
  json j;
  j["id"] = r.id;
  j["split"] = r.split;
  j["attack_mix"] = r.attack_mix;
  j["area_id"] = area.id;
  j["cardinality"] = r.cardinality;
  json attacks = json::array();
  for (std::size_t i = 0; i < r.attacked.size(); ++i) {
    const double f = r.factors[i];
    attacks.push_back({{"edge", grid.lines()[area.lines[r.attacked[i]]].id},
                       {"kind", to_string(r.kinds[i])},
                       {"factor", std::isfinite(f) ? json(f) : json(nullptr)}});
  }
  j["attacks"] = attacks;
  j["x_h"] = vec_to_json(r.x_h);
  j["labels"] = r.labels;
  const MeasurementSet& m = r.measurements;
  j["features"] = {{"theta", vec_to_json(m.theta)}, {"p", vec_to_json(m.p)}, {"load", vec_to_json(m.load)}};
  j["observed"] = {{"buses", bus_ids(grid, m.observed_buses)},
                   {"theta_post", vec_to_json(m.theta_post_observed)},
                   {"p_post", vec_to_json(m.p_post_observed)}};
  j["blinded"] = {{"theta_post_h", vec_to_json(r.theta_post_h)},
                  {"p_post_h", vec_to_json(r.p_post_h)},
                  {"delta_h", vec_to_json(r.delta_h)},
                  {"alpha", r.alpha},
                  {"islanding", r.islanding}};
  return j.dump();
}

ScenarioRecord record_from_json(const GridTopology& grid, const AttackedArea& area, std::string_view line) {
  return guarded("scenario record", [&] {
    const json j = json::parse(line);
    ScenarioRecord r;
    r.id = j.at("id").get<std::string>();
    r.split = j.at("split").get<std::string>();
    r.attack_mix = j.at("attack_mix").get<std::string>();
    if (j.at("area_id").get<std::string>() != area.id) throw PriorMismatch("record " + r.id + " belongs to another area");
    r.cardinality = j.at("cardinality").get<int>();
    for (const auto& a : j.at("attacks")) {
      const int l = grid.line_index(a.at("edge").get<LineId>());
      int pos = -1;
      for (std::size_t k = 0; k < area.lines.size(); ++k)
        if (area.lines[k] == l) pos = static_cast<int>(k);
      if (pos < 0) throw ValidationError("record " + r.id + " attacks a line outside the area");
      r.attacked.push_back(pos);
      r.kinds.push_back(parse_attack_kind(a.at("kind").get<std::string>()));
      const auto& f = a.at("factor");
      r.factors.push_back(f.is_null() ? std::numeric_limits<double>::infinity() : f.get<double>());
    }
    r.x_h = vec_from_json(j.at("x_h"));
    r.labels = j.at("labels").get<std::vector<int>>();
    if (r.x_h.size() != static_cast<Eigen::Index>(area.lines.size()) || r.labels.size() != area.lines.size()) {
      throw PriorMismatch("record " + r.id + " does not match |E_H| = " + std::to_string(area.lines.size()));
    }
    MeasurementSet& m = r.measurements;
    const auto& feat = j.at("features");
    m.theta = vec_from_json(feat.at("theta"));
    m.p = vec_from_json(feat.at("p"));
    m.load = vec_from_json(feat.at("load"));
    const auto& obs = j.at("observed");
    m.observed_buses = bus_indices(grid, obs.at("buses"));
    m.theta_post_observed = vec_from_json(obs.at("theta_post"));
    m.p_post_observed = vec_from_json(obs.at("p_post"));
    const auto& bl = j.at("blinded");
    r.theta_post_h = vec_from_json(bl.at("theta_post_h"));
    r.p_post_h = vec_from_json(bl.at("p_post_h"));
    r.delta_h = vec_from_json(bl.at("delta_h"));
    r.alpha = bl.at("alpha").get<double>();
    r.islanding = bl.at("islanding").get<bool>();
    return r;
  });
}

namespace {

PriorEntry prior_from(const json& j) {
  PriorEntry e;
  e.area_id = j.at("area_id").get<std::string>();
  e.edges = j.at("edges").get<std::vector<LineId>>();
  e.y = j.at("y").get<std::vector<double>>();
  if (j.contains("scenario_id") && !j["scenario_id"].is_null()) e.scenario_id = j["scenario_id"].get<std::string>();
  return e;
}

}  // namespace

std::vector<PriorEntry> parse_prior_file(std::string_view text) {
  return guarded("prior file", [&] {
    std::vector<PriorEntry> out;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) throw PriorMismatch("prior file is empty");
    if (text[first] == '[') {
      for (const auto& j : json::parse(text)) out.push_back(prior_from(j));
      return out;
    }
    std::istringstream in{std::string(text)};
    std::string whole{text};
    // A single (possibly pretty-printed) object parses as a whole; otherwise one object per line.
    if (json::accept(whole)) {
      out.push_back(prior_from(json::parse(whole)));
      return out;
    }
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.push_back(prior_from(json::parse(line)));
    }
    return out;
  });
}

std::string prior_to_json(const PriorEntry& e) {
  json j;
  j["area_id"] = e.area_id;
  j["edges"] = e.edges;
  j["y"] = e.y;
  if (e.scenario_id) j["scenario_id"] = *e.scenario_id;
  return j.dump();
}

PriorVector prior_for_area(const PriorEntry& entry, const GridTopology& grid, const AttackedArea& area) {
  if (entry.area_id != area.id) {
    throw PriorMismatch("prior is for area '" + entry.area_id + "', expected '" + area.id + "'");
  }
  if (entry.edges.size() != area.lines.size() || entry.y.size() != area.lines.size()) {
    throw PriorMismatch("prior has " + std::to_string(entry.y.size()) + " entries, area has " +
                        std::to_string(area.lines.size()) + " lines");
  }
  if (entry.edges != area_edge_ids(grid, area)) throw PriorMismatch("prior edge order differs from E_H");
  PriorVector p{entry.y, PriorSource::File};
  p.validate(area.lines.size());
  return p;
}

std::string diagnosis_to_json(const GridTopology& grid, const AttackedArea& area, const DiagnosisResult& r,
                              const std::optional<std::string>& scenario_id) {
  json j;
  if (scenario_id) j["scenario_id"] = *scenario_id;
  j["area_id"] = area.id;
  j["edges"] = area_edge_ids(grid, area);
  j["status"] = to_string(r.status);
  j["delta_mode"] = to_string(r.delta_mode);
  j["x_h"] = vec_to_json(r.x_h);
  j["delta_h"] = vec_to_json(r.delta_h);
  j["alpha"] = r.alpha ? json(*r.alpha) : json(nullptr);
  j["objective"] = r.objective;
  j["iterations"] = r.iterations;
  j["primal_residual"] = r.primal_residual;
  json unid = json::array();
  for (int pos : r.unidentifiable) unid.push_back(grid.lines()[area.lines[pos]].id);
  j["unidentifiable_edges"] = unid;
  const ReconstructionReport& rep = r.reconstruction;
  j["reconstruction"] = {{"theta_post_h", vec_to_json(rep.theta_post_h)},
                         {"theta_residual", rep.theta_residual},
                         {"smallest_singular_value", rep.smallest_singular_value},
                         {"largest_singular_value", rep.largest_singular_value},
                         {"islanding", rep.islanding}};
  if (rep.injections) {
    j["reconstruction"]["p_post_h"] = vec_to_json(rep.injections->p_post_h);
    j["reconstruction"]["alpha"] = rep.injections->alpha;
    j["reconstruction"]["reference_bus"] =
        rep.injections->reference_bus >= 0 ? json(grid.buses()[rep.injections->reference_bus].id) : json(nullptr);
  }
  return j.dump();
}

}  // namespace pcpa
