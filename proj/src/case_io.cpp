#include "pcpa/case_io.hpp"

#include "pcpa/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>

namespace pcpa {

namespace {

using Table = std::vector<std::vector<double>>;

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char c : text) {
    if (c == '%') in_comment = true;
    if (c == '\n') in_comment = false;
    if (!in_comment) out.push_back(c);
  }
  return out;
}

double parse_number(std::string_view tok) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("bad numeric field '" + std::string(tok) + "'");
  }
  return v;
}

std::optional<Table> find_table(const std::string& text, const std::string& table) {
  const std::regex head("(?:^|[^A-Za-z0-9_])(?:mpc\\.)?" + table + "\\s*=\\s*\\[");
  std::smatch m;
  if (!std::regex_search(text, m, head)) return std::nullopt;
  const auto begin = static_cast<std::size_t>(m.position(0) + m.length(0));
  const auto end = text.find(']', begin);
  if (end == std::string::npos) throw ParseError("unterminated '" + table + "' table");

  Table rows;
  std::vector<double> row;
  auto flush = [&] {
    if (!row.empty()) rows.push_back(std::move(row));
    row.clear();
  };
  std::string_view body(text.data() + begin, end - begin);
  std::size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if (c == ';' || c == '\n') {
      flush();
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++i;
    } else {
      std::size_t j = i;
      while (j < body.size() && !std::isspace(static_cast<unsigned char>(body[j])) && body[j] != ';' &&
             body[j] != ',')
        ++j;
      std::string_view tok = body.substr(i, j - i);
      if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
      row.push_back(parse_number(tok));
      i = j;
    }
  }
  flush();
  return rows;
}

void require_columns(const Table& t, std::size_t n, const std::string& table) {
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (t[r].size() < n) {
      throw ParseError(table + " row " + std::to_string(r + 1) + " has " + std::to_string(t[r].size()) +
                       " columns, expected at least " + std::to_string(n));
    }
  }
}

int as_id(double v, const std::string& what) {
  if (v != std::floor(v)) throw ParseError(what + " must be an integer");
  return static_cast<int>(v);
}

}  // namespace

GridTopology parse_matpower_case(std::string_view text, std::string name) {
  const std::string clean = strip_comments(text);

  double base_mva = 100.0;
  {
    const std::regex base("baseMVA\\s*=\\s*([-+0-9.eE]+)");
    std::smatch m;
    if (std::regex_search(clean, m, base)) base_mva = parse_number(m[1].str());
  }

  auto bus_table = find_table(clean, "bus");
  if (!bus_table || bus_table->empty()) throw ParseError("case text has no bus table");
  auto branch_table = find_table(clean, "branch");
  if (!branch_table) throw ParseError("case text has no branch table");
  require_columns(*bus_table, 3, "bus");
  require_columns(*branch_table, 4, "branch");

  std::map<BusId, double> generation;
  if (auto gen = find_table(clean, "gen")) {
    require_columns(*gen, 2, "gen");
    for (const auto& row : *gen) {
      const bool on = row.size() < 8 || row[7] > 0.0;
      if (on) generation[as_id(row[0], "gen bus")] += row[1];
    }
  }

  std::vector<Bus> buses;
  buses.reserve(bus_table->size());
  for (const auto& row : *bus_table) {
    Bus b;
    b.id = as_id(row[0], "bus id");
    b.load = row[2] / base_mva;
    b.p_base = (generation.contains(b.id) ? generation[b.id] / base_mva : 0.0) - b.load;
    buses.push_back(b);
  }

  std::vector<Line> lines;
  for (std::size_t r = 0; r < branch_table->size(); ++r) {
    const auto& row = (*branch_table)[r];
    if (row.size() >= 11 && row[10] <= 0.0) continue;
    lines.push_back({static_cast<LineId>(r + 1), as_id(row[0], "branch from"), as_id(row[1], "branch to"), row[3]});
  }
  return GridTopology(std::move(name), std::move(buses), std::move(lines), base_mva);
}

GridTopology parse_grid_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("grid JSON: ") + e.what());
  }
  try {
    if (!j.contains("buses")) throw ParseError("grid JSON has no buses array");
    if (!j.contains("lines")) throw ParseError("grid JSON has no lines array");
    std::vector<Bus> buses;
    for (const auto& b : j.at("buses")) {
      buses.push_back({b.at("id").get<int>(), b.value("p_base", 0.0), b.value("load", 0.0)});
    }
    std::vector<Line> lines;
    for (const auto& l : j.at("lines")) {
      lines.push_back({l.at("id").get<int>(), l.at("from").get<int>(), l.at("to").get<int>(),
                       l.at("reactance").get<double>()});
    }
    return GridTopology(j.value("name", std::string("grid")), std::move(buses), std::move(lines),
                        j.value("base_mva", 100.0));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("grid JSON: ") + e.what());
  }
}

std::string grid_to_json(const GridTopology& grid) {
  nlohmann::json j;
  j["name"] = grid.name();
  j["base_mva"] = grid.base_mva();
  j["buses"] = nlohmann::json::array();
  for (const auto& b : grid.buses()) j["buses"].push_back({{"id", b.id}, {"p_base", b.p_base}, {"load", b.load}});
  j["lines"] = nlohmann::json::array();
  for (const auto& l : grid.lines())
    j["lines"].push_back({{"id", l.id}, {"from", l.from}, {"to", l.to}, {"reactance", l.reactance}});
  return j.dump(1);
}

GridTopology parse_case_file(std::string_view text, std::string name) {
  auto first = std::find_if(text.begin(), text.end(), [](char c) { return !std::isspace(static_cast<unsigned char>(c)); });
  if (first != text.end() && *first == '{') return parse_grid_json(text);
  return parse_matpower_case(text, std::move(name));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
}

GridTopology load_grid(const std::filesystem::path& path) {
  return parse_case_file(read_text_file(path), path.stem().string());
}

}  // namespace pcpa
