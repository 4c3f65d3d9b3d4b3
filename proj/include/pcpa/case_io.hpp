#pragma once

#include "pcpa/grid.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace pcpa {

/// Parse MATPOWER-style case text.
///
/// Reads `mpc.baseMVA`, the `bus` table (id, Pd), the `branch` table
/// (from, to, x, status) and, when present, the `gen` table (bus, Pg, status).
/// Everything else in the file is ignored. Line ids are 1-based branch row
/// numbers; out-of-service branches are skipped.
GridTopology parse_matpower_case(std::string_view text, std::string name = "case");

/// Parse the canonical JSON grid format:
/// `{"name", "base_mva", "buses": [{id, p_base, load}], "lines": [{id, from, to, reactance}]}`.
GridTopology parse_grid_json(std::string_view text);
std::string grid_to_json(const GridTopology& grid);

/// Parse either format, detected from the first non-blank character.
GridTopology parse_case_file(std::string_view text, std::string name = "case");

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Load a grid from a path. The grid name defaults to the file stem.
GridTopology load_grid(const std::filesystem::path& path);

}  // namespace pcpa
