#pragma once

// Versioned file formats. Bulk numeric data (positions, snapshots, witness
// paths, survival curves) is CSV with a leading `# format_version=...`
// comment line; structured results are JSON objects carrying a
// "format_version" member. Every writer has a loader that restores the
// written value exactly: doubles are printed in shortest round-trip form.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ghm/engine.hpp"
#include "ghm/evasion.hpp"
#include "ghm/network.hpp"
#include "ghm/state.hpp"
#include "ghm/stochastic.hpp"
#include "ghm/topology.hpp"

namespace ghm {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

// --- CSV ---------------------------------------------------------------

/// Header `x,y`, one row per node.
void write_positions_csv(std::ostream& out, const std::vector<Point>& positions);
std::vector<Point> read_positions_csv(std::istream& in);

/// Header `node,x,y,phase`; the version comment also records n and tick.
void write_snapshot_csv(std::ostream& out, const Network& net, const State& state);
/// Restores values, n, and tick. Rows must list nodes 0, 1, ... in order.
State read_snapshot_csv(std::istream& in);

/// Header `tick,cell,label_a,label_b,x,y`.
void write_witness_csv(std::ostream& out, const Verdict& verdict, const CellSpace& cells);
std::vector<WitnessStep> read_witness_csv(std::istream& in);

/// Header `tick,dead,trials,fraction,lo,hi,first_death`.
void write_survival_csv(std::ostream& out, const SurvivalCurve& curve);
SurvivalCurve read_survival_csv(std::istream& in);

// --- JSON --------------------------------------------------------------

Json to_json(const Estimate& e);
Estimate estimate_from_json(const Json& j);

Json to_json(const Verdict& verdict);
Verdict verdict_from_json(const Json& j);

Json to_json(const Forest& forest);
Forest forest_from_json(const Json& j);

/// Basis loops as vertex lists (cycles that are not simple loops are written
/// as signed edge lists).
Json basis_to_json(const H1Basis& basis);
std::vector<Chain1> basis_cycles_from_json(const Json& j);

Json class_to_json(const std::vector<long long>& cls, std::string_view label);
std::vector<long long> class_from_json(const Json& j);

/// Throws ParseError when the version member is missing or unsupported.
void check_format_version(const Json& j);

// --- files and hashes --------------------------------------------------

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Whole-file read/write; throw Io on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace ghm
