#pragma once

// Scenario files and experiment orchestration. A scenario is a JSON object
// describing the domain, the network, the initial state, the run, and the
// analyses to perform; run_experiment executes it and writes its outputs
// plus a manifest of content hashes into a directory.
//
// Schema (format_version 1; members marked * are required):
//
//   format_version*  1
//   seed             u64, default 0
//   domain*          {"rects": [[xmin, ymin, xmax, ymax], ...]}
//                    or {"grid": {"size": S, "bars": B, "width": W}}: B
//                    horizontal and B vertical corridors of width W spread
//                    evenly over an S x S square
//   network*         {"node_count": N | "positions": "file.csv",
//                     "r"*: comm radius, "eps": coverage radius (default r),
//                     "augment": bool}
//   n*               alphabet size, >= 3
//   initial          {"kind": "uniform" | "zero" | "csv" | "class" | "waves",
//                     "path": snapshot CSV (csv),
//                     "target": [ints] (class),
//                     "waves": [{"edge", "anchor", "direction"}] (waves),
//                     "hop": profile step (class, waves; default r)}
//   sever            bool: cut links inside seed components before running
//   ticks            run length, default 100
//   links            {"p_s": success probability, "per_lifetime": bool}
//   dumps            ticks whose snapshots are written
//   awake_phase      phase counted as awake in reports, default 0
//   window           length of the trailing window for barrier and awake
//                    statistics, default 100 (clipped to the run)
//   analyses         {"continuity", "defects", "forest", "barriers",
//                     "evasion", "class": bool}
//   evasion          {"resolution" (default eps / 2), "entry" (default 0),
//                     "region": [[xmin, ymin, xmax, ymax], ...],
//                     "refine": bool}
//   montecarlo       {"trials", "node_counts", "estimators": ["seed_probability",
//                     "far_node_dieout", "survival"], "p_s": [..], "T",
//                     "per_lifetime", "cell_side", "N_tilde", "threads"}
//
// Files are resolved relative to the scenario file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ghm/domain.hpp"
#include "ghm/io.hpp"
#include "ghm/types.hpp"

namespace ghm {

struct WaveEntry
{
    int edge = 0;
    double anchor = 0.0;
    int direction = 1;
};

struct Analyses
{
    bool continuity = false;
    bool defects = false;
    bool forest = false;
    bool barriers = false;
    bool evasion = false;
    bool cls = false;
};

struct MonteCarloSection
{
    std::size_t trials = 100;
    std::vector<std::size_t> node_counts;
    std::vector<std::string> estimators;
    std::vector<double> p_s = {1.0};
    Tick T = 100;
    bool per_lifetime = false;
    double cell_side = 0.0;
    int N_tilde = 0;
    unsigned threads = 0;
};

struct Scenario
{
    std::filesystem::path base_dir;  // for relative paths
    std::uint64_t seed = 0;
    std::vector<Rect> rects;

    std::optional<std::size_t> node_count;
    std::optional<std::filesystem::path> positions_file;
    double r = 1.0;
    double eps = 1.0;
    bool augment = false;

    int n = 3;
    std::string initial = "uniform";
    std::optional<std::filesystem::path> initial_file;
    std::vector<long long> target;
    std::vector<WaveEntry> waves;
    double hop = 0.0;
    bool sever = false;

    Tick ticks = 100;
    double p_s = 1.0;
    bool per_lifetime = false;
    std::vector<Tick> dumps;
    Tick window = 100;
    /// Phase counted as awake in statistics, barriers, and evasion; the
    /// dynamics are unchanged.
    Phase awake_phase = 0;

    Analyses analyses;
    double evasion_resolution = 0.0;  // 0 selects eps / 2
    Tick evasion_entry = 0;
    std::vector<Rect> evasion_region;
    bool evasion_refine = false;

    std::optional<MonteCarloSection> montecarlo;

    /// Non-fatal remarks from validation (e.g. a small coverage radius).
    std::vector<std::string> warnings;
};

/// B horizontal and B vertical corridors of width `width` over a square.
std::vector<Rect> hallway_grid_rects(double size, int bars, double width);

/// Throws ParseError (syntax, with line and column, or wrong member types)
/// or ValidationError listing every violated rule and unknown member.
Scenario parse_scenario_text(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario parse_scenario(const std::filesystem::path& path);
/// Runs the same checks on an assembled scenario; returns the warnings.
std::vector<std::string> validate(const Scenario& scenario);

Json scenario_to_json(const Scenario& scenario);

/// Full-width pieces of the corridors between junctions (skeleton edges
/// trimmed one communication radius clear of crossing corridors).
std::vector<Rect> corridor_sections(const HallwayDomain& domain, double comm_radius);

/// The simulation of the narrow-hallway replication: 16250 nodes over a
/// 200 x 200 square of corridors, n = 20, r = 1.5.
Scenario paper_scenario();

/// Pass/fail reading of a replication summary: awake fraction after the
/// periodicity onset within [1/(2n), 2/n] at every tick, a seed in the
/// initial state, and every corridor section crossed by a barrier on at
/// least 95% of the trailing window.
struct ReplicationCheck
{
    bool awake_ok = false;
    bool seed_ok = false;
    bool barrier_ok = false;
    double awake_min = 0.0;
    double awake_max = 0.0;
    double barrier_fraction = 0.0;
    std::optional<Tick> onset;

    bool ok() const { return awake_ok && seed_ok && barrier_ok; }
};

ReplicationCheck check_replication(const Json& summary);

struct ExperimentResult
{
    int exit_code = 0;
    std::string error;  // message when exit_code != 0
    Json summary;
    Json manifest;
};

/// Builds, prepares the initial state, runs, analyzes, and writes outputs
/// to `out_dir` (created if needed). Module errors become exit codes: 2 for
/// configuration, 3 for failed preconditions, 4 for internal consistency.
ExperimentResult run_experiment(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Monte Carlo estimators from the scenario's montecarlo section; writes
/// montecarlo.json (and survival CSVs) plus the manifest.
ExperimentResult run_montecarlo(const Scenario& scenario, const std::filesystem::path& out_dir);

}  // namespace ghm
