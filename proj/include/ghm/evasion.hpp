#pragma once

// Evasion game checker. Space is cut into cells (a square grid over a
// hallway domain, or short arcs along a skeleton graph); per tick a cell is
// covered when its center lies within the coverage radius of an awake node.
// The evader moves at unbounded speed, so within a tick it reaches its whole
// uncovered component, and it passes from tick t to t + 1 through any cell
// uncovered in both.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ghm/domain.hpp"
#include "ghm/engine.hpp"
#include "ghm/network.hpp"

namespace ghm {

/// Cells with centers and adjacency; `label` gives printable coordinates
/// (grid column and row, or skeleton edge and arc index).
struct CellSpace
{
    std::vector<Point> centers;
    std::vector<std::array<int, 2>> label;
    std::vector<std::uint32_t> adj_offsets;  // CSR
    std::vector<std::uint32_t> adj;
    double resolution = 0.0;

    std::size_t size() const { return centers.size(); }
    std::span<const std::uint32_t> neighbors(std::size_t c) const
    {
        return {adj.data() + adj_offsets[c], adj.data() + adj_offsets[c + 1]};
    }
};

/// Square cells of side `resolution` whose centers lie in the domain (and in
/// `region`, when given), 4-connected.
CellSpace grid_cells(const HallwayDomain& domain, double resolution,
                     std::span<const Rect> region = {});

/// Arcs of length at most `resolution` along each skeleton edge; arcs meeting
/// at a skeleton vertex are adjacent.
CellSpace skeleton_cells(const SkeletonGraph& graph, double resolution);

struct EvasionInstance
{
    const Network* network = nullptr;
    /// Awake nodes per tick, indexed by absolute tick.
    std::vector<std::vector<NodeId>> schedule;
    /// Optional per-tick hash of the full automaton state. When present the
    /// dynamics are taken as deterministic and a recurrence proves survival.
    std::vector<std::uint64_t> state_hash;
    /// Without state hashes: the schedule repeats with period schedule.size().
    bool repeats = false;
    Tick entry_tick = 0;
};

/// Awake = nodes in phase `awake_phase`, ticks [0, last retained]. State
/// hashes are attached only for deterministic runs.
EvasionInstance instance_from_trace(const Network& net, const RunTrace& trace, Tick entry_tick,
                                    bool deterministic, Phase awake_phase = 0);

/// Per cell: covered at `tick` (ticks past the schedule wrap when it repeats).
std::vector<char> coverage_mask(const EvasionInstance& instance, const CellSpace& cells, Tick tick);

enum class Outcome
{
    CapturedByTick,
    SurvivesHorizon,
    SurvivesForever,
};

const char* to_string(Outcome outcome);

struct WitnessStep
{
    Tick tick = 0;
    std::uint32_t cell = 0;
};

struct Verdict
{
    Outcome outcome = Outcome::SurvivesHorizon;
    Tick tick = 0;  // capture tick, or last tick examined
    std::optional<std::array<Tick, 2>> recurrence;  // (t1, t2) with equal keys
    double resolution = 0.0;
    std::vector<WitnessStep> witness;  // one cell per tick from entry
};

struct DecideOptions
{
    bool witness = true;
    /// Extra ticks examined past the schedule when it repeats.
    Tick max_repeat_ticks = 1 << 16;
};

/// Reachability sweep over uncovered components. Throws InvalidArgument for
/// an empty schedule or entry tick outside it.
Verdict decide(const EvasionInstance& instance, const CellSpace& cells, const DecideOptions& options = {});

/// Same sweep over skeleton arcs.
Verdict decide_1d(const EvasionInstance& instance, const SkeletonGraph& graph, double resolution,
                  const DecideOptions& options = {});

/// Checks a survival witness directly: each cell is uncovered at its tick and
/// the next cell is reachable through cells uncovered at the next tick.
bool verify_witness(const EvasionInstance& instance, const CellSpace& cells, const Verdict& verdict);

struct RefinedVerdict
{
    Verdict verdict;
    std::vector<double> resolutions;
    std::vector<Outcome> outcomes;
    bool stable = false;
};

/// Halves the grid resolution until the outcome has held under two
/// consecutive halvings, or `max_halvings` is reached. Requires resolution
/// at most half the coverage radius.
RefinedVerdict decide_refined(const EvasionInstance& instance, const HallwayDomain& domain, double resolution,
                              std::span<const Rect> region = {}, int max_halvings = 4);

}  // namespace ghm
