#pragma once

// Synchronous Greenberg-Hastings dynamics on a network: stepping and runs,
// continuity and subordination predicates, periodicity, the subordination
// forest, wavefronts, and barrier detection.

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "ghm/domain.hpp"
#include "ghm/network.hpp"
#include "ghm/state.hpp"

namespace ghm {

/// Clone nodes copy their original's new value and never excite neighbors.
/// `link_mask`, if given, flags each edge live (nonzero) or failed.
State step(const Network& net, const State& state, const std::vector<char>* link_mask = nullptr);

struct LinkFailure
{
    double p_success = 1.0;
    std::uint64_t seed = 0;
    /// Draw one mask for the whole run instead of fresh draws every tick.
    bool per_lifetime = false;
};

/// Live-link mask for one tick; a pure function of (seed, tick, edge id).
std::vector<char> link_mask(const Network& net, const LinkFailure& failure, Tick tick);

struct ContinuityCheck
{
    bool continuous = true;
    std::optional<Edge> violation;
    explicit operator bool() const { return continuous; }
};

/// Every edge inside the subset (all nodes when absent) has cyclic offset in
/// {-1, 0, 1}.
ContinuityCheck is_continuous(const Network& net, const State& state,
                              std::optional<std::span<const NodeId>> subset = std::nullopt);

/// u(y) = u(x) + 1 mod n. Throws NotNeighbors.
bool is_subordinate(const Network& net, const State& state, NodeId x, NodeId y);

struct TickEvents
{
    Tick tick = 0;
    std::vector<NodeId> fired;    // 0 -> 1
    std::size_t stalled_count = 0;
    std::vector<NodeId> stalled;  // held at 0; filled only when recording stalls
};

struct RunOptions
{
    Tick ticks = 0;
    std::optional<LinkFailure> link_failure;
    /// Snapshots retained (most recent first evicted); 0 keeps all.
    std::size_t snapshot_capacity = 0;
    bool record_stalled = false;
};

struct RunTrace
{
    State initial;
    State final_state;
    std::vector<TickEvents> events;  // events[t] describes the step t -> t+1
    std::deque<State> snapshots;     // consecutive ticks, oldest first

    /// True when snapshots start at tick 0 and end at the final tick.
    bool complete() const;
    const State& at(Tick t) const;  // throws InsufficientTrace when not retained
    Tick first_retained() const { return snapshots.empty() ? 0 : snapshots.front().tick; }
    Tick last_tick() const { return final_state.tick; }
};

RunTrace run(const Network& net, const State& initial, const RunOptions& options);

struct Periodicity
{
    bool eventually_periodic = false;
    std::optional<int> period;
    Tick onset = 0;
};

/// Smallest period K <= window consistent over the last 2*window retained
/// snapshots; onset is the earliest retained tick from which it holds.
/// Default window 3n. Throws InsufficientTrace.
std::vector<Periodicity> detect_periodicity(const RunTrace& trace, std::optional<int> window = std::nullopt);

struct Forest
{
    std::vector<NodeId> parent;    // kNoNode for roots
    std::vector<Tick> sub_tick;    // first tick of permanent subordination to the parent
    std::vector<Tick> lock_tick;   // first tick at 0 after joining the forest
    std::vector<int> depth;
    std::vector<NodeId> roots;     // ascending
};

/// Needs a complete trace whose nodes are all n-periodic by the end.
/// Throws NotConverged or InsufficientTrace.
Forest subordination_forest(const Network& net, const RunTrace& trace);

/// u^{-1}(0), ascending.
std::vector<NodeId> wavefront(const State& state);
std::vector<NodeId> depth_level(const Forest& forest, int k);

/// Whether the coverage disks of `nodes` inside `corridor` connect its two
/// long walls. The corridor is a member rectangle of the domain or a piece
/// of one spanning its full width. Throws BadCorridor.
bool is_barrier(const Network& net, std::span<const NodeId> nodes, const HallwayDomain& domain,
                const Rect& corridor);

/// Fraction of nodes at 0.
double awake_fraction(const State& state);

}  // namespace ghm
