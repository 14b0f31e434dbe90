#pragma once

// Programmed states: single travelling waves across one corridor, removal of
// the links that keep local defects alive, and states of a prescribed
// cohomology class built as sums of waves.

#include <vector>

#include "ghm/domain.hpp"
#include "ghm/network.hpp"
#include "ghm/state.hpp"
#include "ghm/topology.hpp"

namespace ghm {

struct WaveSpec
{
    int corridor_edge = 0;  // skeleton edge id
    double anchor = 0.0;    // arc length from the edge's first vertex
    /// Sign of the degree along the edge orientation (first vertex to
    /// second). The wave itself travels the opposite way.
    int direction = 1;
    int n = 0;
    /// Centerline advance per profile step; 0 selects the communication radius.
    double hop = 0.0;
};

/// Usable arc-length interval of a skeleton edge: the edge minus the stretches
/// within one communication radius of another corridor.
struct CorridorInterval
{
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi > lo ? hi - lo : 0.0; }
};

CorridorInterval free_interval(const HallwayDomain& domain, int edge, double comm_radius);

/// Ramp 0, 1, ..., n-1, 0 across a band of the corridor, zero elsewhere.
/// Throws InvalidArgument (bad edge, direction, or a band reaching a
/// junction), SparseBand (empty centerline bins, or the band's zero layer
/// does not separate the corridor walls), or ContinuityRepairFailed.
State single_wave(const Network& net, const HallwayDomain& domain, const WaveSpec& spec);

/// Removes the links from state 0 to state 1 inside strongly connected parts
/// of the successor digraph; travelling waves keep their fronts.
Network sever_defect_links(const Network& net, const State& state);

struct RealizeOptions
{
    double hop = 0.0;  // 0 selects the communication radius
};

/// State whose degrees on the basis cycles equal `target`. Throws
/// BasisMismatch (rank or corridor correspondence fails) or
/// InsufficientCorridorLength.
State realize_class(const Network& net, const HallwayDomain& domain, const H1Basis& basis,
                    const std::vector<long long>& target, int n, const RealizeOptions& options = {});

}  // namespace ghm
