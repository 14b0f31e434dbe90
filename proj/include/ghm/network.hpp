#pragma once

// Geometric communication graph with its Rips 2-skeleton, shadow and
// coverage rasterization, boundary paths, and boundary-sensor augmentation.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "ghm/domain.hpp"
#include "ghm/types.hpp"

namespace ghm {

using Edge = std::array<NodeId, 2>;      // i < j
using Triangle = std::array<NodeId, 3>;  // i < j < k

class Network
{
  public:
    Network() = default;

    std::size_t size() const { return positions_.size(); }
    const std::vector<Point>& positions() const { return positions_; }
    Point position(NodeId v) const { return positions_[v]; }
    double comm_radius() const { return comm_radius_; }
    double coverage_radius() const { return coverage_radius_; }

    std::span<const NodeId> neighbors(NodeId v) const
    {
        return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
    }
    /// Edge ids parallel to neighbors(v).
    std::span<const std::int32_t> incident_edges(NodeId v) const
    {
        return {neighbor_edge_.data() + offsets_[v], neighbor_edge_.data() + offsets_[v + 1]};
    }
    std::size_t degree(NodeId v) const { return static_cast<std::size_t>(offsets_[v + 1] - offsets_[v]); }

    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }

    bool adjacent(NodeId a, NodeId b) const;
    /// Index into edges(), or -1.
    std::int32_t edge_index(NodeId a, NodeId b) const;

    /// Clone nodes mirror another node's state and coverage; -1 otherwise.
    const std::vector<NodeId>& mirror_of() const { return mirror_of_; }
    bool is_clone(NodeId v) const { return !mirror_of_.empty() && mirror_of_[v] >= 0; }
    /// Node whose coverage disk `v` uses (itself unless a clone).
    NodeId coverage_owner(NodeId v) const { return is_clone(v) ? mirror_of_[v] : v; }
    Point coverage_center(NodeId v) const { return positions_[coverage_owner(v)]; }

    bool connected() const;

    /// Graph-only constructor; triangles are the 3-cliques of the edge set.
    static Network from_edges(std::vector<Point> positions, double comm_radius,
                              double coverage_radius, std::vector<Edge> edges,
                              std::vector<NodeId> mirror_of = {});

  private:
    friend Network build_network(std::span<const Point>, double, double);

    void finalize();

    std::vector<Point> positions_;
    double comm_radius_ = 0.0;
    double coverage_radius_ = 0.0;
    std::vector<std::int32_t> offsets_;
    std::vector<NodeId> neighbors_;
    std::vector<std::int32_t> neighbor_edge_;
    std::vector<Edge> edges_;
    std::vector<Triangle> triangles_;
    std::vector<NodeId> mirror_of_;
};

/// Edge iff squared distance <= r^2; neighbor search on a hash grid of cell size r.
Network build_network(std::span<const Point> points, double comm_radius, double coverage_radius);

/// Copy of `net` without the flagged edges (one flag per edge id).
Network remove_edges(const Network& net, const std::vector<char>& removed);

/// Rasterization grid over the domain bounding box; only cells whose center
/// lies in the domain take part.
struct RasterGrid
{
    Rect box;
    double resolution = 0.0;
    int nx = 0;
    int ny = 0;

    RasterGrid(const HallwayDomain& domain, double resolution);
    Point center(int i, int j) const
    {
        return {box.xmin + (i + 0.5) * resolution, box.ymin + (j + 0.5) * resolution};
    }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    std::size_t cell_count() const { return static_cast<std::size_t>(nx) * ny; }
};

enum class ShadowMode
{
    Simplices,  // union of convex hulls of vertices, edges, and triangles
    Disks,      // union of coverage disks of a node subset
};

struct CoverageReport
{
    double resolution = 0.0;
    std::vector<std::array<int, 2>> uncovered_cells;
    std::size_t domain_cells = 0;
    double covered_fraction = 0.0;
};

/// In disk mode `nodes` selects the disks (all nodes when empty); ignored in
/// simplex mode.
CoverageReport shadow_covers(const Network& net, const HallwayDomain& domain, double resolution,
                             ShadowMode mode = ShadowMode::Simplices,
                             std::optional<std::span<const NodeId>> nodes = std::nullopt);

struct LocalHoleReport
{
    int rips_h1_rank = 0;
    int domain_h1_rank = 0;
    bool has_local_hole = false;
    /// Skeleton coordinates of each Rips basis cycle (rows) on the skeleton's
    /// non-tree edges (columns).
    std::vector<std::vector<long long>> projection;
};

/// Throws DisconnectedNetwork.
LocalHoleReport local_hole_check(const Network& net, const HallwayDomain& domain);

struct BoundaryPath
{
    std::vector<NodeId> node_ids;
    int boundary_component = 0;
};

/// One entry per boundary component; empty when no path spans it.
std::vector<std::optional<BoundaryPath>> extract_boundary_paths(const Network& net,
                                                                const HallwayDomain& domain);

/// Checks the simple-path, adjacency, and boundary-contact conditions.
bool valid_boundary_path(const Network& net, const HallwayDomain& domain, const BoundaryPath& path);

/// True when every point of the component lies within some path node's disk.
bool path_spans_component(const Network& net, const HallwayDomain& domain, const BoundaryPath& path);

struct Augmentation
{
    Network network;                     // originals first, then clones
    std::vector<NodeId> clone_of;        // per added node, the original it mirrors
    std::optional<std::vector<Phase>> state;  // extended state when a source was given
};

/// Adds x' on U_x ∩ ∂D per path node and z' on U_x ∩ U_y ∩ ∂D per path edge.
/// Throws NoBoundaryPath unless every component has a spanning path.
Augmentation augment_boundary_sensors(const Network& net, const HallwayDomain& domain,
                                      std::optional<std::span<const Phase>> state_source = std::nullopt);

}  // namespace ghm
