#pragma once

// Narrow-hallway planar domains: unions of axis-aligned rectangles together
// with their boundary polylines and a centerline skeleton graph that the
// domain retracts onto.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ghm/types.hpp"

namespace ghm {

using Polyline = std::vector<Point>;  // closed: last vertex connects to first

struct SkeletonEdge
{
    int a = 0;
    int b = 0;
    Polyline polyline;  // open polyline from vertex a to vertex b
    int rect = 0;       // member rectangle whose centerline carries the edge

    double length() const;
};

struct SkeletonGraph
{
    std::vector<Point> vertices;
    std::vector<SkeletonEdge> edges;

    /// edges - vertices + 1 for a connected graph.
    int cycle_rank() const;
};

/// Spanning tree of the skeleton and the complementary edges, one per
/// independent loop of the domain.
struct SkeletonCycleBasis
{
    std::vector<char> in_tree;         // per skeleton edge
    std::vector<int> non_tree_edges;   // ascending edge ids
};

class HallwayDomain
{
  public:
    const std::vector<Rect>& rects() const { return rects_; }
    const SkeletonGraph& skeleton() const { return skeleton_; }
    const std::vector<Polyline>& boundary() const { return boundary_; }
    /// Disjoint decomposition of the union into grid cells.
    const std::vector<Rect>& cells() const { return cells_; }
    int outer_boundary() const { return outer_; }

    /// First Betti number: number of holes.
    int genus() const { return static_cast<int>(boundary_.size()) - 1; }
    double area() const;
    Rect bounding_box() const { return bbox_; }

    /// Closed-set membership.
    bool contains(Point p) const;

    /// Index of a member rectangle equal to `r`, if any.
    std::optional<int> rect_index(const Rect& r) const;

    /// Euclidean distance from `p` to the given boundary component.
    double distance_to_boundary(Point p, int component) const;

    /// Minimum-length spanning tree, so that the remaining edges are long
    /// corridor runs.
    SkeletonCycleBasis skeleton_cycle_basis() const;

    friend HallwayDomain build_domain(std::vector<Rect> rects);

  private:
    std::vector<Rect> rects_;
    std::vector<Rect> cells_;
    std::vector<Polyline> boundary_;
    SkeletonGraph skeleton_;
    Rect bbox_;
    int outer_ = 0;
};

/// Throws DegenerateRect, DisconnectedDomain, or UnsupportedLayout (when the
/// skeleton loop count disagrees with the hole count, e.g. three corridors
/// overlapping in one spot).
HallwayDomain build_domain(std::vector<Rect> rects);

/// `count` i.i.d. uniform points over the union; deterministic in `seed`.
std::vector<Point> sample_points(const HallwayDomain& domain, std::size_t count,
                                 std::uint64_t seed);

/// Signed area of a closed polyline (counterclockwise positive).
double signed_area(const Polyline& poly);

double polyline_length(const Polyline& poly);

/// Nearest point on a closed polyline with its arc-length parameter.
struct PolylineProjection
{
    Point point;
    double arc = 0.0;
    double distance = 0.0;
};
PolylineProjection project_to_polyline(Point p, const Polyline& poly);

/// Maps points to the skeleton and measures closed walks in skeleton cycle
/// coordinates (signed crossings of each non-tree edge midpoint).
class SkeletonProjector
{
  public:
    SkeletonProjector(const HallwayDomain& domain);

    struct Location
    {
        int edge = 0;
        double t = 0.0;  // normalized arc position along the edge, 0 at vertex a
    };

    Location locate(Point p) const;

    /// Signed crossing counts of the shortest skeleton route from `from` to
    /// `to`, one entry per non-tree edge.
    void accumulate_route(const Location& from, const Location& to,
                          std::span<long long> counts) const;

    /// Skeleton coordinates of a closed walk through the given points.
    std::vector<long long> loop_coordinates(std::span<const Point> walk) const;

    const SkeletonCycleBasis& basis() const { return basis_; }

  private:
    const HallwayDomain* domain_;
    SkeletonCycleBasis basis_;
    std::vector<int> coord_of_edge_;        // -1 for tree edges
    std::vector<double> edge_len_;
    std::vector<std::vector<double>> dist_;  // vertex-to-vertex
    std::vector<std::vector<int>> next_edge_;  // first edge on a shortest path
};

}  // namespace ghm
