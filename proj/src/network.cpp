#include "ghm/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "ghm/errors.hpp"
#include "ghm/topology.hpp"

namespace ghm {

// ---------------------------------------------------------------------------
// Network

void Network::finalize()
{
    const std::size_t n = positions_.size();
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    offsets_.assign(n + 1, 0);
    for (const auto& e : edges_)
    {
        ++offsets_[e[0] + 1];
        ++offsets_[e[1] + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    neighbors_.assign(offsets_.back(), kNoNode);
    neighbor_edge_.assign(offsets_.back(), -1);
    std::vector<std::int32_t> fill(offsets_.begin(), offsets_.end() - 1);
    // Edges are lexicographic, so every list comes out sorted: lower
    // neighbors arrive (ascending) before higher ones (ascending).
    for (std::size_t k = 0; k < edges_.size(); ++k)
    {
        const auto [i, j] = edges_[k];
        neighbors_[fill[j]] = i;
        neighbor_edge_[fill[j]++] = static_cast<std::int32_t>(k);
    }
    for (std::size_t k = 0; k < edges_.size(); ++k)
    {
        const auto [i, j] = edges_[k];
        neighbors_[fill[i]] = j;
        neighbor_edge_[fill[i]++] = static_cast<std::int32_t>(k);
    }

    // 3-cliques: for each edge (i, j) the common neighbors k > j.
    triangles_.clear();
    for (const auto& [i, j] : edges_)
    {
        auto ni = neighbors(i);
        auto nj = neighbors(j);
        auto a = std::upper_bound(ni.begin(), ni.end(), j);
        auto b = std::upper_bound(nj.begin(), nj.end(), j);
        while (a != ni.end() && b != nj.end())
        {
            if (*a < *b)
                ++a;
            else if (*b < *a)
                ++b;
            else
            {
                triangles_.push_back({i, j, *a});
                ++a;
                ++b;
            }
        }
    }
    if (!mirror_of_.empty() && mirror_of_.size() != n)
        throw Error(Errc::InvalidArgument, "mirror map size differs from node count");
}

bool Network::adjacent(NodeId a, NodeId b) const { return edge_index(a, b) >= 0; }

std::int32_t Network::edge_index(NodeId a, NodeId b) const
{
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= size() ||
        static_cast<std::size_t>(b) >= size())
        return -1;
    auto nb = neighbors(a);
    auto it = std::lower_bound(nb.begin(), nb.end(), b);
    if (it == nb.end() || *it != b) return -1;
    return incident_edges(a)[it - nb.begin()];
}

bool Network::connected() const
{
    if (size() <= 1) return true;
    std::vector<char> seen(size(), 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty())
    {
        const NodeId v = stack.back();
        stack.pop_back();
        for (NodeId w : neighbors(v))
            if (!seen[w])
            {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
    }
    return count == size();
}

Network Network::from_edges(std::vector<Point> positions, double comm_radius,
                            double coverage_radius, std::vector<Edge> edges,
                            std::vector<NodeId> mirror_of)
{
    Network net;
    net.positions_ = std::move(positions);
    net.comm_radius_ = comm_radius;
    net.coverage_radius_ = coverage_radius;
    for (auto& e : edges)
    {
        if (e[0] == e[1] || e[0] < 0 || e[1] < 0 ||
            static_cast<std::size_t>(std::max(e[0], e[1])) >= net.positions_.size())
            throw Error(Errc::InvalidArgument, "edge endpoint out of range or self-loop");
        if (e[0] > e[1]) std::swap(e[0], e[1]);
    }
    net.edges_ = std::move(edges);
    net.mirror_of_ = std::move(mirror_of);
    net.finalize();
    return net;
}

Network build_network(std::span<const Point> points, double comm_radius, double coverage_radius)
{
    if (!(comm_radius > 0.0) || !(coverage_radius > 0.0))
        throw Error(Errc::InvalidArgument, "radii must be positive");
    if (points.empty()) throw Error(Errc::InvalidArgument, "network needs at least one point");

    Network net;
    net.positions_.assign(points.begin(), points.end());
    net.comm_radius_ = comm_radius;
    net.coverage_radius_ = coverage_radius;

    double xmin = points[0].x, xmax = xmin, ymin = points[0].y, ymax = ymin;
    for (const auto& p : points)
    {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    // Cells at least r wide, so neighbors live in the 3x3 block; coarsened
    // when the box is sparse to keep the cell array proportional to |X|.
    double cell = comm_radius;
    const double span = std::max(xmax - xmin, ymax - ymin);
    const double cap = 4.0 * static_cast<double>(points.size()) + 16.0;
    if ((span / cell) * (span / cell) > cap) cell = std::max(cell, span / std::sqrt(cap));
    const auto nx = static_cast<std::int64_t>((xmax - xmin) / cell) + 1;
    const auto ny = static_cast<std::int64_t>((ymax - ymin) / cell) + 1;
    auto cell_of = [&](Point p) {
        const auto cx = std::min<std::int64_t>(static_cast<std::int64_t>((p.x - xmin) / cell), nx - 1);
        const auto cy = std::min<std::int64_t>(static_cast<std::int64_t>((p.y - ymin) / cell), ny - 1);
        return std::pair{cx, cy};
    };

    std::vector<std::int64_t> start(static_cast<std::size_t>(nx * ny) + 1, 0);
    std::vector<NodeId> order(points.size());
    for (const auto& p : points)
    {
        const auto [cx, cy] = cell_of(p);
        ++start[cy * nx + cx + 1];
    }
    std::partial_sum(start.begin(), start.end(), start.begin());
    {
        std::vector<std::int64_t> fill(start.begin(), start.end() - 1);
        for (std::size_t i = 0; i < points.size(); ++i)
        {
            const auto [cx, cy] = cell_of(points[i]);
            order[fill[cy * nx + cx]++] = static_cast<NodeId>(i);
        }
    }

    const double r2 = comm_radius * comm_radius;
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        const auto [cx, cy] = cell_of(points[i]);
        for (std::int64_t y = std::max<std::int64_t>(cy - 1, 0); y <= std::min(cy + 1, ny - 1); ++y)
            for (std::int64_t x = std::max<std::int64_t>(cx - 1, 0); x <= std::min(cx + 1, nx - 1); ++x)
            {
                const std::int64_t c = y * nx + x;
                for (std::int64_t k = start[c]; k < start[c + 1]; ++k)
                {
                    const NodeId j = order[k];
                    if (static_cast<std::size_t>(j) <= i) continue;
                    if (dist2(points[i], points[j]) <= r2)
                        net.edges_.push_back({static_cast<NodeId>(i), j});
                }
            }
    }
    net.finalize();
    return net;
}

Network remove_edges(const Network& net, const std::vector<char>& removed)
{
    if (removed.size() != net.edges().size())
        throw Error(Errc::InvalidArgument, "edge mask size differs from edge count");
    std::vector<Edge> kept;
    kept.reserve(net.edges().size());
    for (std::size_t k = 0; k < removed.size(); ++k)
        if (!removed[k]) kept.push_back(net.edges()[k]);
    return Network::from_edges(net.positions(), net.comm_radius(), net.coverage_radius(),
                               std::move(kept), net.mirror_of());
}

// ---------------------------------------------------------------------------
// Rasterization

RasterGrid::RasterGrid(const HallwayDomain& domain, double res) : box(domain.bounding_box()), resolution(res)
{
    if (!(res > 0.0)) throw Error(Errc::InvalidArgument, "resolution must be positive");
    nx = std::max(1, static_cast<int>(std::ceil(box.width() / res - 1e-9)));
    ny = std::max(1, static_cast<int>(std::ceil(box.height() / res - 1e-9)));
}

namespace {

// Cell index range whose centers may fall inside [lo, hi] along one axis.
std::pair<int, int> cell_range(double lo, double hi, double origin, double res, int count)
{
    const int a = std::max(0, static_cast<int>(std::floor((lo - origin) / res - 0.5)));
    const int b = std::min(count - 1, static_cast<int>(std::ceil((hi - origin) / res - 0.5)));
    return {a, b};
}

bool in_triangle(Point p, Point a, Point b, Point c)
{
    const double d1 = cross(b - a, p - a);
    const double d2 = cross(c - b, p - b);
    const double d3 = cross(a - c, p - c);
    const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
    const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(neg && pos);
}

bool on_segment(Point p, Point a, Point b)
{
    if (cross(b - a, p - a) != 0.0) return false;
    return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
           p.y <= std::max(a.y, b.y);
}

}  // namespace

CoverageReport shadow_covers(const Network& net, const HallwayDomain& domain, double resolution,
                             ShadowMode mode, std::optional<std::span<const NodeId>> nodes)
{
    const RasterGrid grid(domain, resolution);
    std::vector<char> inside(grid.cell_count(), 0);
    std::vector<char> covered(grid.cell_count(), 0);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            inside[grid.index(i, j)] = domain.contains(grid.center(i, j)) ? 1 : 0;

    auto visit = [&](double x0, double y0, double x1, double y1, auto&& test) {
        const auto [i0, i1] = cell_range(x0, x1, grid.box.xmin, resolution, grid.nx);
        const auto [j0, j1] = cell_range(y0, y1, grid.box.ymin, resolution, grid.ny);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
            {
                const auto idx = grid.index(i, j);
                if (inside[idx] && !covered[idx] && test(grid.center(i, j))) covered[idx] = 1;
            }
    };

    if (mode == ShadowMode::Simplices)
    {
        const auto& pos = net.positions();
        for (const auto& p : pos) visit(p.x, p.y, p.x, p.y, [&](Point c) { return c == p; });
        for (const auto& [a, b] : net.edges())
        {
            const Point pa = pos[a], pb = pos[b];
            visit(std::min(pa.x, pb.x), std::min(pa.y, pb.y), std::max(pa.x, pb.x),
                  std::max(pa.y, pb.y), [&](Point c) { return on_segment(c, pa, pb); });
        }
        for (const auto& [a, b, c] : net.triangles())
        {
            const Point pa = pos[a], pb = pos[b], pc = pos[c];
            visit(std::min({pa.x, pb.x, pc.x}), std::min({pa.y, pb.y, pc.y}),
                  std::max({pa.x, pb.x, pc.x}), std::max({pa.y, pb.y, pc.y}),
                  [&](Point q) { return in_triangle(q, pa, pb, pc); });
        }
    }
    else
    {
        const double eps = net.coverage_radius();
        const double eps2 = eps * eps;
        auto disk = [&](NodeId v) {
            const Point c = net.coverage_center(v);
            visit(c.x - eps, c.y - eps, c.x + eps, c.y + eps,
                  [&](Point q) { return dist2(q, c) <= eps2; });
        };
        if (nodes)
            for (NodeId v : *nodes) disk(v);
        else
            for (std::size_t v = 0; v < net.size(); ++v) disk(static_cast<NodeId>(v));
    }

    CoverageReport report;
    report.resolution = resolution;
    std::size_t covered_count = 0;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
        {
            const auto idx = grid.index(i, j);
            if (!inside[idx]) continue;
            ++report.domain_cells;
            if (covered[idx])
                ++covered_count;
            else
                report.uncovered_cells.push_back({i, j});
        }
    report.covered_fraction = report.domain_cells == 0
                                  ? 1.0
                                  : static_cast<double>(covered_count) / static_cast<double>(report.domain_cells);
    if (report.uncovered_cells.empty()) report.covered_fraction = 1.0;
    return report;
}

// ---------------------------------------------------------------------------
// Local holes

LocalHoleReport local_hole_check(const Network& net, const HallwayDomain& domain)
{
    if (!net.connected()) throw Error(Errc::DisconnectedNetwork, "local hole check needs a connected network");
    LocalHoleReport report;
    report.domain_h1_rank = domain.genus();
    const H1Basis basis = homology_basis(net);
    report.rips_h1_rank = basis.rank();

    const SkeletonProjector projector(domain);
    const std::size_t g = projector.basis().non_tree_edges.size();
    std::vector<std::optional<SkeletonProjector::Location>> loc(net.size());
    auto locate = [&](NodeId v) -> const SkeletonProjector::Location& {
        if (!loc[v]) loc[v] = projector.locate(net.position(v));
        return *loc[v];
    };
    for (const auto& cycle : basis.cycles())
    {
        std::vector<long long> total(g, 0);
        std::vector<long long> step(g, 0);
        for (const auto& [edge, c] : cycle.terms())
        {
            std::fill(step.begin(), step.end(), 0);
            projector.accumulate_route(locate(edge[0]), locate(edge[1]), step);
            for (std::size_t k = 0; k < g; ++k) total[k] += c * step[k];
        }
        report.projection.push_back(std::move(total));
    }

    if (report.rips_h1_rank != report.domain_h1_rank)
        report.has_local_hole = true;
    else if (report.rips_h1_rank > 0)
    {
        BigMatrix p;
        for (const auto& row : report.projection)
        {
            p.emplace_back();
            for (long long x : row) p.back().emplace_back(x);
        }
        report.has_local_hole = !unimodular_inverse(p).has_value();
    }
    return report;
}

// ---------------------------------------------------------------------------
// Boundary paths

namespace {

// Parameter interval of segment [a, b] inside the closed disk (center, rad).
std::optional<std::pair<double, double>> disk_segment_interval(Point center, double rad, Point a, Point b)
{
    const Point d = b - a;
    const Point f = a - center;
    const double A = dot(d, d);
    if (A == 0.0)
    {
        if (dist2(a, center) <= rad * rad) return std::pair{0.0, 1.0};
        return std::nullopt;
    }
    const double B = 2.0 * dot(f, d);
    const double C = dot(f, f) - rad * rad;
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) return std::nullopt;
    const double s = std::sqrt(disc);
    const double t0 = std::max(0.0, (-B - s) / (2.0 * A));
    const double t1 = std::min(1.0, (-B + s) / (2.0 * A));
    if (t0 > t1) return std::nullopt;
    return std::pair{t0, t1};
}

// A point of disk(p) ∩ disk(q) ∩ polyline, preferring a polyline corner.
std::optional<Point> pair_boundary_point(Point p, Point q, double rad, const Polyline& poly)
{
    const double r2 = rad * rad;
    for (const auto& v : poly)
        if (dist2(v, p) <= r2 && dist2(v, q) <= r2) return v;
    for (std::size_t k = 0; k < poly.size(); ++k)
    {
        const Point a = poly[k];
        const Point b = poly[(k + 1) % poly.size()];
        const auto ip = disk_segment_interval(p, rad, a, b);
        if (!ip) continue;
        const auto iq = disk_segment_interval(q, rad, a, b);
        if (!iq) continue;
        const double lo = std::max(ip->first, iq->first);
        const double hi = std::min(ip->second, iq->second);
        if (lo <= hi) return a + (0.5 * (lo + hi)) * (b - a);
    }
    return std::nullopt;
}

std::vector<Point> sample_polyline(const Polyline& poly, double step)
{
    std::vector<Point> out;
    for (std::size_t k = 0; k < poly.size(); ++k)
    {
        const Point a = poly[k];
        const Point b = poly[(k + 1) % poly.size()];
        const int pieces = std::max(1, static_cast<int>(std::ceil(dist(a, b) / step)));
        for (int s = 0; s < pieces; ++s) out.push_back(a + (static_cast<double>(s) / pieces) * (b - a));
    }
    return out;
}

}  // namespace

bool path_spans_component(const Network& net, const HallwayDomain& domain, const BoundaryPath& path)
{
    if (path.node_ids.empty()) return false;
    const double eps = net.coverage_radius();
    const double eps2 = eps * eps;
    const auto& poly = domain.boundary().at(path.boundary_component);
    // Bucket path disks on a grid of cell size eps.
    std::vector<Point> centers;
    for (NodeId v : path.node_ids) centers.push_back(net.coverage_center(v));
    std::sort(centers.begin(), centers.end(), [](Point a, Point b) { return a.x < b.x; });
    for (const Point s : sample_polyline(poly, eps / 4.0))
    {
        auto it = std::lower_bound(centers.begin(), centers.end(), s.x - eps,
                                   [](Point c, double x) { return c.x < x; });
        bool hit = false;
        for (; it != centers.end() && it->x <= s.x + eps; ++it)
            if (dist2(*it, s) <= eps2)
            {
                hit = true;
                break;
            }
        if (!hit) return false;
    }
    return true;
}

bool valid_boundary_path(const Network& net, const HallwayDomain& domain, const BoundaryPath& path)
{
    if (path.boundary_component < 0 ||
        static_cast<std::size_t>(path.boundary_component) >= domain.boundary().size())
        return false;
    const auto& poly = domain.boundary()[path.boundary_component];
    const double eps = net.coverage_radius();
    std::vector<NodeId> sorted = path.node_ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
    for (std::size_t k = 0; k < path.node_ids.size(); ++k)
    {
        const NodeId v = path.node_ids[k];
        if (v < 0 || static_cast<std::size_t>(v) >= net.size()) return false;
        if (project_to_polyline(net.coverage_center(v), poly).distance > eps) return false;
        if (k == 0) continue;
        const NodeId u = path.node_ids[k - 1];
        if (!net.adjacent(u, v)) return false;
        if (!pair_boundary_point(net.coverage_center(u), net.coverage_center(v), eps, poly)) return false;
    }
    return true;
}

std::vector<std::optional<BoundaryPath>> extract_boundary_paths(const Network& net, const HallwayDomain& domain)
{
    const double eps = net.coverage_radius();
    std::vector<std::optional<BoundaryPath>> out;
    for (std::size_t comp = 0; comp < domain.boundary().size(); ++comp)
    {
        const auto& poly = domain.boundary()[comp];
        std::vector<std::pair<double, NodeId>> candidates;
        for (std::size_t v = 0; v < net.size(); ++v)
        {
            if (net.is_clone(static_cast<NodeId>(v))) continue;
            const auto proj = project_to_polyline(net.position(static_cast<NodeId>(v)), poly);
            if (proj.distance <= eps) candidates.emplace_back(proj.arc, static_cast<NodeId>(v));
        }
        std::sort(candidates.begin(), candidates.end());

        BoundaryPath path;
        path.boundary_component = static_cast<int>(comp);
        for (const auto& [arc, v] : candidates)
        {
            if (path.node_ids.empty())
            {
                path.node_ids.push_back(v);
                continue;
            }
            const NodeId last = path.node_ids.back();
            if (!net.adjacent(last, v)) continue;
            if (!pair_boundary_point(net.position(last), net.position(v), eps, poly)) continue;
            path.node_ids.push_back(v);
        }
        if (path_spans_component(net, domain, path))
            out.emplace_back(std::move(path));
        else
            out.emplace_back(std::nullopt);
    }
    return out;
}

Augmentation augment_boundary_sensors(const Network& net, const HallwayDomain& domain,
                                      std::optional<std::span<const Phase>> state_source)
{
    const auto paths = extract_boundary_paths(net, domain);
    for (std::size_t c = 0; c < paths.size(); ++c)
        if (!paths[c])
            throw Error(Errc::NoBoundaryPath, "boundary component " + std::to_string(c) + " has no spanning path");
    if (state_source && state_source->size() != net.size())
        throw Error(Errc::InvalidArgument, "state size differs from node count");

    const double eps = net.coverage_radius();
    std::vector<Point> positions = net.positions();
    std::vector<NodeId> mirror = net.mirror_of();
    if (mirror.empty()) mirror.assign(net.size(), -1);
    Augmentation out;
    auto add_clone = [&](Point where, NodeId original) {
        positions.push_back(where);
        mirror.push_back(net.coverage_owner(original));
        out.clone_of.push_back(net.coverage_owner(original));
    };

    for (const auto& path : paths)
    {
        const auto& poly = domain.boundary()[path->boundary_component];
        const auto& ids = path->node_ids;
        for (std::size_t k = 0; k < ids.size(); ++k)
        {
            const auto proj = project_to_polyline(net.position(ids[k]), poly);
            add_clone(proj.point, ids[k]);
            if (k + 1 < ids.size())
            {
                const auto z = pair_boundary_point(net.position(ids[k]), net.position(ids[k + 1]), eps, poly);
                if (!z) throw Error(Errc::InternalConsistency, "boundary path edge lost its boundary contact");
                add_clone(*z, ids[k]);
            }
        }
    }

    // Original pairs keep the input edge set (which may have severed links);
    // clones join by the metric rule.
    const Network grown = build_network(positions, net.comm_radius(), eps);
    std::vector<Edge> edges = net.edges();
    for (const auto& e : grown.edges())
        if (static_cast<std::size_t>(e[1]) >= net.size()) edges.push_back(e);
    out.network = Network::from_edges(std::move(positions), net.comm_radius(), eps, std::move(edges),
                                      std::move(mirror));
    if (state_source)
    {
        std::vector<Phase> values(state_source->begin(), state_source->end());
        for (NodeId orig : out.clone_of) values.push_back((*state_source)[orig]);
        out.state = std::move(values);
    }
    return out;
}

}  // namespace ghm
