#include "ghm/domain.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "ghm/errors.hpp"
#include "ghm/rng.hpp"

namespace ghm {

namespace {

struct DisjointSets
{
    std::vector<int> parent;

    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    int find(int x)
    {
        while (parent[x] != x)
        {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    bool unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

// Overlap that can carry a corridor junction: nonempty and not a single point.
bool adjacent(const Rect& a, const Rect& b, Rect& overlap)
{
    if (!intersect(a, b, overlap)) return false;
    return overlap.width() > 0.0 || overlap.height() > 0.0;
}

std::vector<double> unique_sorted(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Traces the boundary of a union of grid cells. Edges are directed with the
// interior on the left, so the outer component comes out counterclockwise.
std::vector<Polyline> trace_boundary(const std::vector<double>& xs, const std::vector<double>& ys,
                                     const std::vector<char>& inside)
{
    const int nx = static_cast<int>(xs.size()) - 1;
    const int ny = static_cast<int>(ys.size()) - 1;
    auto in = [&](int i, int j) {
        return i >= 0 && j >= 0 && i < nx && j < ny && inside[i * ny + j];
    };
    auto vid = [&](int i, int j) { return i * (ny + 1) + j; };

    // Directed unit edges keyed by start vertex; direction 0:+x 1:+y 2:-x 3:-y.
    std::multimap<int, int> out;
    for (int i = 0; i < nx; ++i)
    {
        for (int j = 0; j < ny; ++j)
        {
            if (!in(i, j)) continue;
            if (!in(i, j - 1)) out.emplace(vid(i, j), 0);
            if (!in(i + 1, j)) out.emplace(vid(i + 1, j), 1);
            if (!in(i, j + 1)) out.emplace(vid(i + 1, j + 1), 2);
            if (!in(i - 1, j)) out.emplace(vid(i, j + 1), 3);
        }
    }

    const int di[4] = {1, 0, -1, 0};
    const int dj[4] = {0, 1, 0, -1};
    std::vector<Polyline> loops;
    while (!out.empty())
    {
        auto first = out.begin();
        const int start = first->first;
        int dir = first->second;
        out.erase(first);

        std::vector<std::pair<int, int>> verts;  // (vertex id, outgoing direction)
        verts.emplace_back(start, dir);
        int v = start;
        while (true)
        {
            v = vid(v / (ny + 1) + di[dir], v % (ny + 1) + dj[dir]);
            if (v == start) break;
            // Prefer the left turn, then straight, then right.
            bool advanced = false;
            for (int turn : {1, 0, 3})
            {
                const int nd = (dir + turn) % 4;
                auto range = out.equal_range(v);
                for (auto it = range.first; it != range.second; ++it)
                {
                    if (it->second == nd)
                    {
                        out.erase(it);
                        dir = nd;
                        advanced = true;
                        break;
                    }
                }
                if (advanced) break;
            }
            if (!advanced) throw Error(Errc::InternalConsistency, "open boundary chain");
            verts.emplace_back(v, dir);
        }

        Polyline poly;
        const std::size_t m = verts.size();
        for (std::size_t k = 0; k < m; ++k)
        {
            const int prev_dir = verts[(k + m - 1) % m].second;
            if (prev_dir == verts[k].second) continue;  // collinear
            const int id = verts[k].first;
            poly.push_back({xs[id / (ny + 1)], ys[id % (ny + 1)]});
        }
        loops.push_back(std::move(poly));
    }
    return loops;
}

}  // namespace

double SkeletonEdge::length() const
{
    double len = 0.0;
    for (std::size_t k = 1; k < polyline.size(); ++k) len += dist(polyline[k - 1], polyline[k]);
    return len;
}

int SkeletonGraph::cycle_rank() const
{
    return static_cast<int>(edges.size()) - static_cast<int>(vertices.size()) + 1;
}

double signed_area(const Polyline& poly)
{
    double a = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k)
        a += cross(poly[k], poly[(k + 1) % poly.size()]);
    return 0.5 * a;
}

double polyline_length(const Polyline& poly)
{
    double len = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) len += dist(poly[k], poly[(k + 1) % poly.size()]);
    return len;
}

PolylineProjection project_to_polyline(Point p, const Polyline& poly)
{
    PolylineProjection best;
    best.distance = std::numeric_limits<double>::infinity();
    double arc = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k)
    {
        const Point a = poly[k];
        const Point b = poly[(k + 1) % poly.size()];
        const auto proj = project_to_segment(p, a, b);
        const double d = dist(p, proj.point);
        const double seg = dist(a, b);
        if (d < best.distance)
        {
            best = {proj.point, arc + proj.t * seg, d};
        }
        arc += seg;
    }
    return best;
}

double HallwayDomain::area() const
{
    double a = 0.0;
    for (const auto& c : cells_) a += c.area();
    return a;
}

bool HallwayDomain::contains(Point p) const
{
    return std::any_of(rects_.begin(), rects_.end(), [&](const Rect& r) { return r.contains(p); });
}

std::optional<int> HallwayDomain::rect_index(const Rect& r) const
{
    for (std::size_t k = 0; k < rects_.size(); ++k)
        if (rects_[k] == r) return static_cast<int>(k);
    return std::nullopt;
}

double HallwayDomain::distance_to_boundary(Point p, int component) const
{
    return project_to_polyline(p, boundary_.at(component)).distance;
}

SkeletonCycleBasis HallwayDomain::skeleton_cycle_basis() const
{
    const auto& edges = skeleton_.edges;
    std::vector<int> order(edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return edges[a].length() < edges[b].length(); });

    SkeletonCycleBasis basis;
    basis.in_tree.assign(edges.size(), 0);
    DisjointSets sets(skeleton_.vertices.size());
    for (int e : order)
        if (sets.unite(edges[e].a, edges[e].b)) basis.in_tree[e] = 1;
    for (std::size_t e = 0; e < edges.size(); ++e)
        if (!basis.in_tree[e]) basis.non_tree_edges.push_back(static_cast<int>(e));
    return basis;
}

HallwayDomain build_domain(std::vector<Rect> rects)
{
    if (rects.empty()) throw Error(Errc::DegenerateRect, "domain needs at least one rectangle");
    for (std::size_t k = 0; k < rects.size(); ++k)
    {
        if (!(rects[k].width() > 0.0) || !(rects[k].height() > 0.0))
        {
            std::ostringstream msg;
            msg << "rectangle " << k << " has nonpositive extent";
            throw Error(Errc::DegenerateRect, msg.str());
        }
    }

    HallwayDomain d;
    d.rects_ = std::move(rects);
    const auto& rs = d.rects_;
    const int m = static_cast<int>(rs.size());

    // Connectivity of the overlap graph, and the junction regions.
    DisjointSets sets(m);
    struct Junction
    {
        int i, j;
        Point centroid;
    };
    std::vector<Junction> junctions;
    for (int i = 0; i < m; ++i)
    {
        for (int j = i + 1; j < m; ++j)
        {
            Rect ov;
            if (adjacent(rs[i], rs[j], ov))
            {
                sets.unite(i, j);
                junctions.push_back({i, j, ov.center()});
            }
        }
    }
    for (int i = 1; i < m; ++i)
        if (sets.find(i) != sets.find(0))
            throw Error(Errc::DisconnectedDomain, "rectangle union is not connected");

    d.bbox_ = rs[0];
    for (const auto& r : rs)
    {
        d.bbox_.xmin = std::min(d.bbox_.xmin, r.xmin);
        d.bbox_.ymin = std::min(d.bbox_.ymin, r.ymin);
        d.bbox_.xmax = std::max(d.bbox_.xmax, r.xmax);
        d.bbox_.ymax = std::max(d.bbox_.ymax, r.ymax);
    }

    // Compressed grid: disjoint cells and boundary.
    std::vector<double> xs, ys;
    for (const auto& r : rs)
    {
        xs.push_back(r.xmin);
        xs.push_back(r.xmax);
        ys.push_back(r.ymin);
        ys.push_back(r.ymax);
    }
    xs = unique_sorted(std::move(xs));
    ys = unique_sorted(std::move(ys));
    const int nx = static_cast<int>(xs.size()) - 1;
    const int ny = static_cast<int>(ys.size()) - 1;
    std::vector<char> inside(static_cast<std::size_t>(nx) * ny, 0);
    for (int i = 0; i < nx; ++i)
    {
        for (int j = 0; j < ny; ++j)
        {
            const Point c{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
            if (d.contains(c))
            {
                inside[i * ny + j] = 1;
                d.cells_.push_back({xs[i], ys[j], xs[i + 1], ys[j + 1]});
            }
        }
    }
    d.boundary_ = trace_boundary(xs, ys, inside);
    int outer_count = 0;
    double best_area = -1.0;
    for (std::size_t k = 0; k < d.boundary_.size(); ++k)
    {
        const double a = signed_area(d.boundary_[k]);
        if (a > 0.0)
        {
            ++outer_count;
            if (a > best_area)
            {
                best_area = a;
                d.outer_ = static_cast<int>(k);
            }
        }
    }
    if (outer_count != 1)
        throw Error(Errc::UnsupportedLayout, "union boundary is not a single region with holes");

    // Skeleton: each rectangle's centerline, cut at junction centroids.
    auto& sk = d.skeleton_;
    for (const auto& jn : junctions) sk.vertices.push_back(jn.centroid);
    for (int k = 0; k < m; ++k)
    {
        const Rect& r = rs[k];
        const bool horiz = r.horizontal();
        auto param = [&](Point p) { return horiz ? std::make_pair(p.x, p.y) : std::make_pair(p.y, p.x); };

        std::vector<std::pair<std::pair<double, double>, int>> stops;
        for (std::size_t q = 0; q < junctions.size(); ++q)
            if (junctions[q].i == k || junctions[q].j == k)
                stops.push_back({param(junctions[q].centroid), static_cast<int>(q)});

        const Point c = r.center();
        const Point lo = horiz ? Point{r.xmin, c.y} : Point{c.x, r.ymin};
        const Point hi = horiz ? Point{r.xmax, c.y} : Point{c.x, r.ymax};
        std::sort(stops.begin(), stops.end());
        const bool lo_taken = !stops.empty() && stops.front().first.first <= param(lo).first;
        const bool hi_taken = !stops.empty() && stops.back().first.first >= param(hi).first;
        std::vector<int> chain;
        if (!lo_taken)
        {
            sk.vertices.push_back(lo);
            chain.push_back(static_cast<int>(sk.vertices.size()) - 1);
        }
        for (const auto& s : stops) chain.push_back(s.second);
        if (!hi_taken)
        {
            sk.vertices.push_back(hi);
            chain.push_back(static_cast<int>(sk.vertices.size()) - 1);
        }
        for (std::size_t q = 1; q < chain.size(); ++q)
        {
            SkeletonEdge e;
            e.a = chain[q - 1];
            e.b = chain[q];
            e.polyline = {sk.vertices[e.a], sk.vertices[e.b]};
            e.rect = k;
            sk.edges.push_back(std::move(e));
        }
    }
    if (sk.cycle_rank() != d.genus())
    {
        std::ostringstream msg;
        msg << "skeleton has " << sk.cycle_rank() << " loops but the domain has " << d.genus()
            << " holes; avoid three corridors overlapping in one region";
        throw Error(Errc::UnsupportedLayout, msg.str());
    }
    return d;
}

std::vector<Point> sample_points(const HallwayDomain& domain, std::size_t count, std::uint64_t seed)
{
    if (count == 0) throw Error(Errc::InvalidArgument, "sample count must be positive");
    const auto& cells = domain.cells();
    std::vector<double> cumulative(cells.size());
    double total = 0.0;
    for (std::size_t k = 0; k < cells.size(); ++k)
    {
        total += cells[k].area();
        cumulative[k] = total;
    }
    Rng rng(seed);
    std::vector<Point> pts;
    pts.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
    {
        const double pick = rng.uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
        if (it == cumulative.end()) --it;
        const Rect& c = cells[static_cast<std::size_t>(it - cumulative.begin())];
        const double x = c.xmin + rng.uniform() * c.width();
        const double y = c.ymin + rng.uniform() * c.height();
        pts.push_back({x, y});
    }
    return pts;
}

SkeletonProjector::SkeletonProjector(const HallwayDomain& domain)
    : domain_(&domain), basis_(domain.skeleton_cycle_basis())
{
    const auto& sk = domain.skeleton();
    const std::size_t nv = sk.vertices.size();
    const std::size_t ne = sk.edges.size();
    coord_of_edge_.assign(ne, -1);
    for (std::size_t k = 0; k < basis_.non_tree_edges.size(); ++k)
        coord_of_edge_[basis_.non_tree_edges[k]] = static_cast<int>(k);
    edge_len_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) edge_len_[e] = sk.edges[e].length();

    const double inf = std::numeric_limits<double>::infinity();
    dist_.assign(nv, std::vector<double>(nv, inf));
    next_edge_.assign(nv, std::vector<int>(nv, -1));
    for (std::size_t v = 0; v < nv; ++v) dist_[v][v] = 0.0;
    for (std::size_t e = 0; e < ne; ++e)
    {
        const int a = sk.edges[e].a;
        const int b = sk.edges[e].b;
        if (edge_len_[e] < dist_[a][b])
        {
            dist_[a][b] = dist_[b][a] = edge_len_[e];
            next_edge_[a][b] = next_edge_[b][a] = static_cast<int>(e);
        }
    }
    for (std::size_t k = 0; k < nv; ++k)
        for (std::size_t i = 0; i < nv; ++i)
            for (std::size_t j = 0; j < nv; ++j)
                if (dist_[i][k] + dist_[k][j] < dist_[i][j])
                {
                    dist_[i][j] = dist_[i][k] + dist_[k][j];
                    next_edge_[i][j] = next_edge_[i][k];
                }
}

SkeletonProjector::Location SkeletonProjector::locate(Point p) const
{
    const auto& edges = domain_->skeleton().edges;
    Location best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < edges.size(); ++e)
    {
        const auto& poly = edges[e].polyline;
        double arc = 0.0;
        for (std::size_t k = 1; k < poly.size(); ++k)
        {
            const auto proj = project_to_segment(p, poly[k - 1], poly[k]);
            const double seg = dist(poly[k - 1], poly[k]);
            const double d = dist2(p, proj.point);
            if (d < best_d)
            {
                best_d = d;
                best.edge = static_cast<int>(e);
                best.t = edge_len_[e] > 0.0 ? (arc + proj.t * seg) / edge_len_[e] : 0.0;
            }
            arc += seg;
        }
    }
    return best;
}

void SkeletonProjector::accumulate_route(const Location& from, const Location& to,
                                         std::span<long long> counts) const
{
    const auto& edges = domain_->skeleton().edges;
    auto partial = [&](int e, double t0, double t1) {
        const int c = coord_of_edge_[e];
        if (c < 0) return;
        counts[c] += static_cast<long long>(t1 >= 0.5) - static_cast<long long>(t0 >= 0.5);
    };

    const auto& ea = edges[from.edge];
    const auto& eb = edges[to.edge];
    double best = std::numeric_limits<double>::infinity();
    int best_x = -1, best_y = -1;
    if (from.edge == to.edge) best = std::abs(from.t - to.t) * edge_len_[from.edge];
    const int xa[2] = {ea.a, ea.b};
    const double ca[2] = {from.t * edge_len_[from.edge], (1.0 - from.t) * edge_len_[from.edge]};
    const int yb[2] = {eb.a, eb.b};
    const double cb[2] = {to.t * edge_len_[to.edge], (1.0 - to.t) * edge_len_[to.edge]};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
        {
            const double c = ca[i] + dist_[xa[i]][yb[j]] + cb[j];
            if (c < best - 1e-12)
            {
                best = c;
                best_x = i;
                best_y = j;
            }
        }

    if (best_x < 0)
    {
        partial(from.edge, from.t, to.t);
        return;
    }
    partial(from.edge, from.t, best_x == 0 ? 0.0 : 1.0);
    int v = xa[best_x];
    const int target = yb[best_y];
    while (v != target)
    {
        const int e = next_edge_[v][target];
        if (edges[e].a == v)
        {
            partial(e, 0.0, 1.0);
            v = edges[e].b;
        }
        else
        {
            partial(e, 1.0, 0.0);
            v = edges[e].a;
        }
    }
    partial(to.edge, best_y == 0 ? 0.0 : 1.0, to.t);
}

std::vector<long long> SkeletonProjector::loop_coordinates(std::span<const Point> walk) const
{
    std::vector<long long> counts(basis_.non_tree_edges.size(), 0);
    if (walk.empty()) return counts;
    std::vector<Location> locs;
    locs.reserve(walk.size());
    for (const auto& p : walk) locs.push_back(locate(p));
    for (std::size_t k = 0; k < locs.size(); ++k)
        accumulate_route(locs[k], locs[(k + 1) % locs.size()], counts);
    return counts;
}

}  // namespace ghm
