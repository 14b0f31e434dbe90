#pragma once

// Fixtures shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

#include "ghm/domain.hpp"
#include "ghm/engine.hpp"
#include "ghm/network.hpp"
#include "ghm/rng.hpp"
#include "ghm/snf.hpp"
#include "ghm/state.hpp"
#include "ghm/topology.hpp"

namespace ghm::testing {

/// Square frame: outer side `side`, corridor width `w`; one hole.
inline std::vector<Rect> annulus_rects(double side, double w)
{
    return {{0, 0, side, w}, {0, side - w, side, side}, {0, 0, w, side}, {side - w, 0, side, side}};
}

/// Frame `len` x `height` with a middle bar; two holes.
inline std::vector<Rect> figure_eight_rects(double len, double height, double w)
{
    const double mid = 0.5 * (len - w);
    return {{0, 0, len, w},          {0, height - w, len, height}, {0, 0, w, height},
            {mid, 0, mid + w, height}, {len - w, 0, len, height}};
}

/// Cycle graph C_k with nodes on a circle; adjacency from the edge list only.
inline Network cycle_graph(int k, double radius = 10.0)
{
    std::vector<Point> pts;
    std::vector<Edge> edges;
    for (int i = 0; i < k; ++i)
    {
        const double a = 6.283185307179586 * i / k;
        pts.push_back({radius * std::cos(a), radius * std::sin(a)});
        edges.push_back({i, (i + 1) % k});
    }
    return Network::from_edges(pts, 1.0, 1.0, edges);
}

/// Random connected graph on `k` nodes: a random tree plus extra edges.
inline Network random_graph(int k, int extra, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<Point> pts;
    std::vector<Edge> edges;
    for (int i = 0; i < k; ++i)
    {
        pts.push_back({rng.uniform(), rng.uniform()});
        if (i > 0) edges.push_back({static_cast<NodeId>(rng.below(i)), i});
    }
    for (int e = 0; e < extra; ++e)
    {
        const auto a = static_cast<NodeId>(rng.below(k));
        const auto b = static_cast<NodeId>(rng.below(k));
        if (a != b) edges.push_back({std::min(a, b), std::max(a, b)});
    }
    return Network::from_edges(pts, 1.0, 1.0, edges);
}

inline State random_state(std::size_t count, int n, std::uint64_t seed)
{
    Rng rng(seed);
    State s = State::zeros(count, n);
    for (auto& v : s.values) v = static_cast<Phase>(rng.below(n));
    return s;
}

/// Random geometric network on the unit square, retried until connected.
inline Network random_geometric(int k, double r, std::uint64_t seed)
{
    const auto dom = build_domain({{0, 0, 1, 1}});
    for (std::uint64_t attempt = 0;; ++attempt)
    {
        auto net = build_network(sample_points(dom, k, derive_key(seed, attempt)), r, r);
        if (net.connected()) return net;
    }
}

namespace detail {

// Values w with cyclic offset in {-1, 0, 1} to every assigned neighbor.
inline std::vector<Phase> admissible(const Network& net, const State& s, const std::vector<char>& assigned, NodeId v)
{
    std::vector<Phase> out;
    for (Phase w = 0; w < s.n; ++w)
    {
        bool ok = true;
        for (NodeId y : net.neighbors(v))
            if (assigned[y] && std::abs(cyclic_offset(w, s[y], s.n)) > 1)
            {
                ok = false;
                break;
            }
        if (ok) out.push_back(w);
    }
    return out;
}

}  // namespace detail

/// Random continuous state. Starts from a ramp of random degree on a random
/// fundamental loop of the Rips complex (when one fits), extends it greedily,
/// then randomizes with continuity-preserving single-node resampling.
inline State random_continuous_state(const Network& net, int n, std::uint64_t seed, int sweeps = 4)
{
    Rng rng(seed);
    const std::size_t count = net.size();
    State s = State::zeros(count, n);
    std::vector<char> assigned(count, 0);

    bool seeded = false;
    if (count > 2 && rng.below(4) != 0)
    {
        const H1Basis basis = homology_basis(net);
        if (basis.rank() > 0 && !basis.loops().empty())
        {
            const auto& loop = basis.loops()[rng.below(basis.loops().size())];
            const long long max_deg = static_cast<long long>(loop.size()) / n;
            if (max_deg >= 1)
            {
                long long d = 1 + static_cast<long long>(rng.below(static_cast<std::uint64_t>(max_deg)));
                if (rng.below(2)) d = -d;
                const auto phase = static_cast<long long>(rng.below(n));
                const auto L = static_cast<long long>(loop.size());
                for (long long i = 0; i < L; ++i)
                {
                    long long val = (phase + (i * n * d) / L) % n;
                    if (val < 0) val += n;
                    s[loop[i]] = static_cast<Phase>(val);
                    assigned[loop[i]] = 1;
                }
                seeded = static_cast<bool>(is_continuous(net, s, std::span<const NodeId>(loop)));
                if (seeded)
                {
                    // BFS extension from the loop
                    std::queue<NodeId> q;
                    for (NodeId v : loop) q.push(v);
                    while (!q.empty() && seeded)
                    {
                        const NodeId v = q.front();
                        q.pop();
                        for (NodeId w : net.neighbors(v))
                        {
                            if (assigned[w]) continue;
                            const auto opts = detail::admissible(net, s, assigned, w);
                            if (opts.empty())
                            {
                                seeded = false;
                                break;
                            }
                            s[w] = opts[rng.below(opts.size())];
                            assigned[w] = 1;
                            q.push(w);
                        }
                    }
                }
            }
        }
    }
    if (!seeded)
    {
        s = State::zeros(count, n);
        const auto base = static_cast<Phase>(rng.below(n));
        for (auto& v : s.values) v = base;
    }
    std::fill(assigned.begin(), assigned.end(), 1);
    for (int sweep = 0; sweep < sweeps; ++sweep)
        for (std::size_t k = 0; k < count; ++k)
        {
            const auto v = static_cast<NodeId>(rng.below(count));
            const auto opts = detail::admissible(net, s, assigned, v);
            if (!opts.empty()) s[v] = opts[rng.below(opts.size())];
        }
    return s;
}

/// Brute-force integer homology of the flag 2-complex from the full boundary
/// matrices: rank H1, torsion flag, and a null-homology test.
struct BruteHomology
{
    int h1 = 0;
    bool torsion = false;
    SmithForm d2;
    std::vector<Edge> edges;

    explicit BruteHomology(const Network& net) : edges(net.edges())
    {
        const std::size_t E = net.edges().size(), T = net.triangles().size(), V = net.size();
        BigMatrix d1(V, std::vector<BigInt>(E));
        for (std::size_t e = 0; e < E; ++e)
        {
            d1[net.edges()[e][0]][e] = -1;
            d1[net.edges()[e][1]][e] = 1;
        }
        BigMatrix b2(E, std::vector<BigInt>(T));
        for (std::size_t t = 0; t < T; ++t)
        {
            const auto [a, b, c] = net.triangles()[t];
            b2[net.edge_index(a, b)][t] = 1;
            b2[net.edge_index(b, c)][t] = 1;
            b2[net.edge_index(a, c)][t] = -1;
        }
        const int r1 = E && V ? smith_normal_form(d1, false).rank : 0;
        if (T > 0)
            d2 = smith_normal_form(b2, true);
        else
        {
            d2.rank = 0;
            d2.U = identity_matrix(E);
        }
        h1 = static_cast<int>(E) - r1 - d2.rank;
        for (const auto& d : d2.divisors)
            if (d != 1) torsion = true;
    }

    bool null_homologous(const Chain1& z) const
    {
        std::vector<BigInt> v(edges.size());
        for (const auto& [e, c] : z.terms())
            v[std::lower_bound(edges.begin(), edges.end(), e) - edges.begin()] = c;
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            BigInt acc = 0;
            for (std::size_t k = 0; k < v.size(); ++k)
                if (!v[k].is_zero()) acc += d2.U[i][k] * v[k];
            if (i < static_cast<std::size_t>(d2.rank) ? acc % d2.divisors[i] != 0 : !acc.is_zero()) return false;
        }
        return true;
    }
};

/// Seed loop planted on the nodes nearest to `count` points of a circle:
/// consecutive picks must be distinct and adjacent. Values 0..n-1 repeat
/// around the loop (count must be a multiple of n). Returns the loop, or an
/// empty vector when the network is too sparse there.
inline std::vector<NodeId> plant_seed(const Network& net, State& s, Point center, double radius, int count)
{
    std::vector<NodeId> loop;
    for (int k = 0; k < count; ++k)
    {
        const double a = 6.283185307179586 * k / count;
        const Point target{center.x + radius * std::cos(a), center.y + radius * std::sin(a)};
        NodeId best = kNoNode;
        double best_d = 1e300;
        for (std::size_t v = 0; v < net.size(); ++v)
        {
            const double d = dist2(net.position(static_cast<NodeId>(v)), target);
            if (d < best_d)
            {
                best_d = d;
                best = static_cast<NodeId>(v);
            }
        }
        loop.push_back(best);
    }
    for (std::size_t k = 0; k < loop.size(); ++k)
    {
        const NodeId a = loop[k], b = loop[(k + 1) % loop.size()];
        if (a == b || !net.adjacent(a, b)) return {};
        for (std::size_t j = k + 1; j < loop.size(); ++j)
            if (loop[j] == a) return {};
    }
    for (std::size_t k = 0; k < loop.size(); ++k) s[loop[k]] = static_cast<Phase>(k % s.n);
    return loop;
}

/// Runs until the all-zero state or `limit` ticks; returns whether it died.
inline bool dies_within(const Network& net, State s, Tick limit)
{
    for (Tick t = 0; t <= limit; ++t)
    {
        if (std::all_of(s.values.begin(), s.values.end(), [](Phase v) { return v == 0; })) return true;
        s = step(net, s);
    }
    return false;
}

/// Network on a hallway domain whose Rips complex has no local hole, with
/// the skeleton crossings of each basis loop (rows) over each loop corridor.
struct ProgrammableNetwork
{
    HallwayDomain domain;
    Network net;
    H1Basis basis;
    std::vector<std::vector<long long>> crossings;
};

/// Resamples (up to 50 times) until the network is connected and its H1
/// rank equals the domain genus. `density` is the mean count per r-disk.
inline ProgrammableNetwork programmable_network(std::vector<Rect> rects, double density, std::uint64_t seed,
                                                double r = 1.0)
{
    ProgrammableNetwork f{build_domain(std::move(rects)), Network{}, H1Basis{}, {}};
    const auto count = static_cast<std::size_t>(density * f.domain.area() / (3.141592653589793 * r * r));
    for (std::uint64_t attempt = 0;; ++attempt)
    {
        if (attempt == 50) throw std::runtime_error("no sample without local holes");
        f.net = build_network(sample_points(f.domain, count, derive_key(seed, attempt)), r, r);
        if (!f.net.connected()) continue;
        f.basis = homology_basis(f.net);
        if (f.basis.rank() == f.domain.genus()) break;
    }
    const SkeletonProjector proj(f.domain);
    for (const auto& loop : f.basis.loops())
    {
        std::vector<Point> walk;
        for (NodeId v : loop) walk.push_back(f.net.position(v));
        f.crossings.push_back(proj.loop_coordinates(walk));
    }
    return f;
}

}  // namespace ghm::testing
