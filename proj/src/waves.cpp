#include "ghm/waves.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ghm/engine.hpp"
#include "ghm/errors.hpp"

namespace ghm {

namespace {

struct Axis
{
    Point origin;
    Point dir;  // unit
    double length = 0.0;

    double arc(Point p) const { return dot(p - origin, dir); }
};

Axis edge_axis(const HallwayDomain& domain, int edge)
{
    const auto& poly = domain.skeleton().edges.at(static_cast<std::size_t>(edge)).polyline;
    Axis ax;
    ax.origin = poly.front();
    ax.length = dist(poly.front(), poly.back());
    ax.dir = ax.length > 0 ? (1.0 / ax.length) * (poly.back() - poly.front()) : Point{1, 0};
    return ax;
}

// Per node: smallest-magnitude cyclic offset to an admissible value, applied
// one node at a time against the current neighbor values.
void repair_pass(const Network& net, State& s, const std::vector<NodeId>& nodes)
{
    for (NodeId v : nodes)
    {
        Phase best = s[v];
        int best_shift = s.n;
        for (Phase w = 0; w < s.n; ++w)
        {
            bool ok = true;
            for (NodeId y : net.neighbors(v))
                if (std::abs(cyclic_offset(w, s[y], s.n)) > 1)
                {
                    ok = false;
                    break;
                }
            const int shift = std::abs(cyclic_offset(s[v], w, s.n));
            if (ok && shift < best_shift)
            {
                best = w;
                best_shift = shift;
            }
        }
        s[v] = best;
    }
}

std::vector<NodeId> violating_nodes(const Network& net, const State& s)
{
    std::vector<NodeId> out;
    for (const auto& [a, b] : net.edges())
        if (std::abs(cyclic_offset(s[a], s[b], s.n)) > 1)
        {
            if (!net.is_clone(a)) out.push_back(a);
            if (!net.is_clone(b)) out.push_back(b);
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void copy_to_clones(const Network& net, State& s)
{
    for (std::size_t v = 0; v < net.size(); ++v)
        if (net.is_clone(static_cast<NodeId>(v))) s[static_cast<NodeId>(v)] = s[net.mirror_of()[v]];
}

double hop_of(const Network& net, double hop)
{
    if (hop < 0) throw Error(Errc::InvalidArgument, "hop must be positive");
    return hop > 0 ? hop : net.comm_radius();
}

}  // namespace

CorridorInterval free_interval(const HallwayDomain& domain, int edge, double comm_radius)
{
    const auto& sk = domain.skeleton();
    if (edge < 0 || edge >= static_cast<int>(sk.edges.size()))
        throw Error(Errc::InvalidArgument, "no skeleton edge " + std::to_string(edge));
    const Axis ax = edge_axis(domain, edge);
    const int own = sk.edges[static_cast<std::size_t>(edge)].rect;
    const Rect& R = domain.rects()[static_cast<std::size_t>(own)];

    std::vector<std::pair<double, double>> blocked;
    for (std::size_t q = 0; q < domain.rects().size(); ++q)
    {
        if (static_cast<int>(q) == own) continue;
        Rect overlap;
        if (!intersect(R, domain.rects()[q], overlap)) continue;
        double lo = 1e300, hi = -1e300;
        for (Point c : {Point{overlap.xmin, overlap.ymin}, Point{overlap.xmax, overlap.ymin},
                        Point{overlap.xmin, overlap.ymax}, Point{overlap.xmax, overlap.ymax}})
        {
            lo = std::min(lo, ax.arc(c));
            hi = std::max(hi, ax.arc(c));
        }
        blocked.emplace_back(lo - comm_radius, hi + comm_radius);
    }
    std::sort(blocked.begin(), blocked.end());

    CorridorInterval best{0, 0};
    double cursor = 0.0;
    auto offer = [&](double lo, double hi) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, ax.length);
        if (hi - lo > best.length()) best = {lo, hi};
    };
    for (const auto& [lo, hi] : blocked)
    {
        offer(cursor, lo);
        cursor = std::max(cursor, hi);
    }
    offer(cursor, ax.length);
    return best;
}

State single_wave(const Network& net, const HallwayDomain& domain, const WaveSpec& spec)
{
    if (spec.direction != 1 && spec.direction != -1) throw Error(Errc::InvalidArgument, "direction must be +1 or -1");
    if (spec.n < 3) throw Error(Errc::InvalidArgument, "alphabet size must be at least 3");
    const double h = hop_of(net, spec.hop);
    const double r = net.comm_radius();
    const CorridorInterval iv = free_interval(domain, spec.corridor_edge, r);
    const Axis ax = edge_axis(domain, spec.corridor_edge);
    const Rect& R = domain.rects()[static_cast<std::size_t>(domain.skeleton().edges[static_cast<std::size_t>(spec.corridor_edge)].rect)];

    // Profile steps 0..n along the degree sense; band = their arc range.
    const double lo = spec.direction > 0 ? spec.anchor - 0.5 * h : spec.anchor - (spec.n + 0.5) * h;
    const double hi = spec.direction > 0 ? spec.anchor + (spec.n + 0.5) * h : spec.anchor + 0.5 * h;
    if (lo < iv.lo || hi > iv.hi)
    {
        std::ostringstream msg;
        msg << "band [" << lo << ", " << hi << "] leaves the free corridor interval [" << iv.lo << ", " << iv.hi << "]";
        throw Error(Errc::InvalidArgument, msg.str());
    }

    State s = State::zeros(net.size(), spec.n);
    const double bin = 0.5 * r;
    std::vector<char> bin_hit(static_cast<std::size_t>(std::ceil((hi - lo) / bin)), 0);
    std::vector<NodeId> band;
    for (std::size_t k = 0; k < net.size(); ++k)
    {
        const auto v = static_cast<NodeId>(k);
        if (net.is_clone(v) || !R.contains(net.position(v))) continue;
        const double sarc = ax.arc(net.position(v));
        if (sarc < lo || sarc >= hi) continue;
        band.push_back(v);
        bin_hit[std::min(bin_hit.size() - 1, static_cast<std::size_t>((sarc - lo) / bin))] = 1;
        const long step_index = std::lround(spec.direction * (sarc - spec.anchor) / h);
        if (step_index >= 1 && step_index <= spec.n - 1) s[v] = static_cast<Phase>(step_index);
    }
    if (std::find(bin_hit.begin(), bin_hit.end(), 0) != bin_hit.end())
        throw Error(Errc::SparseBand, "a centerline bin of length r/2 in the band holds no node");

    auto bad = violating_nodes(net, s);
    if (!bad.empty())
    {
        repair_pass(net, s, bad);
        bad = violating_nodes(net, s);
        if (!bad.empty())
            throw Error(Errc::ContinuityRepairFailed, std::to_string(bad.size()) + " nodes still discontinuous");
    }
    copy_to_clones(net, s);

    std::vector<NodeId> front;
    for (NodeId v : band)
        if (s[v] == 0) front.push_back(v);
    if (!is_barrier(net, front, domain, R))
        throw Error(Errc::SparseBand, "the zero layers of the band do not separate the corridor walls");
    return s;
}

Network sever_defect_links(const Network& net, const State& state)
{
    const auto comp = seed_components(state, net);
    std::vector<char> removed(net.edges().size(), 0);
    bool any = false;
    for (std::size_t e = 0; e < net.edges().size(); ++e)
    {
        const auto [a, b] = net.edges()[e];
        const bool zero_one = (state[a] == 0 && state[b] == 1) || (state[a] == 1 && state[b] == 0);
        if (zero_one && comp[a] >= 0 && comp[a] == comp[b])
        {
            removed[e] = 1;
            any = true;
        }
    }
    return any ? remove_edges(net, removed) : net;
}

State realize_class(const Network& net, const HallwayDomain& domain, const H1Basis& basis,
                    const std::vector<long long>& target, int n, const RealizeOptions& options)
{
    const int g = basis.rank();
    if (static_cast<int>(target.size()) != g)
        throw Error(Errc::BasisMismatch, "target has " + std::to_string(target.size()) + " entries, basis rank is " + std::to_string(g));
    if (basis.node_count() != net.size()) throw Error(Errc::BasisMismatch, "basis belongs to a different network");
    const auto& corridors = domain.skeleton_cycle_basis().non_tree_edges;
    if (static_cast<int>(corridors.size()) != g)
        throw Error(Errc::BasisMismatch, "network rank " + std::to_string(g) + " differs from the domain's " +
                                             std::to_string(corridors.size()) + " loops");
    if (n < 3) throw Error(Errc::InvalidArgument, "alphabet size must be at least 3");
    if (std::all_of(target.begin(), target.end(), [](long long t) { return t == 0; })) return State::zeros(net.size(), n);

    const double h = hop_of(net, options.hop);
    const double r = net.comm_radius();
    const double single = (n + 1) * h;  // band of one wave
    const double pitch = n * h + r;     // keeps consecutive supports more than r apart

    auto wave_at = [&](int j, double band_lo, int direction) {
        WaveSpec spec;
        spec.corridor_edge = corridors[static_cast<std::size_t>(j)];
        spec.direction = direction;
        spec.n = n;
        spec.hop = h;
        spec.anchor = direction > 0 ? band_lo + 0.5 * h : band_lo + (n + 0.5) * h;
        return single_wave(net, domain, spec);
    };

    // Column j: class of one positive wave in corridor j.
    std::vector<CorridorInterval> iv(static_cast<std::size_t>(g));
    BigMatrix W(static_cast<std::size_t>(g), std::vector<BigInt>(static_cast<std::size_t>(g)));
    for (int j = 0; j < g; ++j)
    {
        iv[j] = free_interval(domain, corridors[j], r);
        if (iv[j].length() < single)
        {
            std::ostringstream msg;
            msg << "corridor " << corridors[j] << ": required " << single << ", available " << iv[j].length();
            throw Error(Errc::InsufficientCorridorLength, msg.str());
        }
        const State w = wave_at(j, 0.5 * (iv[j].lo + iv[j].hi) - 0.5 * single, 1);
        const auto c = cohomology_class(w, net, basis);
        for (int i = 0; i < g; ++i) W[i][j] = c[i];
    }
    const auto W_inv = unimodular_inverse(W);
    if (!W_inv) throw Error(Errc::BasisMismatch, "single-wave classes do not form a basis of the network's classes");

    State result = State::zeros(net.size(), n);
    for (int j = 0; j < g; ++j)
    {
        BigInt acc = 0;
        for (int i = 0; i < g; ++i) acc += (*W_inv)[j][i] * target[i];
        const long long count = static_cast<long long>(acc);
        if (count == 0) continue;
        const long long k = std::llabs(count);
        const double required = static_cast<double>(k - 1) * pitch + single;
        if (required > iv[j].length())
        {
            std::ostringstream msg;
            msg << "corridor " << corridors[j] << ": " << k << " waves need " << required << ", available "
                << iv[j].length();
            throw Error(Errc::InsufficientCorridorLength, msg.str());
        }
        const double start = iv[j].lo + 0.5 * (iv[j].length() - required);
        for (long long w = 0; w < k; ++w)
            result = add_states(result, wave_at(j, start + static_cast<double>(w) * pitch, count > 0 ? 1 : -1), net, &basis);
    }
    if (cohomology_class(result, net, basis) != target)
        throw Error(Errc::InternalConsistency, "realized class differs from the target");
    return result;
}

}  // namespace ghm
