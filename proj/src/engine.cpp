#include "ghm/engine.hpp"

#include <algorithm>
#include <numeric>

#include "ghm/errors.hpp"
#include "ghm/rng.hpp"
#include "ghm/topology.hpp"

namespace ghm {

void validate_state(const State& s, std::size_t expected_size)
{
    if (s.n < 3) throw Error(Errc::InvalidArgument, "alphabet size must be at least 3");
    if (s.size() != expected_size)
        throw Error(Errc::InvalidArgument,
                    "state has " + std::to_string(s.size()) + " values, expected " + std::to_string(expected_size));
    for (std::size_t v = 0; v < s.size(); ++v)
        if (s[v] < 0 || s[v] >= s.n)
            throw Error(Errc::InvalidArgument, "value " + std::to_string(s[v]) + " at node " + std::to_string(v) +
                                                   " outside [0, n)");
}

State step(const Network& net, const State& state, const std::vector<char>* mask)
{
    if (mask && mask->size() != net.edges().size())
        throw Error(Errc::InvalidArgument, "link mask does not cover every edge");
    const int n = state.n;
    State next(std::vector<Phase>(state.size()), n, state.tick + 1);
    for (std::size_t v = 0; v < state.size(); ++v)
    {
        const Phase u = state[v];
        if (u != 0)
        {
            next[v] = u + 1 == n ? 0 : u + 1;
            continue;
        }
        Phase out = 0;
        auto nb = net.neighbors(static_cast<NodeId>(v));
        auto ids = net.incident_edges(static_cast<NodeId>(v));
        for (std::size_t k = 0; k < nb.size(); ++k)
        {
            if (state[nb[k]] != 1 || net.is_clone(nb[k])) continue;
            if (mask && !(*mask)[ids[k]]) continue;
            out = 1;
            break;
        }
        next[v] = out;
    }
    if (!net.mirror_of().empty())
        for (std::size_t v = 0; v < state.size(); ++v)
            if (net.mirror_of()[v] >= 0) next[v] = next[net.mirror_of()[v]];
    return next;
}

std::vector<char> link_mask(const Network& net, const LinkFailure& failure, Tick tick)
{
    const std::uint64_t key = derive_key(failure.seed, failure.per_lifetime ? 0 : static_cast<std::uint64_t>(tick));
    std::vector<char> mask(net.edges().size());
    for (std::size_t e = 0; e < mask.size(); ++e)
        mask[e] = to_unit(counter_hash(key, e)) < failure.p_success ? 1 : 0;
    return mask;
}

ContinuityCheck is_continuous(const Network& net, const State& state, std::optional<std::span<const NodeId>> subset)
{
    ContinuityCheck out;
    std::vector<char> in;
    if (subset)
    {
        in.assign(net.size(), 0);
        for (NodeId v : *subset) in[v] = 1;
    }
    for (const auto& e : net.edges())
    {
        if (subset && !(in[e[0]] && in[e[1]])) continue;
        const int d = cyclic_offset(state[e[0]], state[e[1]], state.n);
        if (d < -1 || d > 1)
        {
            out.continuous = false;
            out.violation = e;
            return out;
        }
    }
    return out;
}

bool is_subordinate(const Network& net, const State& state, NodeId x, NodeId y)
{
    if (!net.adjacent(x, y))
        throw Error(Errc::NotNeighbors, std::to_string(x) + " and " + std::to_string(y) + " are not neighbors");
    return state[y] == (state[x] + 1) % state.n;
}

// ---------------------------------------------------------------------------
// Runs

bool RunTrace::complete() const
{
    return !snapshots.empty() && snapshots.front().tick == initial.tick && snapshots.back().tick == final_state.tick;
}

const State& RunTrace::at(Tick t) const
{
    if (snapshots.empty() || t < snapshots.front().tick || t > snapshots.back().tick)
        throw Error(Errc::InsufficientTrace, "tick " + std::to_string(t) + " not retained");
    return snapshots[static_cast<std::size_t>(t - snapshots.front().tick)];
}

RunTrace run(const Network& net, const State& initial, const RunOptions& options)
{
    validate_state(initial, net.size());
    if (options.ticks < 0) throw Error(Errc::InvalidArgument, "tick count must be non-negative");
    RunTrace trace;
    trace.initial = initial;
    trace.events.reserve(static_cast<std::size_t>(options.ticks));
    auto keep = [&](const State& s) {
        trace.snapshots.push_back(s);
        if (options.snapshot_capacity > 0 && trace.snapshots.size() > options.snapshot_capacity)
            trace.snapshots.pop_front();
    };
    keep(initial);

    std::optional<std::vector<char>> lifetime_mask;
    if (options.link_failure && options.link_failure->per_lifetime)
        lifetime_mask = link_mask(net, *options.link_failure, 0);

    State cur = initial;
    for (Tick t = 0; t < options.ticks; ++t)
    {
        std::optional<std::vector<char>> tick_mask;
        const std::vector<char>* mask = nullptr;
        if (lifetime_mask)
            mask = &*lifetime_mask;
        else if (options.link_failure && options.link_failure->p_success < 1.0)
        {
            tick_mask = link_mask(net, *options.link_failure, cur.tick);
            mask = &*tick_mask;
        }
        State next = step(net, cur, mask);

        TickEvents ev;
        ev.tick = cur.tick;
        for (std::size_t v = 0; v < cur.size(); ++v)
        {
            if (cur[v] != 0) continue;
            if (next[v] == 1)
                ev.fired.push_back(static_cast<NodeId>(v));
            else
            {
                ++ev.stalled_count;
                if (options.record_stalled) ev.stalled.push_back(static_cast<NodeId>(v));
            }
        }
        trace.events.push_back(std::move(ev));
        keep(next);
        cur = std::move(next);
    }
    trace.final_state = std::move(cur);
    return trace;
}

// ---------------------------------------------------------------------------
// Periodicity and the subordination forest

std::vector<Periodicity> detect_periodicity(const RunTrace& trace, std::optional<int> window)
{
    const int w = window.value_or(3 * trace.initial.n);
    if (w < 1) throw Error(Errc::InvalidArgument, "window must be positive");
    const std::size_t len = trace.snapshots.size();
    if (len < 2 * static_cast<std::size_t>(w))
        throw Error(Errc::InsufficientTrace, "need " + std::to_string(2 * w) + " snapshots, have " + std::to_string(len));
    const std::size_t nodes = trace.initial.size();
    const std::size_t tail = len - 2 * static_cast<std::size_t>(w);
    const auto& snap = trace.snapshots;

    std::vector<Periodicity> out(nodes);
    for (std::size_t v = 0; v < nodes; ++v)
    {
        for (int k = 1; k <= w; ++k)
        {
            bool ok = true;
            for (std::size_t t = tail; t + k < len && ok; ++t) ok = snap[t][v] == snap[t + k][v];
            if (!ok) continue;
            std::size_t onset = tail;
            while (onset > 0 && snap[onset - 1][v] == snap[onset - 1 + k][v]) --onset;
            out[v] = {true, k, snap[onset].tick};
            break;
        }
    }
    return out;
}

Forest subordination_forest(const Network& net, const RunTrace& trace)
{
    if (!trace.complete()) throw Error(Errc::InsufficientTrace, "forest needs every snapshot from the initial tick");
    const int n = trace.initial.n;
    const auto periods = detect_periodicity(trace);
    const std::size_t count = net.size();
    for (std::size_t v = 0; v < count; ++v)
        if (!periods[v].period || *periods[v].period != n)
            throw Error(Errc::NotConverged, "node " + std::to_string(v) + " is not n-periodic");

    const auto& snap = trace.snapshots;
    const std::size_t last = snap.size() - 1;
    const State& final_state = snap[last];
    Forest f;
    f.parent.assign(count, kNoNode);
    f.sub_tick.assign(count, 0);
    f.lock_tick.assign(count, -1);
    f.depth.assign(count, -1);
    const auto on_seed = seed_nodes(final_state, net);
    for (std::size_t v = 0; v < count; ++v)
        if (on_seed[v]) f.roots.push_back(static_cast<NodeId>(v));
    if (f.roots.empty()) throw Error(Errc::NotConverged, "no seed loop in the final state");

    auto index_of = [&](Tick t) { return static_cast<std::size_t>(t - snap.front().tick); };
    for (std::size_t x = 0; x < count; ++x)
    {
        if (on_seed[x] || net.is_clone(static_cast<NodeId>(x))) continue;
        Tick best_tick = 0;
        NodeId best = kNoNode;
        for (NodeId y : net.neighbors(static_cast<NodeId>(x)))
        {
            if (net.is_clone(y) || final_state[y] != (final_state[x] + 1) % n) continue;
            std::size_t start = last;
            while (start > 0 && snap[start - 1][y] == (snap[start - 1][x] + 1) % n) --start;
            const Tick t = std::max(snap[start].tick, periods[y].onset);
            if (best == kNoNode || t < best_tick)
            {
                best = y;
                best_tick = t;
            }
        }
        if (best == kNoNode)
            throw Error(Errc::NotConverged, "node " + std::to_string(x) + " has no subordinating neighbor");
        f.parent[x] = best;
        f.sub_tick[x] = best_tick;
    }
    // Clones follow their original.
    for (std::size_t x = 0; x < count; ++x)
        if (net.is_clone(static_cast<NodeId>(x)) && !on_seed[x])
        {
            f.parent[x] = kNoNode;
            f.sub_tick[x] = 0;
        }

    // Depth and lock ticks, parents first.
    std::vector<NodeId> chain;
    auto first_zero_from = [&](NodeId x, Tick from) -> Tick {
        for (std::size_t t = index_of(std::max(from, snap.front().tick)); t <= last; ++t)
            if (snap[t][x] == 0) return snap[t].tick;
        throw Error(Errc::NotConverged, "node " + std::to_string(x) + " never reaches 0 after joining the forest");
    };
    for (NodeId r : f.roots)
    {
        f.depth[r] = 0;
        f.lock_tick[r] = first_zero_from(r, periods[r].onset);
    }
    for (std::size_t x = 0; x < count; ++x)
    {
        if (net.is_clone(static_cast<NodeId>(x)) || f.depth[x] >= 0) continue;
        chain.clear();
        NodeId v = static_cast<NodeId>(x);
        while (f.depth[v] < 0)
        {
            chain.push_back(v);
            if (chain.size() > count)
                throw Error(Errc::InternalConsistency, "subordination parents form a cycle");
            v = f.parent[v];
        }
        for (auto it = chain.rbegin(); it != chain.rend(); ++it)
        {
            const NodeId c = *it;
            const NodeId p = f.parent[c];
            f.depth[c] = f.depth[p] + 1;
            f.lock_tick[c] = first_zero_from(c, std::max(f.sub_tick[c], f.lock_tick[p]));
        }
    }
    for (std::size_t x = 0; x < count; ++x)
        if (net.is_clone(static_cast<NodeId>(x)))
        {
            const NodeId o = net.mirror_of()[x];
            f.depth[x] = f.depth[o];
            f.lock_tick[x] = f.lock_tick[o];
        }
    return f;
}

std::vector<NodeId> wavefront(const State& state)
{
    std::vector<NodeId> out;
    for (std::size_t v = 0; v < state.size(); ++v)
        if (state[v] == 0) out.push_back(static_cast<NodeId>(v));
    return out;
}

std::vector<NodeId> depth_level(const Forest& forest, int k)
{
    std::vector<NodeId> out;
    for (std::size_t v = 0; v < forest.depth.size(); ++v)
        if (forest.depth[v] == k) out.push_back(static_cast<NodeId>(v));
    return out;
}

double awake_fraction(const State& state)
{
    if (state.size() == 0) return 0.0;
    const auto zeros = std::count(state.values.begin(), state.values.end(), 0);
    return static_cast<double>(zeros) / static_cast<double>(state.size());
}

// ---------------------------------------------------------------------------
// Barriers

bool is_barrier(const Network& net, std::span<const NodeId> nodes, const HallwayDomain& domain, const Rect& corridor)
{
    // The corridor is a member rectangle or a full-width piece of one.
    std::optional<bool> member_horizontal;
    for (const Rect& m : domain.rects())
    {
        const bool h = m.horizontal();
        const bool spans = h ? corridor.ymin == m.ymin && corridor.ymax == m.ymax && corridor.xmin >= m.xmin &&
                                   corridor.xmax <= m.xmax && corridor.xmin < corridor.xmax
                             : corridor.xmin == m.xmin && corridor.xmax == m.xmax && corridor.ymin >= m.ymin &&
                                   corridor.ymax <= m.ymax && corridor.ymin < corridor.ymax;
        if (spans)
        {
            member_horizontal = h;
            break;
        }
    }
    if (!member_horizontal)
        throw Error(Errc::BadCorridor, "corridor is not a full-width piece of a member rectangle");
    const double eps = net.coverage_radius();
    std::vector<Point> centers;
    for (NodeId v : nodes)
    {
        const Point c = net.coverage_center(v);
        if (corridor.contains(c)) centers.push_back(c);
    }
    const std::size_t k = centers.size();
    const std::size_t wall_lo = k, wall_hi = k + 1;
    std::vector<std::size_t> parent(k + 2);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };

    const bool horiz = *member_horizontal;
    for (std::size_t i = 0; i < k; ++i)
    {
        const double lo = horiz ? centers[i].y - corridor.ymin : centers[i].x - corridor.xmin;
        const double hi = horiz ? corridor.ymax - centers[i].y : corridor.xmax - centers[i].x;
        if (lo <= eps) unite(i, wall_lo);
        if (hi <= eps) unite(i, wall_hi);
    }
    // Disk overlap: centers within 2 eps, found by a sweep along the corridor axis.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    auto axis = [&](std::size_t i) { return horiz ? centers[i].x : centers[i].y; };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return axis(a) < axis(b); });
    const double reach2 = 4.0 * eps * eps;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k && axis(order[b]) - axis(order[a]) <= 2.0 * eps; ++b)
            if (dist2(centers[order[a]], centers[order[b]]) <= reach2) unite(order[a], order[b]);
    return find(wall_lo) == find(wall_hi);
}

}  // namespace ghm
