#include <doctest.h>

#include <numeric>
#include <set>

#include "ghm/engine.hpp"
#include "ghm/errors.hpp"
#include "ghm/topology.hpp"
#include "support.hpp"

using namespace ghm;
using namespace ghm::testing;

namespace {

State ramp_on_cycle(int n, int len)
{
    State s = State::zeros(len, n);
    for (int i = 0; i < len; ++i) s[i] = i % n;
    return s;
}

}  // namespace

TEST_CASE("update rule")
{
    const auto path = Network::from_edges({{0, 0}, {1, 0}, {2, 0}}, 1.0, 1.0, {{0, 1}, {1, 2}});
    State s(std::vector<Phase>{3, 0, 1}, 20);
    State t = step(path, s);
    CHECK(t[0] == 4);
    CHECK(t[1] == 1);  // neighbor at 1
    CHECK(t[2] == 2);
    CHECK(t.tick == 1);

    State quiet(std::vector<Phase>{0, 0, 5}, 20);
    CHECK(step(path, quiet)[0] == 0);
    CHECK(step(path, quiet)[1] == 0);
    State wrap(std::vector<Phase>{19, 0, 0}, 20);
    CHECK(step(path, wrap)[0] == 0);

    // a failed link blocks excitation
    const std::vector<char> dead = {1, 0};
    CHECK(step(path, s, &dead)[1] == 0);
    const std::vector<char> live = {1, 1};
    CHECK(step(path, s, &live) == step(path, s));
}

TEST_CASE("continuity and subordination predicates")
{
    const auto path = Network::from_edges({{0, 0}, {1, 0}, {2, 0}}, 1.0, 1.0, {{0, 1}, {1, 2}});
    CHECK(is_continuous(path, State(std::vector<Phase>{5, 5, 5}, 20)));
    CHECK(is_continuous(path, State(std::vector<Phase>{0, 19, 0}, 20)));
    const auto bad = is_continuous(path, State(std::vector<Phase>{0, 2, 4}, 20));
    CHECK_FALSE(bad);
    REQUIRE(bad.violation);
    CHECK(*bad.violation == Edge{0, 1});
    const std::vector<NodeId> sub = {2};
    CHECK(is_continuous(path, State(std::vector<Phase>{0, 2, 4}, 20), std::span<const NodeId>(sub)));

    const State s(std::vector<Phase>{19, 0, 2}, 20);
    CHECK(is_subordinate(path, s, 0, 1));
    CHECK_FALSE(is_subordinate(path, State(std::vector<Phase>{4, 4, 0}, 20), 0, 1));
    CHECK_FALSE(is_subordinate(path, State(std::vector<Phase>{0, 2, 0}, 20), 0, 1));
    CHECK_THROWS_AS(is_subordinate(path, s, 0, 2), Error);
}

TEST_CASE("runs")
{
    SUBCASE("all zero stays zero and every node stalls")
    {
        const auto net = random_geometric(30, 0.3, 1);
        RunOptions opt;
        opt.ticks = 15;
        opt.record_stalled = true;
        const auto tr = run(net, State::zeros(net.size(), 5), opt);
        for (const auto& ev : tr.events)
        {
            CHECK(ev.fired.empty());
            CHECK(ev.stalled.size() == net.size());
        }
        CHECK(tr.final_state == State(std::vector<Phase>(net.size(), 0), 5, 15));
    }
    SUBCASE("stalled and fired partition the zeros")
    {
        const auto net = random_geometric(80, 0.2, 2);
        RunOptions opt;
        opt.ticks = 30;
        opt.record_stalled = true;
        const auto tr = run(net, random_state(net.size(), 6, 3), opt);
        for (std::size_t t = 0; t < tr.events.size(); ++t)
        {
            const auto& ev = tr.events[t];
            std::set<NodeId> f(ev.fired.begin(), ev.fired.end());
            std::set<NodeId> st(ev.stalled.begin(), ev.stalled.end());
            for (NodeId v : st) CHECK(f.count(v) == 0);
            std::set<NodeId> both = f;
            both.insert(st.begin(), st.end());
            const auto zeros = wavefront(tr.at(static_cast<Tick>(t)));
            CHECK(both == std::set<NodeId>(zeros.begin(), zeros.end()));
            CHECK(ev.stalled_count == st.size());
        }
    }
    SUBCASE("seeded cycle is n-periodic from the start")
    {
        const int n = 9;
        const auto cn = cycle_graph(n);
        RunOptions opt;
        opt.ticks = 6 * n;
        const auto tr = run(cn, ramp_on_cycle(n, n), opt);
        const auto per = detect_periodicity(tr);
        for (const auto& p : per)
        {
            REQUIRE(p.period);
            CHECK(*p.period == n);
            CHECK(p.onset == 0);
        }
        for (Tick t = 0; t <= tr.last_tick(); ++t) CHECK(wavefront(tr.at(t)).size() == 1);
    }
    SUBCASE("p_s = 1 is the deterministic run")
    {
        const auto net = random_geometric(60, 0.25, 4);
        const auto init = random_state(net.size(), 7, 5);
        RunOptions a, b;
        a.ticks = b.ticks = 40;
        b.link_failure = LinkFailure{1.0, 77, false};
        CHECK(run(net, init, a).final_state == run(net, init, b).final_state);
        const auto mask = link_mask(net, LinkFailure{1.0, 77, false}, 3);
        CHECK(std::all_of(mask.begin(), mask.end(), [](char c) { return c != 0; }));
        State s = init;
        for (int t = 0; t < 40; ++t)
        {
            const auto m = link_mask(net, LinkFailure{1.0, 77, false}, t);
            State masked = step(net, s, &m);
            s = step(net, s);
            REQUIRE(masked == s);
        }
    }
    SUBCASE("link masks are deterministic and roughly p_s")
    {
        const auto net = random_geometric(200, 0.15, 6);
        const LinkFailure lf{0.7, 9, false};
        CHECK(link_mask(net, lf, 5) == link_mask(net, lf, 5));
        CHECK(link_mask(net, lf, 5) != link_mask(net, lf, 6));
        const LinkFailure life{0.7, 9, true};
        CHECK(link_mask(net, life, 5) == link_mask(net, life, 6));
        std::size_t live = 0, total = 0;
        for (Tick t = 0; t < 50; ++t)
            for (char c : link_mask(net, lf, t))
            {
                live += c;
                ++total;
            }
        CHECK(static_cast<double>(live) / total == doctest::Approx(0.7).epsilon(0.02));
    }
}

TEST_CASE("periodicity detection")
{
    const auto net = random_geometric(20, 0.4, 7);
    RunOptions opt;
    opt.ticks = 20;
    const auto tr = run(net, State::zeros(net.size(), 5), opt);
    for (const auto& p : detect_periodicity(tr, 5))
    {
        REQUIRE(p.period);
        CHECK(*p.period == 1);
    }
    CHECK_THROWS_AS(detect_periodicity(tr, 15), Error);  // 2 * window > retained
}

TEST_CASE("counterexample search: n-periodic but not continuous")
{
    // Brute force over 8-node graphs made of the ring 0..7 plus one or two
    // chords, with the seed ramp u(i) = i in Z_8. Collect instances where
    // every node is 8-periodic and the state stays discontinuous.
    const int n = 8;
    std::vector<Edge> ring;
    for (int i = 0; i < n; ++i) ring.push_back({std::min(i, (i + 1) % n), std::max(i, (i + 1) % n)});
    std::vector<Edge> chords;
    for (int i = 0; i < n; ++i)
        for (int j = i + 2; j < n; ++j)
            if (!(i == 0 && j == n - 1)) chords.push_back({i, j});
    std::vector<Point> pos(n);
    int found = 0, found_offset3 = 0;
    auto examine = [&](const std::vector<Edge>& edges) {
        const auto net = Network::from_edges(pos, 1.0, 1.0, edges);
        RunOptions opt;
        opt.ticks = 8 * n;
        const auto tr = run(net, ramp_on_cycle(n, n), opt);
        const auto per = detect_periodicity(tr);
        if (!std::all_of(per.begin(), per.end(), [&](const Periodicity& p) { return p.period && *p.period == n; }))
            return;
        bool always_broken = true;
        for (Tick t = tr.last_tick() - 2 * n; t <= tr.last_tick(); ++t)
            if (is_continuous(net, tr.at(t))) always_broken = false;
        if (!always_broken) return;
        ++found;
        const auto& fin = tr.final_state;
        for (const auto& e : edges)
            if (std::abs(cyclic_offset(fin[e[0]], fin[e[1]], n)) == 3) ++found_offset3;
    };
    for (std::size_t a = 0; a < chords.size(); ++a)
    {
        auto e1 = ring;
        e1.push_back(chords[a]);
        examine(e1);
        for (std::size_t b = a + 1; b < chords.size(); ++b)
        {
            auto e2 = e1;
            e2.push_back(chords[b]);
            examine(e2);
        }
    }
    MESSAGE(found << " periodic discontinuous instances; " << found_offset3 << " offset-3 pairs");
    CHECK(found > 0);
    CHECK(found_offset3 > 0);
}

TEST_CASE("subordination forest")
{
    SUBCASE("seeded cycle: every node is a root")
    {
        const int n = 6;
        const auto cn = cycle_graph(n);
        RunOptions opt;
        opt.ticks = 8 * n;
        const auto f = subordination_forest(cn, run(cn, ramp_on_cycle(n, n), opt));
        CHECK(f.roots.size() == static_cast<std::size_t>(n));
        for (int d : f.depth) CHECK(d == 0);
        CHECK(depth_level(f, 0) == f.roots);
    }
    SUBCASE("pendant path depths")
    {
        const int n = 5, L = 7;
        std::vector<Point> pts(n + L);
        std::vector<Edge> edges;
        for (int i = 0; i < n; ++i) edges.push_back({std::min(i, (i + 1) % n), std::max(i, (i + 1) % n)});
        edges.push_back({0, n});
        for (int k = 1; k < L; ++k) edges.push_back({n + k - 1, n + k});
        const auto net = Network::from_edges(pts, 1.0, 1.0, edges);
        State s = State::zeros(n + L, n);
        for (int i = 0; i < n; ++i) s[i] = i;
        RunOptions opt;
        opt.ticks = (n + L) * n + 6 * n;
        const auto f = subordination_forest(net, run(net, s, opt));
        for (int k = 0; k < L; ++k)
        {
            CHECK(f.depth[n + k] == k + 1);
            CHECK(f.parent[n + k] == (k == 0 ? 0 : n + k - 1));
        }
    }
    SUBCASE("not converged")
    {
        const auto net = random_geometric(20, 0.4, 8);
        RunOptions opt;
        opt.ticks = 40;
        CHECK_THROWS_AS(subordination_forest(net, run(net, State::zeros(net.size(), 5), opt)), Error);
    }
}

TEST_CASE("barriers")
{
    const auto dom = build_domain({{0, 0, 20, 2}});
    const Rect corridor{0, 0, 20, 2};
    std::vector<Point> pts;
    for (double y = 0.2; y <= 1.81; y += 0.4) pts.push_back({10, y});  // spacing 0.4 <= 2 eps
    pts.push_back({3, 1});
    const auto net = build_network(pts, 1.0, 0.3);
    std::vector<NodeId> line(pts.size() - 1);
    std::iota(line.begin(), line.end(), 0);
    CHECK(is_barrier(net, line, dom, corridor));
    CHECK_FALSE(is_barrier(net, std::vector<NodeId>{}, dom, corridor));
    const std::vector<NodeId> broken = {0, 1, 3, 4};
    CHECK_FALSE(is_barrier(net, broken, dom, corridor));
    // full-width sections of the corridor are accepted; partial widths are not
    CHECK(is_barrier(net, line, dom, Rect{5, 0, 15, 2}));
    CHECK_FALSE(is_barrier(net, line, dom, Rect{0, 0, 8, 2}));
    CHECK_THROWS_AS(is_barrier(net, line, dom, Rect{0, 0, 10, 1.5}), Error);
    CHECK_THROWS_AS(is_barrier(net, line, dom, Rect{0, 0, 22, 2}), Error);
}

TEST_CASE("continuity is forward invariant")
{
    int checked = 0;
    for (std::uint64_t s = 0; s < 1000; ++s)
    {
        const auto net = random_geometric(20 + static_cast<int>(s % 60), 0.18 + 0.002 * static_cast<double>(s % 50), s);
        const int n = 3 + static_cast<int>(s % 10);
        State st = random_continuous_state(net, n, s);
        REQUIRE(is_continuous(net, st));
        for (int t = 0; t < 2 * n; ++t)
        {
            st = step(net, st);
            REQUIRE(is_continuous(net, st));
        }
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("subordination persists")
{
    for (std::uint64_t s = 0; s < 40; ++s)
    {
        const auto net = random_geometric(80, 0.2, s);
        const int n = 5 + static_cast<int>(s % 5);
        RunOptions opt;
        opt.ticks = 12 * n;
        const auto tr = run(net, random_state(net.size(), n, s), opt);
        const auto per = detect_periodicity(tr, 3 * n);
        // at the tick 3n, take subordinate pairs whose parent is n-periodic by then
        const Tick t0 = 3 * n;
        const State& u = tr.at(t0);
        for (const auto& [a, b] : net.edges())
            for (const auto [x, y] : {std::pair{a, b}, std::pair{b, a}})
            {
                if (!is_subordinate(net, u, x, y)) continue;
                if (!per[y].period || *per[y].period != n || per[y].onset > t0) continue;
                for (Tick t = t0; t <= t0 + 3 * n; ++t) CHECK(tr.at(t + n)[x] == tr.at(t)[x]);
            }
    }
}

TEST_CASE("seeded networks converge to period n")
{
    for (std::uint64_t s = 0; s < 6; ++s)
    {
        const int n = 6;
        const auto dom = build_domain({{0, 0, 8, 8}});
        const auto net = build_network(sample_points(dom, 800, s), 1.0, 0.6);
        if (!net.connected()) continue;
        State st = State::zeros(net.size(), n);
        std::vector<NodeId> loop;
        for (double c = 2; c <= 6 && loop.empty(); c += 0.5) loop = plant_seed(net, st, {c, 4}, 0.75, n);
        REQUIRE_FALSE(loop.empty());
        RunOptions opt;
        opt.ticks = static_cast<Tick>(net.size()) * n;
        opt.snapshot_capacity = 6 * n;
        const auto tr = run(net, st, opt);
        for (const auto& p : detect_periodicity(tr))
        {
            REQUIRE(p.period);
            CHECK(*p.period == n);
        }
    }
}

TEST_CASE("duty cycle settles near 1/n")
{
    const auto dom = build_domain({{0, 0, 20, 20}});
    for (std::uint64_t s = 0; s < 3; ++s)
    {
        const int n = 10;
        const auto net = build_network(sample_points(dom, 2000, s), 1.5, 1.0);
        RunOptions opt;
        opt.ticks = 400;
        const auto tr = run(net, random_state(net.size(), n, s), opt);
        REQUIRE(find_seed(tr.initial, net));
        double sum = 0;
        for (Tick t = 300; t < 400; ++t) sum += awake_fraction(tr.at(t));
        const double mean = sum / 100;
        CHECK(mean >= 1.0 / (2 * n));
        CHECK(mean <= 2.0 / n);
    }
}

TEST_CASE("seeded corridor: wavefront band forms persistent barriers")
{
    const int n = 8;
    const double r = 1.0, eps = 0.6;
    const Rect corridor{0, 0, 40, 3};
    const auto dom = build_domain({corridor});
    const auto net = build_network(sample_points(dom, 1600, 21), r, eps);
    REQUIRE(net.connected());
    State st = State::zeros(net.size(), n);
    REQUIRE_FALSE(plant_seed(net, st, {5, 1.5}, 0.9, n).empty());
    RunOptions opt;
    opt.ticks = 2 * n + 40 + 100;
    const auto tr = run(net, st, opt);
    int hits = 0;
    for (Tick t = opt.ticks - 100; t < opt.ticks; ++t)
    {
        const State& u = tr.at(t);
        std::vector<char> in(net.size(), 0);
        for (NodeId v : wavefront(u))
        {
            in[v] = 1;
            for (NodeId w : net.neighbors(v)) in[w] = 1;
        }
        std::vector<NodeId> band;
        for (std::size_t v = 0; v < in.size(); ++v)
            if (in[v]) band.push_back(static_cast<NodeId>(v));
        if (is_barrier(net, band, dom, corridor)) ++hits;
    }
    CHECK(hits == 100);
}
