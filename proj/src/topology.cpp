#include "ghm/topology.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "ghm/engine.hpp"
#include "ghm/errors.hpp"

namespace ghm {

// ---------------------------------------------------------------------------
// Chain1

void Chain1::add(NodeId from, NodeId to, long long c)
{
    if (from == to) throw Error(Errc::InvalidArgument, "chain edge with equal endpoints");
    if (c == 0) return;
    const Edge key = from < to ? Edge{from, to} : Edge{to, from};
    const long long signed_c = from < to ? c : -c;
    auto [it, inserted] = terms_.try_emplace(key, signed_c);
    if (!inserted)
    {
        it->second += signed_c;
        if (it->second == 0) terms_.erase(it);
    }
}

long long Chain1::coeff(NodeId from, NodeId to) const
{
    const Edge key = from < to ? Edge{from, to} : Edge{to, from};
    auto it = terms_.find(key);
    if (it == terms_.end()) return 0;
    return from < to ? it->second : -it->second;
}

bool Chain1::is_cycle() const
{
    std::map<NodeId, long long> boundary;
    for (const auto& [e, c] : terms_)
    {
        boundary[e[1]] += c;
        boundary[e[0]] -= c;
    }
    return std::all_of(boundary.begin(), boundary.end(), [](const auto& kv) { return kv.second == 0; });
}

std::optional<std::vector<NodeId>> Chain1::as_loop() const
{
    if (terms_.size() < 3) return std::nullopt;
    std::map<NodeId, NodeId> next;
    std::map<NodeId, int> indeg;
    for (const auto& [e, c] : terms_)
    {
        if (c != 1 && c != -1) return std::nullopt;
        const NodeId a = c == 1 ? e[0] : e[1];
        const NodeId b = c == 1 ? e[1] : e[0];
        if (!next.emplace(a, b).second) return std::nullopt;
        if (++indeg[b] > 1) return std::nullopt;
    }
    if (indeg.size() != next.size()) return std::nullopt;
    std::vector<NodeId> seq;
    NodeId v = next.begin()->first;  // smallest vertex
    do
    {
        seq.push_back(v);
        v = next.at(v);
    } while (v != seq.front() && seq.size() <= next.size());
    if (v != seq.front() || seq.size() != next.size()) return std::nullopt;
    return seq;
}

Chain1 Chain1::from_loop(std::span<const NodeId> vertices)
{
    Chain1 c;
    for (std::size_t k = 0; k < vertices.size(); ++k) c.add(vertices[k], vertices[(k + 1) % vertices.size()]);
    return c;
}

Chain1& Chain1::operator+=(const Chain1& other)
{
    for (const auto& [e, c] : other.terms_) add(e[0], e[1], c);
    return *this;
}

Chain1& Chain1::operator-=(const Chain1& other)
{
    for (const auto& [e, c] : other.terms_) add(e[0], e[1], -c);
    return *this;
}

Chain1 Chain1::operator-() const
{
    Chain1 out;
    for (const auto& [e, c] : terms_) out.terms_.emplace(e, -c);
    return out;
}

Chain1 operator*(long long s, const Chain1& c)
{
    Chain1 out;
    if (s == 0) return out;
    for (const auto& [e, x] : c.terms_) out.terms_.emplace(e, s * x);
    return out;
}

// ---------------------------------------------------------------------------
// Degree and seeds

long long degree(const State& state, const Chain1& cycle, const Network& net)
{
    long long total = 0;
    for (const auto& [e, c] : cycle.terms())
    {
        if (!net.adjacent(e[0], e[1]))
            throw Error(Errc::NotNeighbors, "chain term is not a network edge");
        const int d = cyclic_offset(state[e[0]], state[e[1]], state.n);
        if (d < -1 || d > 1)
            throw Error(Errc::DiscontinuousOnCycle, "edge (" + std::to_string(e[0]) + "," +
                                                        std::to_string(e[1]) + ") has offset " + std::to_string(d));
        total += c * d;
    }
    if (total % state.n != 0)
        throw Error(Errc::NonIntegralDegree, "summed offsets " + std::to_string(total) + " not divisible by n");
    return total / state.n;
}

namespace {

bool successor(const State& s, const Network& net, NodeId x, NodeId y)
{
    return !net.is_clone(y) && s[y] == (s[x] + 1) % s.n;
}

}  // namespace

std::optional<std::vector<NodeId>> find_seed(const State& state, const Network& net)
{
    const std::size_t n = net.size();
    std::vector<std::uint8_t> color(n, 0);  // 0 new, 1 on stack, 2 done
    std::vector<std::pair<NodeId, std::size_t>> stack;
    for (std::size_t root = 0; root < n; ++root)
    {
        if (color[root] || net.is_clone(static_cast<NodeId>(root))) continue;
        stack.emplace_back(static_cast<NodeId>(root), 0);
        color[root] = 1;
        while (!stack.empty())
        {
            auto& [v, idx] = stack.back();
            auto nb = net.neighbors(v);
            bool descended = false;
            while (idx < nb.size())
            {
                const NodeId w = nb[idx++];
                if (!successor(state, net, v, w)) continue;
                if (color[w] == 1)
                {
                    std::vector<NodeId> loop;
                    auto it = std::find_if(stack.begin(), stack.end(), [w](const auto& f) { return f.first == w; });
                    for (; it != stack.end(); ++it) loop.push_back(it->first);
                    return loop;
                }
                if (color[w] == 0)
                {
                    color[w] = 1;
                    stack.emplace_back(w, 0);
                    descended = true;
                    break;
                }
            }
            if (!descended)
            {
                color[stack.back().first] = 2;
                stack.pop_back();
            }
        }
    }
    return std::nullopt;
}

std::vector<int> seed_components(const State& state, const Network& net)
{
    // Iterative Tarjan; members of SCCs with at least two nodes lie on cycles
    // (no self-arcs exist for n >= 3).
    const std::size_t n = net.size();
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<int> result(n, -1);
    int components = 0;
    std::vector<NodeId> scc_stack;
    std::vector<std::pair<NodeId, std::size_t>> call;
    int counter = 0;
    for (std::size_t root = 0; root < n; ++root)
    {
        if (index[root] >= 0 || net.is_clone(static_cast<NodeId>(root))) continue;
        call.emplace_back(static_cast<NodeId>(root), 0);
        index[root] = low[root] = counter++;
        scc_stack.push_back(static_cast<NodeId>(root));
        on_stack[root] = 1;
        while (!call.empty())
        {
            auto& [v, idx] = call.back();
            auto nb = net.neighbors(v);
            bool descended = false;
            while (idx < nb.size())
            {
                const NodeId w = nb[idx++];
                if (!successor(state, net, v, w)) continue;
                if (index[w] < 0)
                {
                    index[w] = low[w] = counter++;
                    scc_stack.push_back(w);
                    on_stack[w] = 1;
                    call.emplace_back(w, 0);
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            const NodeId done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] == index[done])
            {
                std::vector<NodeId> comp;
                NodeId w;
                do
                {
                    w = scc_stack.back();
                    scc_stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                } while (w != done);
                if (comp.size() >= 2)
                {
                    for (NodeId x : comp) result[x] = components;
                    ++components;
                }
            }
        }
    }
    return result;
}

std::vector<char> seed_nodes(const State& state, const Network& net)
{
    const auto comp = seed_components(state, net);
    std::vector<char> out(comp.size());
    for (std::size_t v = 0; v < comp.size(); ++v) out[v] = comp[v] >= 0;
    return out;
}

// ---------------------------------------------------------------------------
// Homology

namespace {

// Generators with a signed union-find: each generator equals sign * parent,
// and a root may be known to vanish.
struct SignedDsu
{
    std::vector<std::int64_t> parent;
    std::vector<std::int8_t> sign;
    std::vector<char> zero;

    explicit SignedDsu(std::size_t n) : parent(n), sign(n, 1), zero(n, 0)
    {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::int64_t>(i);
    }

    std::pair<std::int64_t, int> find(std::int64_t g)
    {
        // two passes: locate root with accumulated sign, then compress
        std::int64_t r = g;
        int s = 1;
        while (parent[r] != r)
        {
            s *= sign[r];
            r = parent[r];
        }
        std::int64_t cur = g;
        int cur_s = s;  // sign of cur relative to root
        while (parent[cur] != cur)
        {
            const std::int64_t nxt = parent[cur];
            const int nxt_s = cur_s * sign[cur];
            parent[cur] = r;
            sign[cur] = static_cast<std::int8_t>(cur_s);
            cur = nxt;
            cur_s = nxt_s;
        }
        return {r, s};
    }
};

// Relation term list reduced onto live roots; at most three entries.
using Relation = std::vector<std::pair<std::int64_t, long long>>;

Relation reduce_relation(SignedDsu& dsu, const std::array<std::pair<std::int64_t, int>, 3>& raw, int count)
{
    Relation out;
    for (int k = 0; k < count; ++k)
    {
        auto [r, s] = dsu.find(raw[k].first);
        if (dsu.zero[r]) continue;
        const long long c = static_cast<long long>(s) * raw[k].second;
        auto it = std::find_if(out.begin(), out.end(), [r](const auto& t) { return t.first == r; });
        if (it == out.end())
            out.emplace_back(r, c);
        else
            it->second += c;
    }
    std::erase_if(out, [](const auto& t) { return t.second == 0; });
    return out;
}

// Returns true when the relation was absorbed (vanished, zeroed, or merged).
bool absorb(SignedDsu& dsu, const Relation& rel)
{
    if (rel.empty()) return true;
    if (rel.size() == 1 && (rel[0].second == 1 || rel[0].second == -1))
    {
        dsu.zero[rel[0].first] = 1;
        return true;
    }
    if (rel.size() == 2 && std::abs(rel[0].second) == 1 && std::abs(rel[1].second) == 1)
    {
        // c1 r1 + c2 r2 = 0  =>  r1 = -c1 c2 r2
        const auto [r1, c1] = rel[0];
        const auto [r2, c2] = rel[1];
        dsu.parent[r1] = r2;
        dsu.sign[r1] = static_cast<std::int8_t>(-c1 * c2);
        return true;
    }
    return false;
}

}  // namespace

H1Basis homology_basis(const Network& net)
{
    if (!net.connected()) throw Error(Errc::DisconnectedNetwork, "homology basis needs a connected network");
    H1Basis out;
    const std::size_t n = net.size();
    const auto& edges = net.edges();
    out.node_count_ = n;
    out.tree_edge_.assign(edges.size(), 0);
    out.edge_generator_.assign(edges.size(), -1);
    if (n == 0) return out;

    // BFS spanning tree from node 0.
    std::vector<NodeId> parent(n, kNoNode);
    std::vector<int> depth(n, -1);
    {
        std::queue<NodeId> q;
        q.push(0);
        depth[0] = 0;
        while (!q.empty())
        {
            const NodeId v = q.front();
            q.pop();
            auto nb = net.neighbors(v);
            auto ids = net.incident_edges(v);
            for (std::size_t k = 0; k < nb.size(); ++k)
                if (depth[nb[k]] < 0)
                {
                    depth[nb[k]] = depth[v] + 1;
                    parent[nb[k]] = v;
                    out.tree_edge_[ids[k]] = 1;
                    q.push(nb[k]);
                }
        }
    }
    std::vector<std::int32_t> gen_edge;
    for (std::size_t e = 0; e < edges.size(); ++e)
        if (!out.tree_edge_[e])
        {
            out.edge_generator_[e] = static_cast<std::int32_t>(gen_edge.size());
            gen_edge.push_back(static_cast<std::int32_t>(e));
        }
    const std::size_t m = gen_edge.size();

    // Triangle relations: d[a,b,c] = [a,b] + [b,c] - [a,c].
    SignedDsu dsu(m);
    std::vector<Relation> pending;
    auto raw_of = [&](const Triangle& t, int& count) {
        std::array<std::pair<std::int64_t, int>, 3> raw{};
        count = 0;
        const std::array<std::pair<Edge, int>, 3> sides{{{{t[0], t[1]}, 1}, {{t[1], t[2]}, 1}, {{t[0], t[2]}, -1}}};
        for (const auto& [e, s] : sides)
        {
            const auto g = out.edge_generator_[net.edge_index(e[0], e[1])];
            if (g >= 0) raw[count++] = {g, s};
        }
        return raw;
    };
    std::vector<std::array<std::pair<std::int64_t, int>, 3>> deferred_raw;
    std::vector<int> deferred_count;
    for (const auto& t : net.triangles())
    {
        int count = 0;
        const auto raw = raw_of(t, count);
        if (count == 0) continue;
        if (!absorb(dsu, reduce_relation(dsu, raw, count)))
        {
            deferred_raw.push_back(raw);
            deferred_count.push_back(count);
        }
    }
    for (bool changed = true; changed;)
    {
        changed = false;
        std::size_t keep = 0;
        for (std::size_t k = 0; k < deferred_raw.size(); ++k)
        {
            if (absorb(dsu, reduce_relation(dsu, deferred_raw[k], deferred_count[k])))
            {
                changed = true;
                continue;
            }
            deferred_raw[keep] = deferred_raw[k];
            deferred_count[keep++] = deferred_count[k];
        }
        deferred_raw.resize(keep);
        deferred_count.resize(keep);
    }

    // Live roots and the generator reduction table.
    std::vector<std::int64_t> root_index(m, -1);
    std::vector<std::int64_t> roots;
    for (std::size_t g = 0; g < m; ++g)
    {
        auto [r, s] = dsu.find(static_cast<std::int64_t>(g));
        if (dsu.zero[r] || static_cast<std::size_t>(r) != g) continue;
        root_index[g] = static_cast<std::int64_t>(roots.size());
        roots.push_back(static_cast<std::int64_t>(g));
    }
    out.reduced_.assign(m, 0);
    for (std::size_t g = 0; g < m; ++g)
    {
        auto [r, s] = dsu.find(static_cast<std::int64_t>(g));
        if (dsu.zero[r]) continue;
        out.reduced_[g] = s * (root_index[r] + 1);
    }
    const std::size_t q = roots.size();
    out.root_count_ = q;

    // Remaining relations as columns over the live roots.
    std::vector<std::vector<std::pair<std::int64_t, long long>>> columns;
    for (std::size_t k = 0; k < deferred_raw.size(); ++k)
    {
        Relation rel = reduce_relation(dsu, deferred_raw[k], deferred_count[k]);
        for (auto& [r, c] : rel) r = root_index[r];
        std::sort(rel.begin(), rel.end());
        if (!rel.empty() && rel.front().second < 0)
            for (auto& t : rel) t.second = -t.second;
        columns.push_back(std::move(rel));
    }
    std::sort(columns.begin(), columns.end());
    columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
    std::erase_if(columns, [](const auto& c) { return c.empty(); });

    BigMatrix rel(q, std::vector<BigInt>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c)
        for (const auto& [r, x] : columns[c]) rel[r][c] = x;
    SmithForm snf;
    if (columns.empty())
    {
        snf.rank = 0;
        snf.U = identity_matrix(q);
        snf.U_inv = identity_matrix(q);
    }
    else
        snf = smith_normal_form(std::move(rel), true);
    for (const auto& d : snf.divisors)
        if (d != 1)
            throw Error(Errc::TorsionDetected, "elementary divisor " + d.str() + " in the first homology");
    out.smith_rank_ = snf.rank;
    out.divisors_ = snf.divisors;
    out.u_ = snf.U;
    const std::size_t g = q - static_cast<std::size_t>(snf.rank);

    BigMatrix M(snf.U.begin() + snf.rank, snf.U.end());  // g x q

    auto fundamental_loop = [&](std::int32_t edge_id) {
        const auto [a, b] = edges[edge_id];
        std::vector<NodeId> up_a, up_b;
        NodeId x = a, y = b;
        while (depth[x] > depth[y])
        {
            up_a.push_back(x);
            x = parent[x];
        }
        while (depth[y] > depth[x])
        {
            up_b.push_back(y);
            y = parent[y];
        }
        while (x != y)
        {
            up_a.push_back(x);
            up_b.push_back(y);
            x = parent[x];
            y = parent[y];
        }
        up_b.push_back(x);  // lowest common ancestor
        std::vector<NodeId> seq = up_b;
        seq.insert(seq.end(), up_a.rbegin(), up_a.rend());
        return seq;  // b ... lca ... a, closed by a -> b
    };

    // Prefer a basis of fundamental loops: g root columns of M forming a
    // unimodular block S, with coordinates S^-1 M.
    std::vector<std::size_t> chosen;
    if (g > 0)
    {
        auto try_select = [&](auto&& accept_first) {
            chosen.clear();
            BigMatrix cols;  // selected columns as rows
            for (std::size_t k = 0; k < q && chosen.size() < g; ++k)
            {
                if (!accept_first(k)) continue;
                BigMatrix trial = cols;
                std::vector<BigInt> col(g);
                for (std::size_t i = 0; i < g; ++i) col[i] = M[i][k];
                trial.push_back(col);
                if (smith_normal_form(trial, false).rank == static_cast<int>(trial.size()))
                {
                    cols = std::move(trial);
                    chosen.push_back(k);
                }
            }
            return chosen.size() == g;
        };
        auto unit_column = [&](std::size_t k) {
            int nonzero = 0;
            for (std::size_t i = 0; i < g; ++i)
                if (!M[i][k].is_zero())
                {
                    if (abs(M[i][k]) != 1) return false;
                    ++nonzero;
                }
            return nonzero == 1;
        };
        bool ok = try_select(unit_column);
        if (!ok) ok = try_select([](std::size_t) { return true; });
        std::optional<BigMatrix> s_inv;
        if (ok)
        {
            BigMatrix S(g, std::vector<BigInt>(g));
            for (std::size_t j = 0; j < g; ++j)
                for (std::size_t i = 0; i < g; ++i) S[i][j] = M[i][chosen[j]];
            s_inv = unimodular_inverse(S);
        }
        if (s_inv)
        {
            out.coord_map_ = multiply(*s_inv, M);
            for (std::size_t k : chosen)
            {
                auto seq = fundamental_loop(gen_edge[roots[k]]);
                out.cycles_.push_back(Chain1::from_loop(seq));
                out.loops_.push_back(std::move(seq));
            }
        }
        else
        {
            out.coord_map_ = M;
            for (std::size_t j = 0; j < g; ++j)
            {
                Chain1 cycle;
                for (std::size_t k = 0; k < q; ++k)
                {
                    const BigInt& c = snf.U_inv[k][snf.rank + j];
                    if (c.is_zero()) continue;
                    cycle += static_cast<long long>(c) * Chain1::from_loop(fundamental_loop(gen_edge[roots[k]]));
                }
                if (auto loop = cycle.as_loop()) out.loops_.push_back(*loop);
                out.cycles_.push_back(std::move(cycle));
            }
            if (out.loops_.size() != out.cycles_.size()) out.loops_.clear();
        }
    }
    out.edges_ = edges;
    return out;
}

std::vector<BigInt> H1Basis::reduce(const Chain1& cycle) const
{
    if (!cycle.is_cycle()) throw Error(Errc::NotACycle, "chain has nonzero boundary");
    std::vector<BigInt> v(root_count_);
    for (const auto& [e, c] : cycle.terms())
    {
        auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
        if (it == edges_.end() || *it != e) throw Error(Errc::NotNeighbors, "chain term is not a network edge");
        const auto gen = edge_generator_[it - edges_.begin()];
        if (gen < 0) continue;
        const std::int64_t red = reduced_[gen];
        if (red == 0) continue;
        const std::size_t root = static_cast<std::size_t>(std::abs(red) - 1);
        v[root] += red > 0 ? BigInt(c) : BigInt(-c);
    }
    return v;
}

std::vector<long long> H1Basis::coordinates(const Chain1& cycle) const
{
    const auto v = reduce(cycle);
    std::vector<long long> out(coord_map_.size(), 0);
    for (std::size_t i = 0; i < coord_map_.size(); ++i)
    {
        BigInt acc = 0;
        for (std::size_t k = 0; k < v.size(); ++k)
            if (!v[k].is_zero() && !coord_map_[i][k].is_zero()) acc += coord_map_[i][k] * v[k];
        out[i] = static_cast<long long>(acc);
    }
    return out;
}

bool H1Basis::is_null_homologous(const Chain1& cycle) const
{
    const auto v = reduce(cycle);
    for (std::size_t i = 0; i < u_.size(); ++i)
    {
        BigInt acc = 0;
        for (std::size_t k = 0; k < v.size(); ++k)
            if (!v[k].is_zero() && !u_[i][k].is_zero()) acc += u_[i][k] * v[k];
        if (i < static_cast<std::size_t>(smith_rank_))
        {
            if (acc % divisors_[i] != 0) return false;
        }
        else if (!acc.is_zero())
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Defects and classes

DefectReport find_defect(const State& state, const Network& net, const H1Basis& basis)
{
    DefectReport report;
    for (std::size_t i = 0; i < basis.cycles().size(); ++i)
    {
        try
        {
            const long long d = degree(state, basis.cycles()[i], net);
            report.degrees.emplace_back(d);
            if (d != 0) report.global_defect = true;
        }
        catch (const Error& e)
        {
            if (e.code() != Errc::DiscontinuousOnCycle) throw;
            report.degrees.emplace_back(std::nullopt);
            report.blocked_cycles.push_back(static_cast<int>(i));
        }
    }
    report.seed = find_seed(state, net);
    if (report.seed) report.seed_is_local = basis.is_null_homologous(Chain1::from_loop(*report.seed));
    report.has_defect = report.global_defect || report.seed.has_value();
    return report;
}

std::vector<long long> cohomology_class(const State& state, const Network& net, const H1Basis& basis)
{
    const auto check = is_continuous(net, state);
    if (!check)
        throw Error(Errc::DiscontinuousState, "edge (" + std::to_string((*check.violation)[0]) + "," +
                                                  std::to_string((*check.violation)[1]) + ") is discontinuous");
    std::vector<long long> out;
    for (const auto& c : basis.cycles()) out.push_back(degree(state, c, net));
    return out;
}

State add_states(const State& a, const State& b, const Network& net, const H1Basis* basis)
{
    if (a.n != b.n || a.size() != b.size() || a.size() != net.size())
        throw Error(Errc::InvalidArgument, "states differ in size or alphabet");
    for (std::size_t v = 0; v < a.size(); ++v)
        if (a[v] != 0 && b[v] != 0)
            throw Error(Errc::OverlappingSupports, "node " + std::to_string(v) + " is in both supports");
    for (const auto& [i, j] : net.edges())
        if ((a[i] != 0 && b[j] != 0) || (b[i] != 0 && a[j] != 0))
            throw Error(Errc::OverlappingSupports,
                        "supports meet across edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
    State sum = a;
    for (std::size_t v = 0; v < a.size(); ++v) sum[v] = (a[v] + b[v]) % a.n;

    if (is_continuous(net, a) && is_continuous(net, b))
    {
        if (!is_continuous(net, sum)) throw Error(Errc::InternalConsistency, "sum of continuous states lost continuity");
        if (basis)
        {
            const auto ha = cohomology_class(a, net, *basis);
            const auto hb = cohomology_class(b, net, *basis);
            const auto hs = cohomology_class(sum, net, *basis);
            for (std::size_t i = 0; i < hs.size(); ++i)
                if (hs[i] != ha[i] + hb[i]) throw Error(Errc::InternalConsistency, "class of the sum is not additive");
        }
    }
    return sum;
}

}  // namespace ghm
