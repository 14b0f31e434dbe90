#include "ghm/evasion.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <string_view>

#include "ghm/errors.hpp"

namespace ghm {

namespace {

void finish_csr(CellSpace& cs, const std::vector<std::vector<std::uint32_t>>& lists)
{
    cs.adj_offsets.assign(1, 0);
    for (const auto& l : lists)
    {
        cs.adj.insert(cs.adj.end(), l.begin(), l.end());
        cs.adj_offsets.push_back(static_cast<std::uint32_t>(cs.adj.size()));
    }
}

// Buckets cell centers by the coverage radius so marking a disk touches only
// nearby cells.
class CoverageIndex
{
  public:
    CoverageIndex(const CellSpace& cells, double radius) : cells_(&cells), radius_(radius)
    {
        if (cells.size() == 0) return;
        box_ = {cells.centers[0].x, cells.centers[0].y, cells.centers[0].x, cells.centers[0].y};
        for (Point p : cells.centers)
        {
            box_.xmin = std::min(box_.xmin, p.x);
            box_.ymin = std::min(box_.ymin, p.y);
            box_.xmax = std::max(box_.xmax, p.x);
            box_.ymax = std::max(box_.ymax, p.y);
        }
        side_ = std::max(radius, 1e-9);
        nx_ = static_cast<int>(box_.width() / side_) + 1;
        ny_ = static_cast<int>(box_.height() / side_) + 1;
        buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
        for (std::uint32_t c = 0; c < cells.size(); ++c)
        {
            const auto [i, j] = bucket_of(cells.centers[c]);
            buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(c);
        }
    }

    void mark(Point p, std::vector<char>& covered) const
    {
        if (buckets_.empty()) return;
        const double r2 = radius_ * radius_;
        const auto [ci, cj] = bucket_of(p);
        for (int j = std::max(0, cj - 1); j <= std::min(ny_ - 1, cj + 1); ++j)
            for (int i = std::max(0, ci - 1); i <= std::min(nx_ - 1, ci + 1); ++i)
                for (std::uint32_t c : buckets_[static_cast<std::size_t>(j) * nx_ + i])
                    if (dist2(cells_->centers[c], p) <= r2) covered[c] = 1;
    }

  private:
    std::pair<int, int> bucket_of(Point p) const
    {
        const int i = static_cast<int>(std::floor((p.x - box_.xmin) / side_));
        const int j = static_cast<int>(std::floor((p.y - box_.ymin) / side_));
        return {std::clamp(i, -2, nx_ + 1), std::clamp(j, -2, ny_ + 1)};
    }

    const CellSpace* cells_;
    double radius_;
    Rect box_;
    double side_ = 1.0;
    int nx_ = 0;
    int ny_ = 0;
    std::vector<std::vector<std::uint32_t>> buckets_;
};

std::size_t schedule_index(const EvasionInstance& inst, Tick t)
{
    const auto T = static_cast<Tick>(inst.schedule.size());
    return static_cast<std::size_t>(inst.repeats ? t % T : t);
}

std::vector<char> covered_at(const EvasionInstance& inst, const CoverageIndex& index, std::size_t cell_count,
                             Tick t)
{
    std::vector<char> covered(cell_count, 0);
    for (NodeId v : inst.schedule[schedule_index(inst, t)]) index.mark(inst.network->coverage_center(v), covered);
    return covered;
}

// Component id per uncovered cell, -1 for covered cells.
std::vector<std::int32_t> label_components(const CellSpace& cells, const std::vector<char>& covered, int& count)
{
    std::vector<std::int32_t> label(cells.size(), -1);
    std::vector<std::uint32_t> queue;
    count = 0;
    for (std::uint32_t s = 0; s < cells.size(); ++s)
    {
        if (covered[s] || label[s] >= 0) continue;
        label[s] = count;
        queue.assign(1, s);
        while (!queue.empty())
        {
            const std::uint32_t c = queue.back();
            queue.pop_back();
            for (std::uint32_t d : cells.neighbors(c))
                if (!covered[d] && label[d] < 0)
                {
                    label[d] = count;
                    queue.push_back(d);
                }
        }
        ++count;
    }
    return label;
}

void check_instance(const EvasionInstance& inst, const CellSpace& cells)
{
    if (!inst.network) throw Error(Errc::InvalidArgument, "evasion instance has no network");
    if (inst.schedule.empty()) throw Error(Errc::InvalidArgument, "empty schedule");
    if (inst.entry_tick < 0 || inst.entry_tick >= static_cast<Tick>(inst.schedule.size()))
        throw Error(Errc::InvalidArgument, "entry tick outside the schedule");
    if (!inst.state_hash.empty() && inst.state_hash.size() != inst.schedule.size())
        throw Error(Errc::InvalidArgument, "state hashes must match the schedule length");
    if (cells.resolution > 0.5 * inst.network->coverage_radius() * (1 + 1e-12))
        throw Error(Errc::InvalidArgument, "cell resolution must not exceed half the coverage radius");
}

}  // namespace

CellSpace grid_cells(const HallwayDomain& domain, double resolution, std::span<const Rect> region)
{
    if (!(resolution > 0)) throw Error(Errc::InvalidArgument, "resolution must be positive");
    const RasterGrid grid(domain, resolution);
    CellSpace cs;
    cs.resolution = resolution;
    std::vector<std::int64_t> id(grid.cell_count(), -1);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
        {
            const Point c = grid.center(i, j);
            if (!domain.contains(c)) continue;
            if (!region.empty() && std::none_of(region.begin(), region.end(), [&](const Rect& r) { return r.contains(c); }))
                continue;
            id[grid.index(i, j)] = static_cast<std::int64_t>(cs.centers.size());
            cs.centers.push_back(c);
            cs.label.push_back({i, j});
        }
    std::vector<std::vector<std::uint32_t>> lists(cs.size());
    for (std::size_t c = 0; c < cs.size(); ++c)
    {
        const auto [i, j] = cs.label[c];
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k)
        {
            const int a = i + di[k], b = j + dj[k];
            if (a < 0 || b < 0 || a >= grid.nx || b >= grid.ny) continue;
            const auto other = id[grid.index(a, b)];
            if (other >= 0) lists[c].push_back(static_cast<std::uint32_t>(other));
        }
    }
    finish_csr(cs, lists);
    return cs;
}

CellSpace skeleton_cells(const SkeletonGraph& graph, double resolution)
{
    if (!(resolution > 0)) throw Error(Errc::InvalidArgument, "resolution must be positive");
    CellSpace cs;
    cs.resolution = resolution;
    std::vector<std::vector<std::uint32_t>> lists;
    std::vector<std::vector<std::uint32_t>> at_vertex(graph.vertices.size());
    for (std::size_t e = 0; e < graph.edges.size(); ++e)
    {
        const auto& edge = graph.edges[e];
        const auto& poly = edge.polyline;
        const double L = edge.length();
        const int k = std::max(1, static_cast<int>(std::ceil(L / resolution)));
        const auto first = static_cast<std::uint32_t>(cs.size());
        std::size_t seg = 0;
        double seg_start = 0.0;
        for (int m = 0; m < k; ++m)
        {
            const double s = (m + 0.5) * L / k;
            while (seg + 2 < poly.size() && seg_start + dist(poly[seg], poly[seg + 1]) < s)
            {
                seg_start += dist(poly[seg], poly[seg + 1]);
                ++seg;
            }
            const double len = dist(poly[seg], poly[seg + 1]);
            const double t = len > 0 ? (s - seg_start) / len : 0.0;
            cs.centers.push_back(poly[seg] + t * (poly[seg + 1] - poly[seg]));
            cs.label.push_back({static_cast<int>(e), m});
            lists.emplace_back();
            if (m > 0)
            {
                lists[first + m].push_back(first + m - 1);
                lists[first + m - 1].push_back(first + m);
            }
        }
        at_vertex[static_cast<std::size_t>(edge.a)].push_back(first);
        at_vertex[static_cast<std::size_t>(edge.b)].push_back(first + static_cast<std::uint32_t>(k - 1));
    }
    for (const auto& cells : at_vertex)
        for (std::uint32_t a : cells)
            for (std::uint32_t b : cells)
                if (a != b) lists[a].push_back(b);
    for (auto& l : lists)
    {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
    }
    finish_csr(cs, lists);
    return cs;
}

EvasionInstance instance_from_trace(const Network& net, const RunTrace& trace, Tick entry_tick,
                                    bool deterministic, Phase awake_phase)
{
    if (entry_tick < trace.first_retained() || entry_tick > trace.last_tick())
        throw Error(Errc::InsufficientTrace, "entry tick is not retained in the trace");
    EvasionInstance inst;
    inst.network = &net;
    inst.entry_tick = entry_tick;
    const auto T = static_cast<std::size_t>(trace.last_tick() + 1);
    inst.schedule.resize(T);
    if (deterministic) inst.state_hash.assign(T, 0);
    for (Tick t = trace.first_retained(); t <= trace.last_tick(); ++t)
    {
        const State& s = trace.at(t);
        auto& awake = inst.schedule[static_cast<std::size_t>(t)];
        for (std::size_t v = 0; v < s.values.size(); ++v)
            if (s.values[v] == awake_phase) awake.push_back(static_cast<NodeId>(v));
        if (deterministic)
        {
            const std::string_view bytes(reinterpret_cast<const char*>(s.values.data()),
                                         s.values.size() * sizeof(Phase));
            inst.state_hash[static_cast<std::size_t>(t)] = std::hash<std::string_view>{}(bytes);
        }
    }
    return inst;
}

std::vector<char> coverage_mask(const EvasionInstance& instance, const CellSpace& cells, Tick tick)
{
    if (!instance.network) throw Error(Errc::InvalidArgument, "evasion instance has no network");
    if (tick < 0 || (!instance.repeats && tick >= static_cast<Tick>(instance.schedule.size())))
        throw Error(Errc::InvalidArgument, "tick outside the schedule");
    const CoverageIndex index(cells, instance.network->coverage_radius());
    return covered_at(instance, index, cells.size(), tick);
}

const char* to_string(Outcome outcome)
{
    switch (outcome)
    {
        case Outcome::CapturedByTick: return "CapturedByTick";
        case Outcome::SurvivesHorizon: return "SurvivesHorizon";
        case Outcome::SurvivesForever: return "SurvivesForever";
    }
    return "?";
}

Verdict decide(const EvasionInstance& instance, const CellSpace& cells, const DecideOptions& options)
{
    check_instance(instance, cells);
    const CoverageIndex index(cells, instance.network->coverage_radius());
    const auto T = static_cast<Tick>(instance.schedule.size());
    const bool hashed = !instance.state_hash.empty();
    const bool recurrent = hashed || instance.repeats;
    const Tick last = instance.repeats ? instance.entry_tick + std::max(options.max_repeat_ticks, T) : T - 1;

    Verdict verdict;
    verdict.resolution = cells.resolution;

    std::vector<std::vector<std::int32_t>> label_hist;
    std::vector<std::vector<char>> reach_hist;
    // recurrence key: (schedule state, reachable-set hash) -> ticks seen
    std::map<std::pair<std::uint64_t, std::size_t>, std::vector<Tick>> seen;

    std::vector<char> reach_prev;
    for (Tick t = instance.entry_tick; t <= last; ++t)
    {
        const auto covered = covered_at(instance, index, cells.size(), t);
        int count = 0;
        auto label = label_components(cells, covered, count);
        std::vector<char> comp_reach(static_cast<std::size_t>(count), t == instance.entry_tick ? 1 : 0);
        if (t > instance.entry_tick)
            for (std::size_t c = 0; c < cells.size(); ++c)
                if (reach_prev[c] && label[c] >= 0) comp_reach[static_cast<std::size_t>(label[c])] = 1;
        std::vector<char> reach(cells.size(), 0);
        bool any = false;
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (label[c] >= 0 && comp_reach[static_cast<std::size_t>(label[c])])
            {
                reach[c] = 1;
                any = true;
            }
        if (!any)
        {
            verdict.outcome = Outcome::CapturedByTick;
            verdict.tick = t;
            return verdict;
        }
        if (options.witness || recurrent)
        {
            if (options.witness) label_hist.push_back(std::move(label));
            reach_hist.push_back(reach);
        }
        verdict.tick = t;

        bool closed = false;
        if (recurrent)
        {
            const std::uint64_t state_key =
                hashed ? instance.state_hash[schedule_index(instance, t)] : static_cast<std::uint64_t>(t % T);
            const std::string_view bytes(reach.data(), reach.size());
            const std::pair key{state_key, std::hash<std::string_view>{}(bytes)};
            auto& ticks = seen[key];
            for (Tick earlier : ticks)
                if (reach_hist[static_cast<std::size_t>(earlier - instance.entry_tick)] == reach)
                {
                    verdict.outcome = Outcome::SurvivesForever;
                    verdict.recurrence = std::array<Tick, 2>{earlier, t};
                    closed = true;
                    break;
                }
            ticks.push_back(t);
        }
        reach_prev = std::move(reach);
        if (closed) break;
    }
    if (!verdict.recurrence) verdict.outcome = Outcome::SurvivesHorizon;

    if (options.witness)
    {
        const Tick end = verdict.tick;
        const auto at = [&](Tick t) { return static_cast<std::size_t>(t - instance.entry_tick); };
        std::vector<WitnessStep> path(static_cast<std::size_t>(end - instance.entry_tick + 1));
        const auto& final_reach = reach_hist[at(end)];
        std::uint32_t c = static_cast<std::uint32_t>(std::find(final_reach.begin(), final_reach.end(), 1) - final_reach.begin());
        path.back() = {end, c};
        for (Tick t = end - 1; t >= instance.entry_tick; --t)
        {
            const auto comp = label_hist[at(t + 1)][c];
            const auto& reach_t = reach_hist[at(t)];
            std::uint32_t next = static_cast<std::uint32_t>(cells.size());
            for (std::uint32_t x = 0; x < cells.size(); ++x)
                if (label_hist[at(t + 1)][x] == comp && reach_t[x])
                {
                    next = x;
                    break;
                }
            if (next == cells.size()) throw Error(Errc::InternalConsistency, "witness backtracking lost the evader");
            c = next;
            path[at(t)] = {t, c};
        }
        verdict.witness = std::move(path);
    }
    return verdict;
}

Verdict decide_1d(const EvasionInstance& instance, const SkeletonGraph& graph, double resolution,
                  const DecideOptions& options)
{
    return decide(instance, skeleton_cells(graph, resolution), options);
}

bool verify_witness(const EvasionInstance& instance, const CellSpace& cells, const Verdict& verdict)
{
    if (verdict.outcome == Outcome::CapturedByTick || verdict.witness.empty()) return false;
    const CoverageIndex index(cells, instance.network->coverage_radius());
    const auto& w = verdict.witness;
    if (w.front().tick != instance.entry_tick || w.back().tick != verdict.tick) return false;
    auto covered = covered_at(instance, index, cells.size(), w.front().tick);
    for (std::size_t k = 0; k < w.size(); ++k)
    {
        if (w[k].tick != instance.entry_tick + static_cast<Tick>(k) || w[k].cell >= cells.size()) return false;
        if (covered[w[k].cell]) return false;
        if (k + 1 == w.size()) break;
        covered = covered_at(instance, index, cells.size(), w[k + 1].tick);
        // path from w[k].cell to w[k + 1].cell through cells uncovered at the next tick
        if (covered[w[k].cell]) return false;
        std::vector<char> seen(cells.size(), 0);
        std::deque<std::uint32_t> q{w[k].cell};
        seen[w[k].cell] = 1;
        bool found = false;
        while (!q.empty() && !found)
        {
            const auto c = q.front();
            q.pop_front();
            if (c == w[k + 1].cell) found = true;
            for (auto d : cells.neighbors(c))
                if (!covered[d] && !seen[d])
                {
                    seen[d] = 1;
                    q.push_back(d);
                }
        }
        if (!found) return false;
    }
    return true;
}

RefinedVerdict decide_refined(const EvasionInstance& instance, const HallwayDomain& domain, double resolution,
                              std::span<const Rect> region, int max_halvings)
{
    RefinedVerdict out;
    DecideOptions opt;
    opt.witness = false;
    double rho = resolution;
    for (int k = 0; k <= max_halvings; ++k, rho *= 0.5)
    {
        out.verdict = decide(instance, grid_cells(domain, rho, region), opt);
        out.resolutions.push_back(rho);
        out.outcomes.push_back(out.verdict.outcome);
        const auto m = out.outcomes.size();
        if (m >= 3 && out.outcomes[m - 1] == out.outcomes[m - 2] && out.outcomes[m - 2] == out.outcomes[m - 3])
        {
            out.stable = true;
            break;
        }
    }
    return out;
}

}  // namespace ghm
