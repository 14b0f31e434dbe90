#include "ghm/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <queue>
#include <sstream>
#include <thread>

#include "ghm/errors.hpp"
#include "ghm/rng.hpp"

namespace ghm {

namespace {

// Runs body(i) for i in [0, count) on a small thread pool; results are
// written by index, so the reduction order is fixed.
template <class Body>
void parallel_trials(std::size_t count, unsigned threads, Body body)
{
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) body(i);
    };
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

State uniform_state(std::size_t count, int n, Rng& rng)
{
    State s = State::zeros(count, n);
    for (auto& v : s.values) v = static_cast<Phase>(rng.below(static_cast<std::uint64_t>(n)));
    return s;
}

std::optional<double> in_unit_interval(double x)
{
    if (x > 0.0 && x < 1.0) return x;
    return std::nullopt;
}

std::size_t decomposition_cells(const HallwayDomain& domain, double side)
{
    // Square pieces of a grid anchored at the bounding box that meet the
    // domain; each piece is intersected with the union's cell rectangles.
    const Rect box = domain.bounding_box();
    const auto nx = static_cast<long>(std::ceil(box.width() / side - 1e-9));
    const auto ny = static_cast<long>(std::ceil(box.height() / side - 1e-9));
    std::size_t count = 0;
    for (long j = 0; j < ny; ++j)
        for (long i = 0; i < nx; ++i)
        {
            const Rect piece{box.xmin + i * side, box.ymin + j * side, box.xmin + (i + 1) * side,
                             box.ymin + (j + 1) * side};
            for (const Rect& c : domain.cells())
            {
                Rect overlap;
                if (intersect(piece, c, overlap) && overlap.area() > 0)
                {
                    ++count;
                    break;
                }
            }
        }
    return count;
}

std::uint64_t trial_key(std::uint64_t seed, std::size_t row, std::size_t trial)
{
    return derive_key(derive_key(seed, row), trial);
}

}  // namespace

Estimate wilson(std::size_t successes, std::size_t trials, double z)
{
    Estimate e;
    e.successes = successes;
    e.trials = trials;
    if (trials == 0)
    {
        e.hi = 1.0;
        return e;
    }
    const double nt = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nt;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nt;
    const double center = (p + z2 / (2 * nt)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / nt + z2 / (4 * nt * nt)) / denom;
    e.value = p;
    e.lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
    e.hi = successes == trials ? 1.0 : std::min(1.0, center + half);
    return e;
}

void validate(const MonteCarloConfig& config)
{
    std::vector<std::string> problems;
    if (config.trials < 1) problems.push_back("trials must be at least 1");
    if (config.n < 3) problems.push_back("n must be at least 3");
    if (!(config.r > 0)) problems.push_back("r must be positive");
    if (!(config.eps > 0)) problems.push_back("eps must be positive");
    if (!(config.p_s > 0 && config.p_s <= 1)) problems.push_back("p_s must lie in (0, 1]");
    if (config.T < 0) problems.push_back("T must be non-negative");
    if (config.cell_side < 0 || config.cell_side > config.r / std::sqrt(2.0) * (1 + 1e-12))
        problems.push_back("cell_side must lie in (0, r/sqrt(2)]");
    if (!problems.empty())
    {
        std::ostringstream msg;
        for (std::size_t k = 0; k < problems.size(); ++k) msg << (k ? "; " : "") << problems[k];
        throw Error(Errc::ValidationError, msg.str());
    }
}

std::vector<SeedProbabilityRow> estimate_seed_probability(const HallwayDomain& domain,
                                                          const MonteCarloConfig& config)
{
    validate(config);
    const double side = config.cell_side > 0 ? config.cell_side : config.r / std::sqrt(2.0);
    const std::size_t cells = decomposition_cells(domain, side);
    std::vector<SeedProbabilityRow> rows;
    for (std::size_t row = 0; row < config.node_counts.size(); ++row)
    {
        const std::size_t count = config.node_counts[row];
        std::vector<char> hit(config.trials, 0);
        parallel_trials(config.trials, config.threads, [&](std::size_t trial) {
            const auto key = trial_key(config.seed, row, trial);
            Rng rng(key, 1);
            const auto net = build_network(sample_points(domain, count, key), config.r, config.eps);
            hit[trial] = find_seed(uniform_state(count, config.n, rng), net).has_value();
        });
        SeedProbabilityRow out;
        out.node_count = count;
        out.cells = cells;
        out.estimate = wilson(static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1)), config.trials);
        const double log_fail = static_cast<double>(cells) * std::log(static_cast<double>(config.n)) +
                                static_cast<double>(count) * std::log1p(-1.0 / config.n);
        out.analytic_bound = in_unit_interval(-std::expm1(log_fail));
        rows.push_back(out);
    }
    return rows;
}

std::vector<DieoutRow> estimate_far_node_dieout(const HallwayDomain& domain, const MonteCarloConfig& config)
{
    validate(config);
    const int n = config.n;
    std::vector<DieoutRow> rows;
    for (std::size_t row = 0; row < config.node_counts.size(); ++row)
    {
        const std::size_t count = config.node_counts[row];
        std::vector<char> holds(config.trials, 0);
        std::vector<int> max_degree(config.trials, 0);
        std::vector<std::size_t> far(config.trials, 0);
        parallel_trials(config.trials, config.threads, [&](std::size_t trial) {
            const auto key = trial_key(config.seed, row, trial);
            Rng rng(key, 1);
            const auto net = build_network(sample_points(domain, count, key), config.r, config.eps);
            for (std::size_t v = 0; v < net.size(); ++v)
                max_degree[trial] = std::max(max_degree[trial], static_cast<int>(net.degree(static_cast<NodeId>(v))));

            // Defects: seed nodes of the first n states, plus loops of basis
            // cycles carrying a nonzero degree in the initial state.
            State s = uniform_state(count, n, rng);
            std::vector<char> source(count, 0);
            if (net.connected())
            {
                const H1Basis basis = homology_basis(net);
                const DefectReport report = find_defect(s, net, basis);
                for (std::size_t i = 0; i < report.degrees.size(); ++i)
                    if (report.degrees[i] && *report.degrees[i] != 0)
                        for (const auto& [edge, c] : basis.cycles()[i].terms())
                            source[edge[0]] = source[edge[1]] = 1;
            }
            State u = s;
            for (int t = 0; t < 2 * n - 2; ++t)
            {
                if (t < n)
                {
                    const auto on_seed = seed_nodes(u, net);
                    for (std::size_t v = 0; v < count; ++v) source[v] |= on_seed[v];
                }
                u = step(net, u);
            }
            // multi-source BFS hop distances
            std::vector<int> hops(count, -1);
            std::queue<NodeId> q;
            for (std::size_t v = 0; v < count; ++v)
                if (source[v])
                {
                    hops[v] = 0;
                    q.push(static_cast<NodeId>(v));
                }
            while (!q.empty())
            {
                const NodeId v = q.front();
                q.pop();
                for (NodeId w : net.neighbors(v))
                    if (hops[w] < 0)
                    {
                        hops[w] = hops[v] + 1;
                        q.push(w);
                    }
            }
            bool ok = true;
            for (std::size_t v = 0; v < count; ++v)
                if (hops[v] < 0 || hops[v] > 2 * n)
                {
                    ++far[trial];
                    if (u[static_cast<NodeId>(v)] != 0) ok = false;
                }
            holds[trial] = ok;
        });
        DieoutRow out;
        out.node_count = count;
        out.estimate = wilson(static_cast<std::size_t>(std::count(holds.begin(), holds.end(), 1)), config.trials);
        out.N_tilde = config.N_tilde > 0 ? config.N_tilde : *std::max_element(max_degree.begin(), max_degree.end());
        const double fail = static_cast<double>(count) *
                            std::pow(1.0 - std::pow(0.5, out.N_tilde), 0.5 * (n - 1));
        out.analytic_bound = in_unit_interval(1.0 - fail);
        double total = 0;
        for (auto f : far) total += static_cast<double>(f);
        out.mean_far_nodes = total / static_cast<double>(config.trials);
        rows.push_back(out);
    }
    return rows;
}

SurvivalCurve defect_survival_curve(const Network& net, const State& initial, double p_s, Tick T,
                                    std::size_t trials, std::uint64_t seed, bool per_lifetime, unsigned threads)
{
    if (!find_seed(initial, net)) throw Error(Errc::NoInitialDefect, "the initial state has no seed");
    if (!(p_s > 0 && p_s <= 1)) throw Error(Errc::InvalidArgument, "p_s must lie in (0, 1]");
    if (T < 0 || trials < 1) throw Error(Errc::InvalidArgument, "need T >= 0 and at least one trial");
    const auto ticks = static_cast<std::size_t>(T) + 1;
    // dead[trial][t]: no seed at tick t
    std::vector<std::vector<char>> dead(trials, std::vector<char>(ticks, 0));
    parallel_trials(trials, threads, [&](std::size_t trial) {
        const LinkFailure failure{p_s, derive_key(seed, trial), per_lifetime};
        State s = initial;
        for (Tick t = 0; t <= T; ++t)
        {
            if (t > 0)
            {
                if (p_s < 1)
                {
                    const auto mask = link_mask(net, failure, t - 1);
                    s = step(net, s, &mask);
                }
                else
                    s = step(net, s);
            }
            dead[trial][static_cast<std::size_t>(t)] = !find_seed(s, net).has_value();
        }
    });
    SurvivalCurve curve;
    curve.trials = trials;
    curve.death_time_histogram.assign(ticks, 0);
    for (std::size_t t = 0; t < ticks; ++t)
    {
        std::size_t k = 0;
        for (const auto& d : dead) k += d[t];
        curve.death_fraction.push_back(wilson(k, trials));
    }
    for (const auto& d : dead)
    {
        const auto first = std::find(d.begin(), d.end(), 1);
        if (first != d.end()) ++curve.death_time_histogram[static_cast<std::size_t>(first - d.begin())];
    }
    return curve;
}

Estimate wave_robustness(const Network& net, const H1Basis& basis, const State& initial, double p_s, Tick T,
                         std::size_t trials, std::uint64_t seed, unsigned threads)
{
    std::vector<char> kept(trials, 0);
    parallel_trials(trials, threads, [&](std::size_t trial) {
        RunOptions opt;
        opt.ticks = T;
        opt.snapshot_capacity = 1;
        if (p_s < 1) opt.link_failure = LinkFailure{p_s, derive_key(seed, trial), false};
        const auto tr = run(net, initial, opt);
        for (const auto& z : basis.cycles())
        {
            try
            {
                if (degree(tr.final_state, z, net) != 0)
                {
                    kept[trial] = 1;
                    break;
                }
            }
            catch (const Error&)
            {
                // discontinuous on this cycle
            }
        }
    });
    return wilson(static_cast<std::size_t>(std::count(kept.begin(), kept.end(), 1)), trials);
}

}  // namespace ghm
