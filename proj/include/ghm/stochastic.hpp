#pragma once

// Monte Carlo estimators: seed existence in random initial states, die-out
// of nodes far from every defect, defect survival under lossy links, and the
// persistence of a programmed global wave under lossy links. Trials run in
// parallel on independent counter-based streams and are reduced in trial
// order, so results do not depend on the thread count.

#include <cstdint>
#include <optional>
#include <vector>

#include "ghm/domain.hpp"
#include "ghm/engine.hpp"
#include "ghm/network.hpp"
#include "ghm/state.hpp"
#include "ghm/topology.hpp"

namespace ghm {

struct Estimate
{
    std::size_t successes = 0;
    std::size_t trials = 0;
    double value = 0.0;
    double lo = 0.0;  // 95% Wilson interval
    double hi = 0.0;
};

Estimate wilson(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct MonteCarloConfig
{
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    int n = 3;
    std::vector<std::size_t> node_counts;
    double r = 1.0;
    double eps = 1.0;
    double p_s = 1.0;
    bool per_lifetime = false;
    Tick T = 100;
    double cell_side = 0.0;  // 0 selects r / sqrt(2)
    int N_tilde = 0;         // 0 uses the largest degree seen in the trials
    unsigned threads = 0;    // 0 uses the hardware concurrency
};

/// Throws ValidationError listing every violated field.
void validate(const MonteCarloConfig& config);

struct SeedProbabilityRow
{
    std::size_t node_count = 0;
    Estimate estimate;
    std::size_t cells = 0;  // |I|: grid pieces of side cell_side meeting the domain
    /// 1 - n^|I| (1 - 1/n)^|X|, when it lies in (0, 1).
    std::optional<double> analytic_bound;
};

std::vector<SeedProbabilityRow> estimate_seed_probability(const HallwayDomain& domain,
                                                          const MonteCarloConfig& config);

struct DieoutRow
{
    std::size_t node_count = 0;
    Estimate estimate;
    int N_tilde = 0;
    /// 1 - |X| (1 - 2^-N)^((n - 1) / 2), when it lies in (0, 1).
    std::optional<double> analytic_bound;
    double mean_far_nodes = 0.0;  // nodes more than 2n hops from every defect
};

std::vector<DieoutRow> estimate_far_node_dieout(const HallwayDomain& domain, const MonteCarloConfig& config);

struct SurvivalCurve
{
    /// Index t: fraction of runs with no seed in the state at tick t.
    std::vector<Estimate> death_fraction;
    /// Index t: runs whose first seedless tick is t.
    std::vector<std::size_t> death_time_histogram;
    std::size_t trials = 0;
};

/// Throws NoInitialDefect when the initial state has no seed.
SurvivalCurve defect_survival_curve(const Network& net, const State& initial, double p_s, Tick T,
                                    std::size_t trials, std::uint64_t seed, bool per_lifetime = false,
                                    unsigned threads = 0);

/// Fraction of lossy runs after which some basis cycle still carries a
/// nonzero degree (cycles the state is discontinuous on are skipped).
Estimate wave_robustness(const Network& net, const H1Basis& basis, const State& initial, double p_s, Tick T,
                         std::size_t trials, std::uint64_t seed, unsigned threads = 0);

}  // namespace ghm
