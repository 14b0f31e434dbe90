// ghmsim: command line front end for scenario runs.
//
//   ghmsim simulate        --scenario s.json --out dir [--seed N] [--ticks N] [--ps F]
//   ghmsim analyze         ... runs the analyses requested by the scenario
//   ghmsim program         ... initial state from a target class or wave list
//   ghmsim evade           ... adds the evasion game [--grid F]
//   ghmsim montecarlo      ... runs the scenario's montecarlo section
//   ghmsim replicate-paper [--scenario s.json] --out dir
//
// Exit codes: 0 ok, 2 configuration error, 3 failed precondition,
// 4 internal consistency. GHM_LOG_LEVEL sets the log verbosity.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ghm/errors.hpp"
#include "ghm/scenario.hpp"

namespace {

struct Options
{
    std::string scenario;
    std::string out = "ghm_out";
    std::optional<std::uint64_t> seed;
    std::optional<long long> ticks;
    std::optional<double> ps;
    std::optional<double> grid;
};

void add_common(CLI::App* cmd, Options& opt, bool scenario_required)
{
    auto* s = cmd->add_option("--scenario", opt.scenario, "scenario JSON file");
    if (scenario_required) s->required();
    s->check(CLI::ExistingFile);
    cmd->add_option("--out", opt.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", opt.seed, "override the scenario seed");
    cmd->add_option("--ticks", opt.ticks, "override the run length")->check(CLI::NonNegativeNumber);
    cmd->add_option("--ps", opt.ps, "override the link success probability")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--grid", opt.grid, "evasion grid resolution")->check(CLI::PositiveNumber);
}

void apply_overrides(ghm::Scenario& s, const Options& opt)
{
    if (opt.seed) s.seed = *opt.seed;
    if (opt.ticks)
    {
        s.ticks = *opt.ticks;
        std::erase_if(s.dumps, [&](ghm::Tick t) { return t > s.ticks; });
        s.evasion_entry = std::min(s.evasion_entry, s.ticks);
    }
    if (opt.ps)
    {
        s.p_s = *opt.ps;
        if (s.montecarlo) s.montecarlo->p_s = {*opt.ps};
    }
    if (opt.grid) s.evasion_resolution = *opt.grid;
    for (const auto& w : ghm::validate(s)) std::cerr << "warning: " << w << "\n";
}

int report(const ghm::ExperimentResult& r, const std::string& out)
{
    if (r.exit_code != 0)
    {
        std::cerr << "ghmsim: " << r.error << "\n";
        return r.exit_code;
    }
    std::cout << "outputs written to " << out << " (" << r.manifest["files"].size() << " files, manifest.json)\n";
    return 0;
}

void print_summary(const ghm::Json& summary)
{
    const auto& net = summary["network"];
    std::cout << "nodes " << net["nodes"] << ", edges " << net["edges"] << ", connected " << net["connected"] << "\n";
    std::cout << "seed in initial state: " << summary["seeds"]["initial"]["seed_found"] << "\n";
    if (!summary["periodicity"].is_null())
        std::cout << "periodicity onset: " << summary["periodicity"]["onset"] << "\n";
    const auto& a = summary["awake_after_onset"];
    std::cout << "awake fraction from tick " << a["from"] << ": mean " << a["mean"] << ", range [" << a["min"] << ", "
              << a["max"] << "]\n";
    std::cout << "died out: " << summary["died_out"] << ", cohomologically trivial: "
              << summary["cohomologically_trivial"] << "\n";
    if (summary.contains("class"))
        std::cout << "class: initial " << summary["class"]["initial"] << ", final " << summary["class"]["final"] << "\n";
    if (summary.contains("barriers"))
        std::cout << "ticks with every corridor section barred: " << summary["barriers"]["all_sections_fraction"]
                  << "\n";
    if (summary.contains("evasion"))
        std::cout << "evasion: " << summary["evasion"]["outcome"].get<std::string>() << " at tick "
                  << summary["evasion"]["tick"] << "\n";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Greenberg-Hastings dynamics on sensor networks in hallway domains"};
    app.require_subcommand(1);
    Options opt;
    auto* simulate = app.add_subcommand("simulate", "run the automaton; write snapshots and the summary");
    auto* analyze = app.add_subcommand("analyze", "run plus the analyses listed in the scenario");
    auto* program = app.add_subcommand("program", "start from a programmed class or wave list");
    auto* evade = app.add_subcommand("evade", "run plus the evasion game");
    auto* montecarlo = app.add_subcommand("montecarlo", "Monte Carlo estimators of the montecarlo section");
    auto* replicate = app.add_subcommand("replicate-paper", "the 16250-node hallway replication with checks");
    for (auto* cmd : {simulate, analyze, program, evade, montecarlo}) add_common(cmd, opt, true);
    add_common(replicate, opt, false);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ghm::ErrorFamily::Config);
    }

    try
    {
        ghm::Scenario s = opt.scenario.empty() ? ghm::paper_scenario() : ghm::parse_scenario(opt.scenario);
        if (simulate->parsed())
            s.analyses = {};
        else if (program->parsed())
        {
            if (s.initial != "class" && s.initial != "waves")
                throw ghm::Error(ghm::Errc::ValidationError, "program needs initial.kind class or waves");
            s.analyses.cls = s.analyses.continuity = true;
        }
        else if (evade->parsed())
            s.analyses.evasion = true;
        else if (replicate->parsed())
            s.analyses.barriers = true;
        apply_overrides(s, opt);

        if (montecarlo->parsed())
        {
            const auto r = ghm::run_montecarlo(s, opt.out);
            if (r.exit_code == 0) std::cout << r.summary.dump(2) << "\n";
            return report(r, opt.out);
        }
        const auto r = ghm::run_experiment(s, opt.out);
        if (r.exit_code != 0) return report(r, opt.out);
        print_summary(r.summary);
        if (replicate->parsed())
        {
            const auto c = ghm::check_replication(r.summary);
            const int n = s.n;
            std::cout << (c.awake_ok ? "PASS" : "FAIL") << " awake fraction after onset in [" << 1.0 / (2 * n) << ", "
                      << 2.0 / n << "]: [" << c.awake_min << ", " << c.awake_max << "]\n";
            std::cout << (c.seed_ok ? "PASS" : "FAIL") << " seed in the initial state\n";
            std::cout << (c.barrier_ok ? "PASS" : "FAIL") << " corridor sections barred on >= 95% of window ticks: "
                      << c.barrier_fraction << "\n";
        }
        return report(r, opt.out);
    }
    catch (const ghm::Error& e)
    {
        std::cerr << "ghmsim: " << e.what() << "\n";
        return e.exit_code();
    }
}
