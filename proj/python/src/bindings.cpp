// Python bindings: domains, networks, the automaton, topology, programmed
// waves, evasion, estimators, and scenario runs. Point sets and states are
// exchanged as numpy arrays; errors surface as ghmnet.GhmError.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ghm/errors.hpp"
#include "ghm/evasion.hpp"
#include "ghm/io.hpp"
#include "ghm/rng.hpp"
#include "ghm/scenario.hpp"
#include "ghm/stochastic.hpp"
#include "ghm/waves.hpp"

namespace py = pybind11;
using namespace ghm;

namespace {

using PointArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using PhaseArray = py::array_t<Phase, py::array::c_style | py::array::forcecast>;

std::vector<Point> to_points(const PointArray& a)
{
    if (a.ndim() != 2 || a.shape(1) != 2) throw py::value_error("points must have shape (N, 2)");
    const auto v = a.unchecked<2>();
    std::vector<Point> out(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) out[static_cast<std::size_t>(i)] = {v(i, 0), v(i, 1)};
    return out;
}

PointArray from_points(const std::vector<Point>& pts)
{
    PointArray out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < pts.size(); ++i)
    {
        v(static_cast<py::ssize_t>(i), 0) = pts[i].x;
        v(static_cast<py::ssize_t>(i), 1) = pts[i].y;
    }
    return out;
}

State to_state(const PhaseArray& a, int n, std::size_t expected)
{
    if (a.ndim() != 1) throw py::value_error("state must be one-dimensional");
    State s(std::vector<Phase>(a.data(), a.data() + a.size()), n);
    validate_state(s, expected);
    return s;
}

PhaseArray from_state(const State& s) { return PhaseArray(static_cast<py::ssize_t>(s.size()), s.values.data()); }

std::vector<Rect> to_rects(const std::vector<std::array<double, 4>>& rects)
{
    std::vector<Rect> out;
    for (const auto& r : rects) out.push_back({r[0], r[1], r[2], r[3]});
    return out;
}

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict estimate_dict(const Estimate& e)
{
    py::dict d;
    d["successes"] = e.successes;
    d["trials"] = e.trials;
    d["value"] = e.value;
    d["lo"] = e.lo;
    d["hi"] = e.hi;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Greenberg-Hastings dynamics on sensor networks in hallway domains.";

    static py::exception<Error> ghm_error(m, "GhmError");
    py::register_exception_translator([](std::exception_ptr p) {
        try
        {
            if (p) std::rethrow_exception(p);
        }
        catch (const Error& e)
        {
            py::object exc = py::reinterpret_borrow<py::object>(ghm_error.ptr())(e.what());
            exc.attr("code") = to_string(e.code());
            exc.attr("exit_code") = e.exit_code();
            PyErr_SetObject(ghm_error.ptr(), exc.ptr());
        }
    });

    // domains
    py::class_<HallwayDomain>(m, "HallwayDomain")
        .def_property_readonly("genus", &HallwayDomain::genus)
        .def_property_readonly("area", &HallwayDomain::area)
        .def_property_readonly("rects",
                               [](const HallwayDomain& d) {
                                   std::vector<std::array<double, 4>> out;
                                   for (const auto& r : d.rects()) out.push_back({r.xmin, r.ymin, r.xmax, r.ymax});
                                   return out;
                               })
        .def_property_readonly("skeleton_edges", [](const HallwayDomain& d) { return d.skeleton().edges.size(); })
        .def("contains", [](const HallwayDomain& d, double x, double y) { return d.contains({x, y}); },
             py::arg("x"), py::arg("y"))
        .def(
            "sample",
            [](const HallwayDomain& d, std::size_t count, std::uint64_t seed) {
                return from_points(sample_points(d, count, seed));
            },
            py::arg("count"), py::arg("seed"), "i.i.d. uniform points, shape (count, 2)");
    m.def("build_domain", [](const std::vector<std::array<double, 4>>& rects) { return build_domain(to_rects(rects)); },
          py::arg("rects"), "Union of axis-aligned rectangles (xmin, ymin, xmax, ymax).");
    m.def(
        "hallway_grid_rects",
        [](double size, int bars, double width) {
            std::vector<std::array<double, 4>> out;
            for (const auto& r : hallway_grid_rects(size, bars, width)) out.push_back({r.xmin, r.ymin, r.xmax, r.ymax});
            return out;
        },
        py::arg("size"), py::arg("bars"), py::arg("width"));

    // networks
    py::class_<Network>(m, "Network")
        .def_property_readonly("size", &Network::size)
        .def("__len__", &Network::size)
        .def_property_readonly("comm_radius", &Network::comm_radius)
        .def_property_readonly("coverage_radius", &Network::coverage_radius)
        .def_property_readonly("positions", [](const Network& net) { return from_points(net.positions()); })
        .def_property_readonly("edges",
                               [](const Network& net) {
                                   py::array_t<NodeId> out(
                                       {static_cast<py::ssize_t>(net.edges().size()), py::ssize_t{2}});
                                   auto v = out.mutable_unchecked<2>();
                                   for (std::size_t e = 0; e < net.edges().size(); ++e)
                                   {
                                       v(static_cast<py::ssize_t>(e), 0) = net.edges()[e][0];
                                       v(static_cast<py::ssize_t>(e), 1) = net.edges()[e][1];
                                   }
                                   return out;
                               })
        .def_property_readonly("triangle_count", [](const Network& net) { return net.triangles().size(); })
        .def("neighbors",
             [](const Network& net, NodeId v) {
                 if (v < 0 || static_cast<std::size_t>(v) >= net.size()) throw py::index_error("node out of range");
                 const auto nb = net.neighbors(v);
                 return std::vector<NodeId>(nb.begin(), nb.end());
             })
        .def("is_clone", &Network::is_clone)
        .def("connected", &Network::connected);
    m.def(
        "build_network",
        [](const PointArray& points, double r, std::optional<double> eps) {
            const auto pts = to_points(points);
            return build_network(pts, r, eps.value_or(r));
        },
        py::arg("points"), py::arg("r"), py::arg("eps") = py::none(),
        "Rips network: links within r, coverage radius eps (default r).");
    m.def(
        "augment_boundary_sensors",
        [](const Network& net, const HallwayDomain& domain, std::optional<PhaseArray> state, int n) {
            std::optional<State> s;
            if (state) s = to_state(*state, n, net.size());
            auto aug = augment_boundary_sensors(
                net, domain, s ? std::optional<std::span<const Phase>>(s->values) : std::nullopt);
            py::object extended = py::none();
            if (aug.state) extended = from_state(State(*aug.state, n));
            return py::make_tuple(std::move(aug.network), aug.clone_of, extended);
        },
        py::arg("net"), py::arg("domain"), py::arg("state") = py::none(), py::arg("n") = 3,
        "Returns (network, clone_of, extended state or None).");

    // dynamics
    m.def(
        "step", [](const Network& net, const PhaseArray& state, int n) {
            return from_state(step(net, to_state(state, n, net.size())));
        },
        py::arg("net"), py::arg("state"), py::arg("n"));
    m.def(
        "run",
        [](const Network& net, const PhaseArray& state, int n, Tick ticks, double p_s, std::uint64_t seed) {
            RunOptions opt;
            opt.ticks = ticks;
            if (p_s < 1.0) opt.link_failure = LinkFailure{p_s, seed, false};
            const auto trace = run(net, to_state(state, n, net.size()), opt);
            py::array_t<Phase> out({static_cast<py::ssize_t>(trace.snapshots.size()), static_cast<py::ssize_t>(net.size())});
            auto v = out.mutable_unchecked<2>();
            for (std::size_t t = 0; t < trace.snapshots.size(); ++t)
                for (std::size_t x = 0; x < net.size(); ++x)
                    v(static_cast<py::ssize_t>(t), static_cast<py::ssize_t>(x)) = trace.snapshots[t][x];
            return out;
        },
        py::arg("net"), py::arg("state"), py::arg("n"), py::arg("ticks"), py::arg("p_s") = 1.0, py::arg("seed") = 0,
        "States at ticks 0..ticks, shape (ticks + 1, N).");
    m.def(
        "is_continuous",
        [](const Network& net, const PhaseArray& state, int n) {
            return is_continuous(net, to_state(state, n, net.size())).continuous;
        },
        py::arg("net"), py::arg("state"), py::arg("n"));
    m.def(
        "random_state",
        [](std::size_t count, int n, std::uint64_t seed) {
            Rng rng(seed);
            State s = State::zeros(count, n);
            for (auto& v : s.values) v = static_cast<Phase>(rng.below(static_cast<std::uint64_t>(n)));
            return from_state(s);
        },
        py::arg("count"), py::arg("n"), py::arg("seed"));

    // topology
    m.def(
        "find_seed",
        [](const Network& net, const PhaseArray& state, int n) {
            return find_seed(to_state(state, n, net.size()), net);
        },
        py::arg("net"), py::arg("state"), py::arg("n"), "A seed loop as a node list, or None.");
    py::class_<H1Basis>(m, "H1Basis")
        .def_property_readonly("rank", &H1Basis::rank)
        .def_property_readonly("loops", &H1Basis::loops);
    m.def("homology_basis", &homology_basis, py::arg("net"));
    m.def(
        "cohomology_class",
        [](const Network& net, const H1Basis& basis, const PhaseArray& state, int n) {
            return cohomology_class(to_state(state, n, net.size()), net, basis);
        },
        py::arg("net"), py::arg("basis"), py::arg("state"), py::arg("n"));
    m.def(
        "find_defect",
        [](const Network& net, const H1Basis& basis, const PhaseArray& state, int n) {
            const auto r = find_defect(to_state(state, n, net.size()), net, basis);
            py::dict d;
            d["degrees"] = r.degrees;
            d["blocked_cycles"] = r.blocked_cycles;
            d["seed"] = r.seed;
            d["seed_is_local"] = r.seed_is_local;
            d["global_defect"] = r.global_defect;
            d["has_defect"] = r.has_defect;
            return d;
        },
        py::arg("net"), py::arg("basis"), py::arg("state"), py::arg("n"));

    // programmed waves
    m.def(
        "realize_class",
        [](const Network& net, const HallwayDomain& domain, const H1Basis& basis, const std::vector<long long>& target,
           int n, double hop) { return from_state(realize_class(net, domain, basis, target, n, {hop})); },
        py::arg("net"), py::arg("domain"), py::arg("basis"), py::arg("target"), py::arg("n"), py::arg("hop") = 0.0);
    m.def(
        "sever_defect_links",
        [](const Network& net, const PhaseArray& state, int n) {
            return sever_defect_links(net, to_state(state, n, net.size()));
        },
        py::arg("net"), py::arg("state"), py::arg("n"));

    // evasion
    m.def(
        "evade",
        [](const Network& net, const HallwayDomain& domain, const PhaseArray& state, int n, Tick ticks, Tick entry,
           double resolution) {
            RunOptions opt;
            opt.ticks = ticks;
            const auto trace = run(net, to_state(state, n, net.size()), opt);
            const auto inst = instance_from_trace(net, trace, entry, true);
            const auto cells = grid_cells(domain, resolution > 0 ? resolution : net.coverage_radius() / 2);
            const auto v = decide(inst, cells);
            py::dict d;
            d["outcome"] = std::string(to_string(v.outcome));
            d["tick"] = v.tick;
            d["witness_verified"] = v.outcome != Outcome::CapturedByTick && verify_witness(inst, cells, v);
            return d;
        },
        py::arg("net"), py::arg("domain"), py::arg("state"), py::arg("n"), py::arg("ticks"), py::arg("entry") = 0,
        py::arg("resolution") = 0.0, "Evasion verdict for a deterministic run from `state`.");

    // estimators
    m.def("wilson", [](std::size_t k, std::size_t trials) { return estimate_dict(wilson(k, trials)); },
          py::arg("successes"), py::arg("trials"));
    m.def(
        "estimate_seed_probability",
        [](const HallwayDomain& domain, const std::vector<std::size_t>& node_counts, int n, double r,
           std::size_t trials, std::uint64_t seed) {
            MonteCarloConfig c;
            c.node_counts = node_counts;
            c.n = n;
            c.r = c.eps = r;
            c.trials = trials;
            c.seed = seed;
            py::list out;
            for (const auto& row : estimate_seed_probability(domain, c))
            {
                py::dict d = estimate_dict(row.estimate);
                d["node_count"] = row.node_count;
                d["analytic_bound"] = row.analytic_bound;
                out.append(d);
            }
            return out;
        },
        py::arg("domain"), py::arg("node_counts"), py::arg("n"), py::arg("r"), py::arg("trials"), py::arg("seed") = 0);

    // scenarios
    m.def(
        "run_scenario",
        [](const std::string& text, const std::filesystem::path& out_dir, const std::filesystem::path& base_dir) {
            const Scenario s = parse_scenario_text(text, base_dir);
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = s.montecarlo ? run_montecarlo(s, out_dir) : run_experiment(s, out_dir);
            }
            py::dict d;
            d["exit_code"] = r.exit_code;
            d["error"] = r.error;
            d["summary"] = r.summary.is_null() ? py::none() : to_python(r.summary);
            d["manifest"] = r.manifest.is_null() ? py::none() : to_python(r.manifest);
            return d;
        },
        py::arg("text"), py::arg("out_dir"), py::arg("base_dir") = std::filesystem::path{},
        "Runs a scenario given as JSON text; returns exit_code, error, summary, manifest.");
    m.def("paper_scenario", []() { return to_python(scenario_to_json(paper_scenario())); },
          "The narrow-hallway replication scenario as a dict.");
}
