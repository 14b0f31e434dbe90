#include "ghm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ghm/domain.hpp"
#include "ghm/engine.hpp"
#include "ghm/errors.hpp"
#include "ghm/evasion.hpp"
#include "ghm/network.hpp"
#include "ghm/rng.hpp"
#include "ghm/stochastic.hpp"
#include "ghm/topology.hpp"
#include "ghm/waves.hpp"

namespace ghm {

namespace {

// Logger on stderr; level from GHM_LOG_LEVEL (trace, debug, info, warn,
// error, critical, off), warn by default.
spdlog::logger& log()
{
    static const auto logger = [] {
        auto l = spdlog::stderr_color_mt("ghm");
        const char* level = std::getenv("GHM_LOG_LEVEL");
        l->set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
        l->set_pattern("[%l] %v");
        return l;
    }();
    return *logger;
}

const std::vector<std::string> kInitialKinds = {"uniform", "zero", "csv", "class", "waves"};
const std::vector<std::string> kEstimators = {"seed_probability", "far_node_dieout", "survival", "wave_robustness"};

[[noreturn]] void parse_fail(const std::string& what) { throw Error(Errc::ParseError, what); }

template <class T>
const char* type_name()
{
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else if constexpr (std::is_unsigned_v<T>) return "a non-negative integer";
    else return "an integer";
}

template <class T>
bool has_type(const Json& j)
{
    if constexpr (std::is_same_v<T, bool>) return j.is_boolean();
    else if constexpr (std::is_same_v<T, std::string>) return j.is_string();
    else if constexpr (std::is_floating_point_v<T>) return j.is_number();
    else if constexpr (std::is_unsigned_v<T>) return j.is_number_unsigned();
    else return j.is_number_integer();
}

template <class T>
T as(const Json& j, const std::string& field)
{
    if (!has_type<T>(j)) parse_fail("field '" + field + "' must be " + type_name<T>());
    return j.get<T>();
}

template <class T>
std::vector<T> as_list(const Json& j, const std::string& field)
{
    if (!j.is_array()) parse_fail("field '" + field + "' must be an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as<T>(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

const Json* find(const Json& obj, const char* key)
{
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

const Json& object(const Json& j, const std::string& field)
{
    if (!j.is_object()) parse_fail("field '" + field + "' must be an object");
    return j;
}

void check_keys(const Json& obj, const std::string& where, std::initializer_list<std::string_view> allowed,
                std::vector<std::string>& problems)
{
    for (const auto& [key, value] : obj.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            problems.push_back("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
}

std::vector<Rect> rect_list(const Json& j, const std::string& field)
{
    if (!j.is_array()) parse_fail("field '" + field + "' must be an array of [xmin, ymin, xmax, ymax]");
    std::vector<Rect> out;
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        const auto v = as_list<double>(j[i], field + "[" + std::to_string(i) + "]");
        if (v.size() != 4) parse_fail("field '" + field + "[" + std::to_string(i) + "]' needs four numbers");
        out.push_back({v[0], v[1], v[2], v[3]});
    }
    return out;
}

Json rect_json(const std::vector<Rect>& rects)
{
    Json out = Json::array();
    for (const Rect& r : rects) out.push_back(Json::array({r.xmin, r.ymin, r.xmax, r.ymax}));
    return out;
}

std::string line_and_column(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i)
    {
        if (text[i] == '\n')
        {
            ++line;
            column = 1;
        }
        else
            ++column;
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

std::filesystem::path resolve(const Scenario& s, const std::filesystem::path& p)
{
    return p.is_absolute() || s.base_dir.empty() ? p : s.base_dir / p;
}

}  // namespace

std::vector<Rect> hallway_grid_rects(double size, int bars, double width)
{
    if (bars < 2 || !(width > 0) || !(size > bars * width))
        throw Error(Errc::ValidationError, "grid needs at least two bars that fit the square");
    std::vector<Rect> rects;
    const double pitch = (size - width) / (bars - 1);
    for (int k = 0; k < bars; ++k) rects.push_back({0, k * pitch, size, k * pitch + width});
    for (int k = 0; k < bars; ++k) rects.push_back({k * pitch, 0, k * pitch + width, size});
    return rects;
}

Scenario parse_scenario_text(const std::string& text, const std::filesystem::path& base_dir)
{
    Json root;
    try
    {
        root = Json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        parse_fail("malformed JSON at " + line_and_column(text, e.byte));
    }
    object(root, "scenario");
    std::vector<std::string> problems;
    check_keys(root, "",
               {"format_version", "name", "seed", "domain", "network", "n", "initial", "sever", "ticks", "links",
                "dumps", "window", "analyses", "evasion", "montecarlo", "awake_phase"},
               problems);

    Scenario s;
    s.base_dir = base_dir;
    if (const Json* v = find(root, "format_version"))
    {
        if (as<int>(*v, "format_version") != kFormatVersion)
            problems.push_back("unsupported format_version " + v->dump());
    }
    else
        problems.push_back("missing 'format_version'");
    if (const Json* v = find(root, "name")) as<std::string>(*v, "name");
    if (const Json* v = find(root, "seed")) s.seed = as<std::uint64_t>(*v, "seed");

    if (const Json* d = find(root, "domain"))
    {
        object(*d, "domain");
        check_keys(*d, "domain", {"rects", "grid"}, problems);
        const Json* rects = find(*d, "rects");
        const Json* grid = find(*d, "grid");
        if (rects && grid)
            problems.push_back("domain: give either 'rects' or 'grid'");
        else if (rects)
            s.rects = rect_list(*rects, "domain.rects");
        else if (grid)
        {
            object(*grid, "domain.grid");
            check_keys(*grid, "domain.grid", {"size", "bars", "width"}, problems);
            const Json* size = find(*grid, "size");
            const Json* bars = find(*grid, "bars");
            const Json* width = find(*grid, "width");
            if (!size || !bars || !width)
                problems.push_back("domain.grid needs 'size', 'bars', and 'width'");
            else
            {
                try
                {
                    s.rects = hallway_grid_rects(as<double>(*size, "domain.grid.size"), as<int>(*bars, "domain.grid.bars"),
                                                 as<double>(*width, "domain.grid.width"));
                }
                catch (const Error& e)
                {
                    if (e.code() != Errc::ValidationError) throw;
                    problems.push_back("domain.grid: needs at least two bars that fit the square");
                }
            }
        }
        else
            problems.push_back("domain: give 'rects' or 'grid'");
    }
    else
        problems.push_back("missing 'domain'");

    bool eps_given = false;
    if (const Json* net = find(root, "network"))
    {
        object(*net, "network");
        check_keys(*net, "network", {"node_count", "positions", "r", "eps", "augment"}, problems);
        if (const Json* v = find(*net, "node_count")) s.node_count = as<std::size_t>(*v, "network.node_count");
        if (const Json* v = find(*net, "positions")) s.positions_file = as<std::string>(*v, "network.positions");
        if (const Json* v = find(*net, "r"))
            s.r = as<double>(*v, "network.r");
        else
            problems.push_back("missing 'network.r'");
        if (const Json* v = find(*net, "eps"))
        {
            s.eps = as<double>(*v, "network.eps");
            eps_given = true;
        }
        if (const Json* v = find(*net, "augment")) s.augment = as<bool>(*v, "network.augment");
    }
    else
        problems.push_back("missing 'network'");
    if (!eps_given) s.eps = s.r;

    if (const Json* v = find(root, "n"))
        s.n = as<int>(*v, "n");
    else
        problems.push_back("missing 'n'");

    if (const Json* init = find(root, "initial"))
    {
        object(*init, "initial");
        check_keys(*init, "initial", {"kind", "path", "target", "waves", "hop"}, problems);
        if (const Json* v = find(*init, "kind")) s.initial = as<std::string>(*v, "initial.kind");
        if (const Json* v = find(*init, "path")) s.initial_file = as<std::string>(*v, "initial.path");
        if (const Json* v = find(*init, "target")) s.target = as_list<long long>(*v, "initial.target");
        if (const Json* v = find(*init, "hop")) s.hop = as<double>(*v, "initial.hop");
        if (const Json* v = find(*init, "waves"))
        {
            if (!v->is_array()) parse_fail("field 'initial.waves' must be an array");
            for (std::size_t i = 0; i < v->size(); ++i)
            {
                const std::string where = "initial.waves[" + std::to_string(i) + "]";
                const Json& w = object((*v)[i], where);
                check_keys(w, where, {"edge", "anchor", "direction"}, problems);
                WaveEntry e;
                if (const Json* x = find(w, "edge")) e.edge = as<int>(*x, where + ".edge");
                if (const Json* x = find(w, "anchor")) e.anchor = as<double>(*x, where + ".anchor");
                if (const Json* x = find(w, "direction")) e.direction = as<int>(*x, where + ".direction");
                s.waves.push_back(e);
            }
        }
    }
    if (const Json* v = find(root, "sever")) s.sever = as<bool>(*v, "sever");
    if (const Json* v = find(root, "ticks")) s.ticks = as<Tick>(*v, "ticks");
    if (const Json* links = find(root, "links"))
    {
        object(*links, "links");
        check_keys(*links, "links", {"p_s", "per_lifetime"}, problems);
        if (const Json* v = find(*links, "p_s")) s.p_s = as<double>(*v, "links.p_s");
        if (const Json* v = find(*links, "per_lifetime")) s.per_lifetime = as<bool>(*v, "links.per_lifetime");
    }
    if (const Json* v = find(root, "dumps")) s.dumps = as_list<Tick>(*v, "dumps");
    if (const Json* v = find(root, "window")) s.window = as<Tick>(*v, "window");
    if (const Json* v = find(root, "awake_phase")) s.awake_phase = as<Phase>(*v, "awake_phase");
    if (const Json* a = find(root, "analyses"))
    {
        object(*a, "analyses");
        check_keys(*a, "analyses", {"continuity", "defects", "forest", "barriers", "evasion", "class"}, problems);
        if (const Json* v = find(*a, "continuity")) s.analyses.continuity = as<bool>(*v, "analyses.continuity");
        if (const Json* v = find(*a, "defects")) s.analyses.defects = as<bool>(*v, "analyses.defects");
        if (const Json* v = find(*a, "forest")) s.analyses.forest = as<bool>(*v, "analyses.forest");
        if (const Json* v = find(*a, "barriers")) s.analyses.barriers = as<bool>(*v, "analyses.barriers");
        if (const Json* v = find(*a, "evasion")) s.analyses.evasion = as<bool>(*v, "analyses.evasion");
        if (const Json* v = find(*a, "class")) s.analyses.cls = as<bool>(*v, "analyses.class");
    }
    if (const Json* e = find(root, "evasion"))
    {
        object(*e, "evasion");
        check_keys(*e, "evasion", {"resolution", "entry", "region", "refine"}, problems);
        if (const Json* v = find(*e, "resolution")) s.evasion_resolution = as<double>(*v, "evasion.resolution");
        if (const Json* v = find(*e, "entry")) s.evasion_entry = as<Tick>(*v, "evasion.entry");
        if (const Json* v = find(*e, "region")) s.evasion_region = rect_list(*v, "evasion.region");
        if (const Json* v = find(*e, "refine")) s.evasion_refine = as<bool>(*v, "evasion.refine");
    }
    if (const Json* m = find(root, "montecarlo"))
    {
        object(*m, "montecarlo");
        check_keys(*m, "montecarlo",
                   {"trials", "node_counts", "estimators", "p_s", "T", "per_lifetime", "cell_side", "N_tilde", "threads"},
                   problems);
        MonteCarloSection mc;
        if (const Json* v = find(*m, "trials")) mc.trials = as<std::size_t>(*v, "montecarlo.trials");
        if (const Json* v = find(*m, "node_counts")) mc.node_counts = as_list<std::size_t>(*v, "montecarlo.node_counts");
        if (const Json* v = find(*m, "estimators")) mc.estimators = as_list<std::string>(*v, "montecarlo.estimators");
        if (const Json* v = find(*m, "p_s")) mc.p_s = as_list<double>(*v, "montecarlo.p_s");
        if (const Json* v = find(*m, "T")) mc.T = as<Tick>(*v, "montecarlo.T");
        if (const Json* v = find(*m, "per_lifetime")) mc.per_lifetime = as<bool>(*v, "montecarlo.per_lifetime");
        if (const Json* v = find(*m, "cell_side")) mc.cell_side = as<double>(*v, "montecarlo.cell_side");
        if (const Json* v = find(*m, "N_tilde")) mc.N_tilde = as<int>(*v, "montecarlo.N_tilde");
        if (const Json* v = find(*m, "threads")) mc.threads = as<unsigned>(*v, "montecarlo.threads");
        s.montecarlo = mc;
    }

    try
    {
        s.warnings = validate(s);
    }
    catch (const Error& e)
    {
        if (e.code() != Errc::ValidationError) throw;
        // keep the rule violations after the schema problems
        const std::string what = e.what();
        const std::string prefix = std::string(to_string(Errc::ValidationError)) + ": ";
        problems.push_back(what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what);
    }
    if (!problems.empty())
    {
        std::ostringstream msg;
        for (std::size_t k = 0; k < problems.size(); ++k) msg << (k ? "; " : "") << problems[k];
        throw Error(Errc::ValidationError, msg.str());
    }
    for (const auto& w : s.warnings) log().warn("{}", w);
    return s;
}

Scenario parse_scenario(const std::filesystem::path& path)
{
    std::string text;
    try
    {
        text = read_file(path);
    }
    catch (const Error& e)
    {
        throw Error(Errc::ParseError, std::string("scenario file unreadable: ") + e.what());
    }
    return parse_scenario_text(text, path.parent_path());
}

std::vector<std::string> validate(const Scenario& s)
{
    std::vector<std::string> problems, warnings;
    if (s.rects.empty()) problems.push_back("domain has no rectangles");
    for (const Rect& r : s.rects)
        if (!(r.width() > 0 && r.height() > 0)) problems.push_back("degenerate rectangle");
    if (s.node_count.has_value() == s.positions_file.has_value())
        problems.push_back("network: give exactly one of 'node_count' and 'positions'");
    if (s.node_count && *s.node_count == 0) problems.push_back("node_count must be positive");
    if (s.positions_file && !std::filesystem::exists(resolve(s, *s.positions_file)))
        problems.push_back("positions file not found: " + resolve(s, *s.positions_file).string());
    if (!(s.r > 0)) problems.push_back("r must be positive");
    if (!(s.eps > 0)) problems.push_back("eps must be positive");
    if (s.r > 0 && s.eps > 0 && s.eps < s.r / std::sqrt(3.0))
        warnings.push_back("eps below r / sqrt(3): Rips shadow coverage is not guaranteed");
    if (s.n < 3) problems.push_back("n must be at least 3");
    if (std::find(kInitialKinds.begin(), kInitialKinds.end(), s.initial) == kInitialKinds.end())
        problems.push_back("initial.kind must be one of uniform, zero, csv, class, waves");
    if (s.initial == "csv")
    {
        if (!s.initial_file)
            problems.push_back("initial.kind csv needs 'path'");
        else if (!std::filesystem::exists(resolve(s, *s.initial_file)))
            problems.push_back("initial state file not found: " + resolve(s, *s.initial_file).string());
    }
    if (s.initial == "class" && s.target.empty()) problems.push_back("initial.kind class needs 'target'");
    if (s.initial == "waves" && s.waves.empty()) problems.push_back("initial.kind waves needs 'waves'");
    for (const auto& w : s.waves)
        if (w.direction != 1 && w.direction != -1) problems.push_back("wave direction must be +1 or -1");
    if (s.hop < 0) problems.push_back("initial.hop must be non-negative");
    if (s.ticks < 0) problems.push_back("ticks must be non-negative");
    if (!(s.p_s > 0 && s.p_s <= 1)) problems.push_back("links.p_s must lie in (0, 1]");
    for (Tick t : s.dumps)
        if (t < 0 || t > s.ticks) problems.push_back("dump tick " + std::to_string(t) + " outside [0, ticks]");
    if (s.window < 1) problems.push_back("window must be at least 1");
    if (s.awake_phase < 0 || s.awake_phase >= std::max(s.n, 1)) problems.push_back("awake_phase must lie in [0, n)");
    if (s.evasion_resolution < 0) problems.push_back("evasion.resolution must be positive");
    if (s.evasion_resolution > 0.5 * s.eps * (1 + 1e-12))
        problems.push_back("evasion.resolution must be at most eps / 2");
    if (s.evasion_entry < 0 || s.evasion_entry > s.ticks) problems.push_back("evasion.entry outside [0, ticks]");
    if (s.montecarlo)
    {
        const auto& m = *s.montecarlo;
        if (m.trials < 1) problems.push_back("montecarlo.trials must be at least 1");
        if (m.T < 0) problems.push_back("montecarlo.T must be non-negative");
        if (m.estimators.empty()) problems.push_back("montecarlo.estimators is empty");
        for (const auto& e : m.estimators)
        {
            if (std::find(kEstimators.begin(), kEstimators.end(), e) == kEstimators.end())
                problems.push_back("unknown estimator '" + e + "'");
            if ((e == "seed_probability" || e == "far_node_dieout") && m.node_counts.empty())
                problems.push_back("estimator " + e + " needs montecarlo.node_counts");
        }
        if (m.p_s.empty()) problems.push_back("montecarlo.p_s is empty");
        for (double p : m.p_s)
            if (!(p > 0 && p <= 1)) problems.push_back("montecarlo.p_s values must lie in (0, 1]");
        if (m.cell_side < 0 || m.cell_side > s.r / std::sqrt(2.0) * (1 + 1e-12))
            problems.push_back("montecarlo.cell_side must lie in (0, r/sqrt(2)]");
    }
    if (!problems.empty())
    {
        std::ostringstream msg;
        for (std::size_t k = 0; k < problems.size(); ++k) msg << (k ? "; " : "") << problems[k];
        throw Error(Errc::ValidationError, msg.str());
    }
    return warnings;
}

Json scenario_to_json(const Scenario& s)
{
    Json j;
    j["format_version"] = kFormatVersion;
    j["seed"] = s.seed;
    j["domain"] = Json{{"rects", rect_json(s.rects)}};
    Json net;
    if (s.node_count) net["node_count"] = *s.node_count;
    if (s.positions_file) net["positions"] = s.positions_file->generic_string();
    net["r"] = s.r;
    net["eps"] = s.eps;
    net["augment"] = s.augment;
    j["network"] = std::move(net);
    j["n"] = s.n;
    Json init{{"kind", s.initial}};
    if (s.initial_file) init["path"] = s.initial_file->generic_string();
    if (!s.target.empty()) init["target"] = s.target;
    if (!s.waves.empty())
    {
        Json waves = Json::array();
        for (const auto& w : s.waves)
            waves.push_back(Json{{"edge", w.edge}, {"anchor", w.anchor}, {"direction", w.direction}});
        init["waves"] = std::move(waves);
    }
    if (s.hop > 0) init["hop"] = s.hop;
    j["initial"] = std::move(init);
    j["sever"] = s.sever;
    j["ticks"] = s.ticks;
    j["links"] = Json{{"p_s", s.p_s}, {"per_lifetime", s.per_lifetime}};
    j["dumps"] = s.dumps;
    j["window"] = s.window;
    j["awake_phase"] = s.awake_phase;
    j["analyses"] = Json{{"continuity", s.analyses.continuity}, {"defects", s.analyses.defects},
                         {"forest", s.analyses.forest},         {"barriers", s.analyses.barriers},
                         {"evasion", s.analyses.evasion},       {"class", s.analyses.cls}};
    Json ev{{"entry", s.evasion_entry}, {"refine", s.evasion_refine}};
    if (s.evasion_resolution > 0) ev["resolution"] = s.evasion_resolution;
    if (!s.evasion_region.empty()) ev["region"] = rect_json(s.evasion_region);
    j["evasion"] = std::move(ev);
    if (s.montecarlo)
    {
        const auto& m = *s.montecarlo;
        Json mc{{"trials", m.trials},         {"node_counts", m.node_counts}, {"estimators", m.estimators},
                {"p_s", m.p_s},               {"T", m.T},                     {"per_lifetime", m.per_lifetime},
                {"N_tilde", m.N_tilde},       {"threads", m.threads}};
        if (m.cell_side > 0) mc["cell_side"] = m.cell_side;
        j["montecarlo"] = std::move(mc);
    }
    return j;
}

Scenario paper_scenario()
{
    Scenario s;
    s.seed = 2016;
    // Three horizontal and three vertical corridors of width 4 across the
    // square: four holes, about 4650 square units of hallway.
    s.rects = hallway_grid_rects(200.0, 3, 4.0);
    s.node_count = 16250;
    s.r = 1.5;
    s.eps = 1.5;
    s.n = 20;
    s.initial = "uniform";
    s.ticks = 400;
    s.window = 100;
    s.dumps = {0, 20, 45, 90, 150, 200, 250, 350};
    s.analyses.barriers = true;
    s.warnings = validate(s);
    return s;
}

std::vector<Rect> corridor_sections(const HallwayDomain& domain, double comm_radius)
{
    std::vector<Rect> out;
    const auto& skel = domain.skeleton();
    for (std::size_t e = 0; e < skel.edges.size(); ++e)
    {
        const auto& edge = skel.edges[e];
        const CorridorInterval span = free_interval(domain, static_cast<int>(e), comm_radius);
        if (span.length() <= 0) continue;
        const Rect& member = domain.rects()[static_cast<std::size_t>(edge.rect)];
        const Point a = edge.polyline.front(), b = edge.polyline.back();
        const double len = dist(a, b);
        if (len <= 0) continue;
        const Point p = a + (span.lo / len) * (b - a);
        const Point q = a + (span.hi / len) * (b - a);
        Rect piece = member;
        if (member.horizontal())
        {
            piece.xmin = std::max(member.xmin, std::min(p.x, q.x));
            piece.xmax = std::min(member.xmax, std::max(p.x, q.x));
        }
        else
        {
            piece.ymin = std::max(member.ymin, std::min(p.y, q.y));
            piece.ymax = std::min(member.ymax, std::max(p.y, q.y));
        }
        if (piece.xmin < piece.xmax && piece.ymin < piece.ymax) out.push_back(piece);
    }
    return out;
}

ReplicationCheck check_replication(const Json& summary)
{
    ReplicationCheck c;
    const int n = summary.at("n").get<int>();
    const auto& after = summary.at("awake_after_onset");
    c.awake_min = after.at("min").get<double>();
    c.awake_max = after.at("max").get<double>();
    const auto& onset = summary.at("periodicity").is_null() ? Json() : summary.at("periodicity").at("onset");
    if (!onset.is_null()) c.onset = onset.get<Tick>();
    c.awake_ok = c.onset && c.awake_min >= 1.0 / (2 * n) && c.awake_max <= 2.0 / n;
    c.seed_ok = summary.at("seeds").at("initial").at("seed_found").get<bool>();
    if (summary.contains("barriers"))
    {
        c.barrier_fraction = summary.at("barriers").at("all_sections_fraction").get<double>();
        c.barrier_ok = c.barrier_fraction >= 0.95;
    }
    return c;
}

namespace {

// Outputs accumulate here and the manifest lists them with their hashes.
class OutputDir
{
  public:
    explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir))
    {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw Error(Errc::Io, "cannot create " + dir_.string() + ": " + ec.message());
    }

    void put(const std::string& name, const std::string& contents)
    {
        write_file(dir_ / name, contents);
        files_[name] = {sha256_hex(contents), contents.size()};
    }

    void put_json(const std::string& name, const Json& j) { put(name, j.dump(2) + "\n"); }

    Json finish()
    {
        Json m;
        m["format_version"] = kFormatVersion;
        Json list = Json::array();
        for (const auto& [name, info] : files_)
            list.push_back(Json{{"path", name}, {"sha256", info.first}, {"bytes", info.second}});
        m["files"] = std::move(list);
        write_file(dir_ / "manifest.json", m.dump(2) + "\n");
        return m;
    }

  private:
    std::filesystem::path dir_;
    std::map<std::string, std::pair<std::string, std::size_t>> files_;
};

template <class Body>
ExperimentResult guarded(Body body)
{
    ExperimentResult result;
    try
    {
        body(result);
    }
    catch (const Error& e)
    {
        result.exit_code = e.exit_code();
        result.error = e.what();
        log().error("{}", e.what());
    }
    catch (const std::exception& e)
    {
        result.exit_code = static_cast<int>(ErrorFamily::Internal);
        result.error = e.what();
        log().error("{}", e.what());
    }
    return result;
}

std::vector<Point> scenario_positions(const Scenario& s, const HallwayDomain& domain)
{
    if (s.positions_file)
    {
        std::ifstream in(resolve(s, *s.positions_file));
        if (!in) throw Error(Errc::Io, "cannot open " + resolve(s, *s.positions_file).string());
        auto pts = read_positions_csv(in);
        for (const Point& p : pts)
            if (!domain.contains(p)) throw Error(Errc::ValidationError, "position outside the domain");
        return pts;
    }
    return sample_points(domain, *s.node_count, derive_key(s.seed, 1));
}

State initial_state(const Scenario& s, const Network& net, const HallwayDomain& domain)
{
    if (s.initial == "zero") return State::zeros(net.size(), s.n);
    if (s.initial == "uniform")
    {
        Rng rng(s.seed, 2);
        State u = State::zeros(net.size(), s.n);
        for (auto& v : u.values) v = static_cast<Phase>(rng.below(static_cast<std::uint64_t>(s.n)));
        return u;
    }
    if (s.initial == "csv")
    {
        std::ifstream in(resolve(s, *s.initial_file));
        if (!in) throw Error(Errc::Io, "cannot open " + resolve(s, *s.initial_file).string());
        State u = read_snapshot_csv(in);
        if (u.size() != net.size()) throw Error(Errc::ValidationError, "initial state size differs from the network");
        if (u.n != s.n) throw Error(Errc::ValidationError, "initial state alphabet differs from n");
        u.tick = 0;
        return u;
    }
    RealizeOptions opt;
    opt.hop = s.hop;
    if (s.initial == "class") return realize_class(net, domain, homology_basis(net), s.target, s.n, opt);
    State u = State::zeros(net.size(), s.n);
    for (const auto& w : s.waves)
        u = add_states(u, single_wave(net, domain, WaveSpec{w.edge, w.anchor, w.direction, s.n, s.hop}), net);
    return u;
}

std::vector<NodeId> phase_set(const State& u, Phase phase)
{
    std::vector<NodeId> out;
    for (std::size_t v = 0; v < u.size(); ++v)
        if (u[v] == phase) out.push_back(static_cast<NodeId>(v));
    return out;
}

Json seed_inventory(const State& u, const Network& net)
{
    const auto seed = find_seed(u, net);
    const auto comp = seed_components(u, net);
    std::size_t nodes = 0;
    int components = 0;
    for (int c : comp)
        if (c >= 0)
        {
            ++nodes;
            components = std::max(components, c + 1);
        }
    std::vector<char> seen(static_cast<std::size_t>(components), 0);
    int distinct = 0;
    for (int c : comp)
        if (c >= 0 && !seen[static_cast<std::size_t>(c)])
        {
            seen[static_cast<std::size_t>(c)] = 1;
            ++distinct;
        }
    return Json{{"seed_found", seed.has_value()},
                {"seed_length", seed ? static_cast<long long>(seed->size()) : 0LL},
                {"seed_nodes", nodes},
                {"seed_components", distinct}};
}

Json degrees_json(const DefectReport& d)
{
    Json degrees = Json::array();
    for (const auto& x : d.degrees) degrees.push_back(x ? Json(*x) : Json());
    return degrees;
}

}  // namespace

ExperimentResult run_experiment(const Scenario& scenario, const std::filesystem::path& out_dir)
{
    return guarded([&](ExperimentResult& result) {
        validate(scenario);
        const Scenario& s = scenario;
        OutputDir out(out_dir);
        out.put_json("scenario.json", scenario_to_json(s));

        const HallwayDomain domain = build_domain(s.rects);
        const auto points = scenario_positions(s, domain);
        Network net = build_network(points, s.r, s.eps);
        log().info("network: {} nodes, {} edges", net.size(), net.edges().size());
        State u0 = initial_state(s, net, domain);

        std::size_t clones = 0;
        if (s.augment)
        {
            auto aug = augment_boundary_sensors(net, domain, std::span<const Phase>(u0.values));
            clones = aug.clone_of.size();
            net = std::move(aug.network);
            u0 = State(std::move(*aug.state), s.n);
        }
        // Analyses use the geometric network; severing only changes the links
        // the dynamics run on.
        const Network& geo = net;
        Network cut;
        if (s.sever) cut = sever_defect_links(geo, u0);
        const Network& dyn = s.sever ? cut : geo;

        {
            std::ostringstream csv;
            write_positions_csv(csv, geo.positions());
            out.put("positions.csv", csv.str());
        }

        RunOptions opt;
        opt.ticks = s.ticks;
        if (s.p_s < 1) opt.link_failure = LinkFailure{s.p_s, derive_key(s.seed, 3), s.per_lifetime};
        log().info("running {} ticks", s.ticks);
        const RunTrace trace = run(dyn, u0, opt);

        for (Tick t : s.dumps)
        {
            std::ostringstream csv;
            write_snapshot_csv(csv, geo, trace.at(t));
            out.put("snapshot_" + std::to_string(t) + ".csv", csv.str());
        }

        Json summary;
        summary["format_version"] = kFormatVersion;
        summary["network"] = Json{{"nodes", geo.size()},
                                  {"clones", clones},
                                  {"edges", geo.edges().size()},
                                  {"severed_edges", s.sever ? geo.edges().size() - cut.edges().size() : 0},
                                  {"triangles", geo.triangles().size()},
                                  {"mean_degree", geo.size() ? 2.0 * static_cast<double>(geo.edges().size()) /
                                                                   static_cast<double>(geo.size())
                                                             : 0.0},
                                  {"connected", geo.connected()},
                                  {"domain_genus", domain.genus()}};
        summary["n"] = s.n;
        summary["ticks"] = s.ticks;
        summary["awake_phase"] = s.awake_phase;

        std::vector<double> awake;
        for (Tick t = 0; t <= trace.last_tick(); ++t)
        {
            const State& u = trace.at(t);
            awake.push_back(static_cast<double>(phase_set(u, s.awake_phase).size()) /
                            static_cast<double>(std::max<std::size_t>(u.size(), 1)));
        }
        summary["awake_fraction"] = awake;
        summary["seeds"] = Json{{"initial", seed_inventory(u0, dyn)}, {"final", seed_inventory(trace.final_state, dyn)}};

        // periodicity onset over all nodes
        Json periodicity;
        std::optional<Tick> onset;
        if (s.ticks >= 6 * s.n)
        {
            const auto per = detect_periodicity(trace);
            std::map<int, std::size_t> periods;
            std::size_t periodic = 0;
            Tick latest = 0;
            for (const auto& p : per)
                if (p.eventually_periodic && p.period)
                {
                    ++periodic;
                    ++periods[*p.period];
                    latest = std::max(latest, p.onset);
                }
            Json hist = Json::object();
            for (const auto& [k, c] : periods) hist[std::to_string(k)] = c;
            periodicity["periodic_fraction"] = static_cast<double>(periodic) / static_cast<double>(per.size());
            periodicity["periods"] = std::move(hist);
            if (periodic == per.size())
            {
                onset = latest;
                periodicity["onset"] = latest;
            }
            else
                periodicity["onset"] = nullptr;
        }
        summary["periodicity"] = periodicity.is_null() ? Json() : periodicity;

        // awake statistics after the onset (or over the trailing window)
        {
            const Tick from = onset ? *onset : std::max<Tick>(0, s.ticks - s.window + 1);
            double lo = 1.0, hi = 0.0, sum = 0.0;
            for (Tick t = from; t <= s.ticks; ++t)
            {
                const double a = awake[static_cast<std::size_t>(t)];
                lo = std::min(lo, a);
                hi = std::max(hi, a);
                sum += a;
            }
            summary["awake_after_onset"] = Json{{"from", from},
                                                {"mean", sum / static_cast<double>(s.ticks - from + 1)},
                                                {"min", lo},
                                                {"max", hi}};
        }

        const bool died_out = std::all_of(trace.final_state.values.begin(), trace.final_state.values.end(),
                                          [](Phase p) { return p == 0; });
        summary["died_out"] = died_out;

        std::optional<H1Basis> basis;
        auto need_basis = [&]() -> const H1Basis& {
            if (!basis) basis = homology_basis(geo);
            return *basis;
        };

        std::optional<bool> has_defect;
        if (s.analyses.defects)
        {
            const auto report = find_defect(u0, geo, need_basis());
            has_defect = report.has_defect;
            summary["defects"] = Json{{"rips_h1_rank", need_basis().rank()},
                                      {"degrees", degrees_json(report)},
                                      {"blocked_cycles", report.blocked_cycles},
                                      {"seed_is_local", report.seed_is_local},
                                      {"global_defect", report.global_defect},
                                      {"has_defect", report.has_defect}};
        }
        // Without the defect inventory the extinction of the run stands in for
        // the absence of defects.
        summary["cohomologically_trivial"] = has_defect ? !*has_defect : died_out;
        if (basis || s.analyses.cls) out.put_json("basis.json", basis_to_json(need_basis()));

        if (s.analyses.continuity)
        {
            std::size_t continuous = 0;
            std::optional<Tick> first_break;
            for (Tick t = 0; t <= trace.last_tick(); ++t)
                if (is_continuous(geo, trace.at(t)))
                    ++continuous;
                else if (!first_break)
                    first_break = t;
            summary["continuity"] = Json{{"continuous_ticks", continuous},
                                         {"first_discontinuous_tick", first_break ? Json(*first_break) : Json()}};
        }

        if (s.analyses.cls)
        {
            Json cls;
            for (const auto& [label, state] : {std::pair<const char*, const State*>{"initial", &u0},
                                               {"final", &trace.final_state}})
            {
                try
                {
                    cls[label] = cohomology_class(*state, geo, need_basis());
                }
                catch (const Error& e)
                {
                    if (e.code() != Errc::DiscontinuousState) throw;
                    cls[label] = nullptr;
                }
            }
            Json file = Json{{"format_version", kFormatVersion}, {"initial", cls["initial"]}, {"final", cls["final"]}};
            out.put_json("class.json", file);
            summary["class"] = cls;
        }

        if (s.analyses.forest)
        {
            const Forest forest = subordination_forest(dyn, trace);
            out.put_json("forest.json", to_json(forest));
            const int max_depth = forest.depth.empty() ? 0 : *std::max_element(forest.depth.begin(), forest.depth.end());
            summary["forest"] = Json{{"roots", forest.roots.size()}, {"max_depth", max_depth}};
        }

        if (s.analyses.barriers)
        {
            const auto sections = corridor_sections(domain, s.r);
            const Tick from = std::max<Tick>(0, s.ticks - s.window + 1);
            std::vector<std::size_t> per_section(sections.size(), 0);
            std::size_t all = 0;
            std::vector<double> series;
            for (Tick t = from; t <= s.ticks; ++t)
            {
                const auto front = phase_set(trace.at(t), s.awake_phase);
                std::size_t ok = 0;
                for (std::size_t k = 0; k < sections.size(); ++k)
                    if (is_barrier(geo, front, domain, sections[k]))
                    {
                        ++per_section[k];
                        ++ok;
                    }
                if (ok == sections.size()) ++all;
                series.push_back(sections.empty() ? 0.0
                                                  : static_cast<double>(ok) / static_cast<double>(sections.size()));
            }
            const double ticks = static_cast<double>(s.ticks - from + 1);
            Json fractions = Json::array();
            for (auto c : per_section) fractions.push_back(static_cast<double>(c) / ticks);
            summary["barriers"] = Json{{"window", Json::array({from, s.ticks})},
                                       {"sections", rect_json(sections)},
                                       {"section_fraction", fractions},
                                       {"sections_crossed", series},
                                       {"all_sections_fraction", static_cast<double>(all) / ticks}};
        }

        if (s.analyses.evasion)
        {
            double res = s.evasion_resolution > 0 ? s.evasion_resolution : 0.5 * s.eps;
            const auto inst = instance_from_trace(dyn, trace, s.evasion_entry, s.p_s >= 1, s.awake_phase);
            Json ev;
            if (s.evasion_refine)
            {
                const auto refined = decide_refined(inst, domain, res, s.evasion_region);
                Json outcomes = Json::array();
                for (auto o : refined.outcomes) outcomes.push_back(to_string(o));
                ev["resolutions"] = refined.resolutions;
                ev["outcomes"] = std::move(outcomes);
                ev["stable"] = refined.stable;
                res = refined.verdict.resolution;
            }
            // the reported verdict (with its witness) is taken at the finest
            // resolution examined
            const auto cells = grid_cells(domain, res, s.evasion_region);
            const Verdict verdict = decide(inst, cells);
            out.put_json("verdict.json", to_json(verdict));
            std::ostringstream csv;
            write_witness_csv(csv, verdict, cells);
            out.put("witness.csv", csv.str());
            ev["outcome"] = to_string(verdict.outcome);
            ev["tick"] = verdict.tick;
            ev["witness_verified"] =
                verdict.outcome == Outcome::CapturedByTick ? Json() : Json(verify_witness(inst, cells, verdict));
            summary["evasion"] = std::move(ev);
        }

        out.put_json("summary.json", summary);
        result.summary = std::move(summary);
        result.manifest = out.finish();
    });
}

ExperimentResult run_montecarlo(const Scenario& scenario, const std::filesystem::path& out_dir)
{
    return guarded([&](ExperimentResult& result) {
        validate(scenario);
        if (!scenario.montecarlo) throw Error(Errc::ValidationError, "scenario has no montecarlo section");
        const Scenario& s = scenario;
        const auto& m = *s.montecarlo;
        OutputDir out(out_dir);
        out.put_json("scenario.json", scenario_to_json(s));
        const HallwayDomain domain = build_domain(s.rects);

        MonteCarloConfig config;
        config.trials = m.trials;
        config.seed = s.seed;
        config.n = s.n;
        config.node_counts = m.node_counts;
        config.r = s.r;
        config.eps = s.eps;
        config.p_s = m.p_s.front();
        config.per_lifetime = m.per_lifetime;
        config.T = m.T;
        config.cell_side = m.cell_side;
        config.N_tilde = m.N_tilde;
        config.threads = m.threads;
        validate(config);

        Json report;
        report["format_version"] = kFormatVersion;
        report["trials"] = m.trials;
        auto has = [&](const char* name) {
            return std::find(m.estimators.begin(), m.estimators.end(), name) != m.estimators.end();
        };
        if (has("seed_probability"))
        {
            Json rows = Json::array();
            for (const auto& row : estimate_seed_probability(domain, config))
                rows.push_back(Json{{"node_count", row.node_count},
                                    {"estimate", to_json(row.estimate)},
                                    {"cells", row.cells},
                                    {"analytic_bound", row.analytic_bound ? Json(*row.analytic_bound) : Json()}});
            report["seed_probability"] = std::move(rows);
        }
        if (has("far_node_dieout"))
        {
            Json rows = Json::array();
            for (const auto& row : estimate_far_node_dieout(domain, config))
                rows.push_back(Json{{"node_count", row.node_count},
                                    {"estimate", to_json(row.estimate)},
                                    {"N_tilde", row.N_tilde},
                                    {"analytic_bound", row.analytic_bound ? Json(*row.analytic_bound) : Json()},
                                    {"mean_far_nodes", row.mean_far_nodes}});
            report["far_node_dieout"] = std::move(rows);
        }
        if (has("survival") || has("wave_robustness"))
        {
            const Network net = build_network(scenario_positions(s, domain), s.r, s.eps);
            const State u0 = initial_state(s, net, domain);
            Json survival = Json::array(), robustness = Json::array();
            for (std::size_t k = 0; k < m.p_s.size(); ++k)
            {
                const double p = m.p_s[k];
                if (has("survival"))
                {
                    const auto curve = defect_survival_curve(net, u0, p, m.T, m.trials, derive_key(s.seed, 100 + k),
                                                             m.per_lifetime, m.threads);
                    std::ostringstream csv;
                    write_survival_csv(csv, curve);
                    const std::string name = "survival_" + std::to_string(k) + ".csv";
                    out.put(name, csv.str());
                    survival.push_back(Json{{"p_s", p}, {"file", name}, {"final", to_json(curve.death_fraction.back())}});
                }
                if (has("wave_robustness"))
                {
                    const auto e = wave_robustness(net, homology_basis(net), u0, p, m.T, m.trials,
                                                   derive_key(s.seed, 200 + k), m.threads);
                    robustness.push_back(Json{{"p_s", p}, {"estimate", to_json(e)}});
                }
            }
            if (has("survival")) report["survival"] = std::move(survival);
            if (has("wave_robustness")) report["wave_robustness"] = std::move(robustness);
        }
        out.put_json("montecarlo.json", report);
        result.summary = std::move(report);
        result.manifest = out.finish();
    });
}

}  // namespace ghm
