#include "ghm/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "ghm/errors.hpp"

namespace ghm {

namespace {

[[noreturn]] void parse_fail(const std::string& what, std::size_t line = 0)
{
    throw Error(Errc::ParseError, line ? what + " (line " + std::to_string(line) + ")" : what);
}

template <class T>
T parse_number(std::string_view text, std::size_t line)
{
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) parse_fail("bad number '" + std::string(text) + "'", line);
    return value;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;)
    {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// Line reader for the CSV dialect used here: a version comment, a header
// row, then data rows of a fixed column count.
class CsvReader
{
  public:
    CsvReader(std::istream& in, std::string_view header) : in_(in)
    {
        std::string first;
        if (!next_line(first)) parse_fail("empty CSV input");
        if (first.rfind("# ", 0) != 0) parse_fail("missing format_version comment", line_);
        std::istringstream meta(first.substr(2));
        std::string item;
        while (meta >> item)
        {
            const auto eq = item.find('=');
            if (eq == std::string::npos) parse_fail("malformed metadata '" + item + "'", line_);
            fields_.emplace_back(item.substr(0, eq), item.substr(eq + 1));
        }
        const int version = parse_number<int>(field("format_version"), line_);
        if (version != kFormatVersion) parse_fail("unsupported format_version " + std::to_string(version), line_);
        std::string head;
        if (!next_line(head) || head != header)
            parse_fail("expected header '" + std::string(header) + "'", line_);
        columns_ = split(header).size();
    }

    std::string_view field(std::string_view key) const
    {
        for (const auto& [k, v] : fields_)
            if (k == key) return v;
        parse_fail("missing metadata field '" + std::string(key) + "'", 1);
    }

    /// Next data row, or false at end of input.
    bool row(std::vector<std::string_view>& cells)
    {
        if (!next_line(current_)) return false;
        cells = split(current_);
        if (cells.size() != columns_)
            parse_fail("expected " + std::to_string(columns_) + " columns", line_);
        return true;
    }

    std::size_t line() const { return line_; }

  private:
    bool next_line(std::string& out)
    {
        while (std::getline(in_, out))
        {
            ++line_;
            if (!out.empty() && out.back() == '\r') out.pop_back();
            if (!out.empty()) return true;
        }
        return false;
    }

    std::istream& in_;
    std::size_t line_ = 0;
    std::size_t columns_ = 0;
    std::string current_;
    std::vector<std::pair<std::string, std::string>> fields_;
};

template <class T>
T get(const Json& j, const char* key)
{
    if (!j.contains(key)) parse_fail(std::string("missing member '") + key + "'");
    try
    {
        return j.at(key).get<T>();
    }
    catch (const nlohmann::json::exception& e)
    {
        parse_fail(std::string("member '") + key + "': " + e.what());
    }
}

}  // namespace

std::string format_double(double x)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw Error(Errc::InternalConsistency, "double formatting failed");
    return std::string(buf, ptr);
}

void write_positions_csv(std::ostream& out, const std::vector<Point>& positions)
{
    out << "# format_version=" << kFormatVersion << "\nx,y\n";
    for (const Point& p : positions) out << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

std::vector<Point> read_positions_csv(std::istream& in)
{
    CsvReader csv(in, "x,y");
    std::vector<Point> out;
    std::vector<std::string_view> c;
    while (csv.row(c)) out.push_back({parse_number<double>(c[0], csv.line()), parse_number<double>(c[1], csv.line())});
    return out;
}

void write_snapshot_csv(std::ostream& out, const Network& net, const State& state)
{
    if (state.size() != net.size()) throw Error(Errc::InvalidArgument, "state and network sizes differ");
    out << "# format_version=" << kFormatVersion << " n=" << state.n << " tick=" << state.tick
        << "\nnode,x,y,phase\n";
    for (std::size_t v = 0; v < state.size(); ++v)
    {
        const Point p = net.position(static_cast<NodeId>(v));
        out << v << ',' << format_double(p.x) << ',' << format_double(p.y) << ',' << state[v] << '\n';
    }
}

State read_snapshot_csv(std::istream& in)
{
    CsvReader csv(in, "node,x,y,phase");
    State s;
    s.n = parse_number<int>(csv.field("n"), 1);
    s.tick = parse_number<Tick>(csv.field("tick"), 1);
    std::vector<std::string_view> c;
    while (csv.row(c))
    {
        if (parse_number<std::size_t>(c[0], csv.line()) != s.size())
            parse_fail("node ids must be consecutive from 0", csv.line());
        const Phase phase = parse_number<Phase>(c[3], csv.line());
        if (phase < 0 || phase >= s.n) parse_fail("phase outside [0, n)", csv.line());
        s.values.push_back(phase);
    }
    if (s.n < 3) parse_fail("n must be at least 3");
    return s;
}

void write_witness_csv(std::ostream& out, const Verdict& verdict, const CellSpace& cells)
{
    out << "# format_version=" << kFormatVersion << " outcome=" << to_string(verdict.outcome)
        << "\ntick,cell,label_a,label_b,x,y\n";
    for (const auto& w : verdict.witness)
    {
        const auto& label = cells.label[w.cell];
        const Point p = cells.centers[w.cell];
        out << w.tick << ',' << w.cell << ',' << label[0] << ',' << label[1] << ',' << format_double(p.x) << ','
            << format_double(p.y) << '\n';
    }
}

std::vector<WitnessStep> read_witness_csv(std::istream& in)
{
    CsvReader csv(in, "tick,cell,label_a,label_b,x,y");
    std::vector<WitnessStep> out;
    std::vector<std::string_view> c;
    while (csv.row(c))
        out.push_back({parse_number<Tick>(c[0], csv.line()), parse_number<std::uint32_t>(c[1], csv.line())});
    return out;
}

void write_survival_csv(std::ostream& out, const SurvivalCurve& curve)
{
    out << "# format_version=" << kFormatVersion << "\ntick,dead,trials,fraction,lo,hi,first_death\n";
    for (std::size_t t = 0; t < curve.death_fraction.size(); ++t)
    {
        const auto& e = curve.death_fraction[t];
        out << t << ',' << e.successes << ',' << e.trials << ',' << format_double(e.value) << ','
            << format_double(e.lo) << ',' << format_double(e.hi) << ',' << curve.death_time_histogram[t] << '\n';
    }
}

SurvivalCurve read_survival_csv(std::istream& in)
{
    CsvReader csv(in, "tick,dead,trials,fraction,lo,hi,first_death");
    SurvivalCurve curve;
    std::vector<std::string_view> c;
    while (csv.row(c))
    {
        if (parse_number<std::size_t>(c[0], csv.line()) != curve.death_fraction.size())
            parse_fail("ticks must be consecutive from 0", csv.line());
        Estimate e;
        e.successes = parse_number<std::size_t>(c[1], csv.line());
        e.trials = parse_number<std::size_t>(c[2], csv.line());
        e.value = parse_number<double>(c[3], csv.line());
        e.lo = parse_number<double>(c[4], csv.line());
        e.hi = parse_number<double>(c[5], csv.line());
        curve.trials = e.trials;
        curve.death_fraction.push_back(e);
        curve.death_time_histogram.push_back(parse_number<std::size_t>(c[6], csv.line()));
    }
    return curve;
}

void check_format_version(const Json& j)
{
    if (!j.is_object() || !j.contains("format_version")) parse_fail("missing format_version");
    if (get<int>(j, "format_version") != kFormatVersion)
        parse_fail("unsupported format_version " + j.at("format_version").dump());
}

Json to_json(const Estimate& e)
{
    return Json{{"successes", e.successes}, {"trials", e.trials}, {"value", e.value}, {"lo", e.lo}, {"hi", e.hi}};
}

Estimate estimate_from_json(const Json& j)
{
    Estimate e;
    e.successes = get<std::size_t>(j, "successes");
    e.trials = get<std::size_t>(j, "trials");
    e.value = get<double>(j, "value");
    e.lo = get<double>(j, "lo");
    e.hi = get<double>(j, "hi");
    return e;
}

Json to_json(const Verdict& verdict)
{
    Json j;
    j["format_version"] = kFormatVersion;
    j["outcome"] = to_string(verdict.outcome);
    j["tick"] = verdict.tick;
    j["recurrence"] = verdict.recurrence ? Json::array({(*verdict.recurrence)[0], (*verdict.recurrence)[1]}) : Json();
    j["resolution"] = verdict.resolution;
    Json steps = Json::array();
    for (const auto& w : verdict.witness) steps.push_back(Json::array({w.tick, w.cell}));
    j["witness"] = std::move(steps);
    return j;
}

Verdict verdict_from_json(const Json& j)
{
    check_format_version(j);
    Verdict v;
    const auto outcome = get<std::string>(j, "outcome");
    bool known = false;
    for (Outcome o : {Outcome::CapturedByTick, Outcome::SurvivesHorizon, Outcome::SurvivesForever})
        if (outcome == to_string(o))
        {
            v.outcome = o;
            known = true;
        }
    if (!known) parse_fail("unknown outcome '" + outcome + "'");
    v.tick = get<Tick>(j, "tick");
    if (!j.at("recurrence").is_null()) v.recurrence = get<std::array<Tick, 2>>(j, "recurrence");
    v.resolution = get<double>(j, "resolution");
    for (const auto& [tick, cell] : get<std::vector<std::pair<Tick, std::uint32_t>>>(j, "witness"))
        v.witness.push_back({tick, cell});
    return v;
}

Json to_json(const Forest& forest)
{
    Json j;
    j["format_version"] = kFormatVersion;
    j["roots"] = forest.roots;
    j["parent"] = forest.parent;
    j["depth"] = forest.depth;
    j["sub_tick"] = forest.sub_tick;
    j["lock_tick"] = forest.lock_tick;
    return j;
}

Forest forest_from_json(const Json& j)
{
    check_format_version(j);
    Forest f;
    f.roots = get<std::vector<NodeId>>(j, "roots");
    f.parent = get<std::vector<NodeId>>(j, "parent");
    f.depth = get<std::vector<int>>(j, "depth");
    f.sub_tick = get<std::vector<Tick>>(j, "sub_tick");
    f.lock_tick = get<std::vector<Tick>>(j, "lock_tick");
    const auto size = f.parent.size();
    if (f.depth.size() != size || f.sub_tick.size() != size || f.lock_tick.size() != size)
        parse_fail("forest arrays differ in length");
    return f;
}

Json basis_to_json(const H1Basis& basis)
{
    Json j;
    j["format_version"] = kFormatVersion;
    j["rank"] = basis.rank();
    Json cycles = Json::array();
    for (std::size_t i = 0; i < basis.cycles().size(); ++i)
    {
        const auto loop = basis.cycles()[i].as_loop();
        if (loop)
            cycles.push_back(Json{{"loop", *loop}});
        else
        {
            Json terms = Json::array();
            for (const auto& [edge, c] : basis.cycles()[i].terms()) terms.push_back(Json::array({edge[0], edge[1], c}));
            cycles.push_back(Json{{"terms", std::move(terms)}});
        }
    }
    j["cycles"] = std::move(cycles);
    return j;
}

std::vector<Chain1> basis_cycles_from_json(const Json& j)
{
    check_format_version(j);
    std::vector<Chain1> out;
    for (const auto& c : get<Json>(j, "cycles"))
    {
        if (c.contains("loop"))
            out.push_back(Chain1::from_loop(get<std::vector<NodeId>>(c, "loop")));
        else
        {
            Chain1 chain;
            for (const auto& [a, b, k] : get<std::vector<std::tuple<NodeId, NodeId, long long>>>(c, "terms"))
                chain.add(a, b, k);
            out.push_back(std::move(chain));
        }
    }
    if (out.size() != get<std::size_t>(j, "rank")) parse_fail("rank does not match the cycle count");
    return out;
}

Json class_to_json(const std::vector<long long>& cls, std::string_view label)
{
    return Json{{"format_version", kFormatVersion}, {"label", label}, {"class", cls}};
}

std::vector<long long> class_from_json(const Json& j)
{
    check_format_version(j);
    return get<std::vector<long long>>(j, "class");
}

std::string sha256_hex(std::string_view bytes)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1)
        throw Error(Errc::InternalConsistency, "SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i)
    {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

}  // namespace ghm
