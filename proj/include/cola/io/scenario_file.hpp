#pragma once

// Scenario files: line-oriented text with [section] headers and key = value
// pairs. '#' starts a comment. Lists are comma separated; pairs use ':'.
//
//   [scenario]
//   version = 1
//   goods = 2
//   base_time = 1
//   costs = 1, 2, 3, 6
//
//   [period]            one per grid time, in increasing time order
//   time = 1
//   exponents = 1, 1    Cobb-Douglas exponents a_i
//   prices = 1, 1
//
//   [adjustment]
//   kind = naive | scale | generator | tabulated
//   factor = 2          scale: c -> c * factor^(t - base_time)
//   generator = zero | const:k | relative:k | tabulated
//   rates = 1:0.1, 2:0.3    tabulated generator: v = r(t) c, r piecewise linear
//
//   [adjustment.map]    tabulated kind: one per non-base time
//   time = 2
//   knots = 1:1.5, 2:3  cost:adjusted pairs, costs strictly increasing

#include "cola/errors.hpp"
#include "cola/transport.hpp"
#include "cola/welfare.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cola::io {

inline constexpr int scenario_version = 1;
inline constexpr std::size_t max_goods = 64;

struct GeneratorSpec
{
    enum class Kind { Zero, Constant, Relative, Tabulated };
    Kind kind = Kind::Zero;
    double k = 0;
    std::vector<double> times;
    std::vector<double> rates;

    bool operator==(const GeneratorSpec&) const = default;

    [[nodiscard]] CostGenerator build() const
    {
        switch (kind) {
        case Kind::Zero: return CostGenerator::zero();
        case Kind::Constant: return CostGenerator::constant(k);
        case Kind::Relative: return CostGenerator::relative(k);
        case Kind::Tabulated: return CostGenerator::relative_rate(times, rates);
        }
        throw DomainError("unknown generator kind");
    }
};

struct AdjustmentMap
{
    double time = 0;
    std::vector<double> costs;
    std::vector<double> adjusted;

    bool operator==(const AdjustmentMap&) const = default;
};

struct AdjustmentSpec
{
    enum class Kind { Naive, Scale, Generator, Tabulated };
    Kind kind = Kind::Naive;
    double factor = 1;
    GeneratorSpec generator;
    std::vector<AdjustmentMap> maps;

    bool operator==(const AdjustmentSpec&) const = default;
};

struct ScenarioFile
{
    int version = scenario_version;
    std::size_t goods = 0;
    double base_time = 0;
    std::vector<double> costs;
    std::vector<double> times;
    std::vector<std::vector<double>> exponents;
    std::vector<std::vector<double>> prices;
    AdjustmentSpec adjustment;

    bool operator==(const ScenarioFile&) const = default;

    [[nodiscard]] Scenario scenario() const
    {
        std::vector<UtilityFunction> utilities;
        std::vector<PriceFunctional> price_list;
        for (std::size_t i = 0; i < times.size(); ++i) {
            utilities.push_back(UtilityFunction::cobb_douglas(exponents[i]));
            price_list.emplace_back(prices[i]);
        }
        return Scenario(times, std::move(utilities), std::move(price_list));
    }

    /// Adjustments from `from` to any grid time. Tabulated maps are anchored
    /// at the file's base time.
    [[nodiscard]] AdjustmentFamily family(double from, std::size_t steps_per_unit = default_steps_per_unit) const
    {
        switch (adjustment.kind) {
        case AdjustmentSpec::Kind::Naive: return naive_family();
        case AdjustmentSpec::Kind::Scale: {
            const double factor = adjustment.factor;
            return [factor](double a, double b) { return CostAdjustment::scaling(a, b, std::pow(factor, b - a)); };
        }
        case AdjustmentSpec::Kind::Generator:
            return flow_family(adjustment.generator.build(), {}, steps_per_unit);
        case AdjustmentSpec::Kind::Tabulated: {
            if (!detail::same_time(from, base_time))
                throw InputError("tabulated adjustment maps are anchored at base_time "
                                 + std::to_string(base_time));
            auto maps = adjustment.maps;
            return [maps](double a, double b) {
                if (detail::same_time(a, b))
                    return CostAdjustment::identity(a, b);
                for (const auto& m : maps)
                    if (detail::same_time(m.time, b))
                        return CostAdjustment::tabulated(a, b, m.costs, m.adjusted);
                throw InputError("no adjustment map for time " + std::to_string(b));
            };
        }
        }
        throw DomainError("unknown adjustment kind");
    }
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

class Parser
{
public:
    explicit Parser(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& what) const
    {
        throw InputError(source_ + ":" + std::to_string(line_) + ": " + what);
    }

    void at_line(std::size_t line) { line_ = line; }

    double number(std::string_view text, std::string_view field) const
    {
        text = trim(text);
        double value = 0;
        const char* begin = text.data();
        const char* end = begin + text.size();
        if (!text.empty() && *begin == '+')
            ++begin;
        const auto [ptr, ec] = std::from_chars(begin, end, value);
        if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value))
            fail(std::string(field) + ": '" + std::string(text) + "' is not a finite number");
        return value;
    }

    std::vector<double> list(std::string_view text, std::string_view field) const
    {
        std::vector<double> out;
        text = trim(text);
        if (text.empty())
            return out;
        std::size_t start = 0;
        while (true) {
            const auto comma = text.find(',', start);
            out.push_back(number(text.substr(start, comma - start), field));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        return out;
    }

    std::pair<std::vector<double>, std::vector<double>> pairs(std::string_view text, std::string_view field) const
    {
        std::pair<std::vector<double>, std::vector<double>> out;
        text = trim(text);
        if (text.empty())
            return out;
        std::size_t start = 0;
        while (true) {
            const auto comma = text.find(',', start);
            const auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
            const auto colon = item.find(':');
            if (colon == std::string_view::npos)
                fail(std::string(field) + ": expected x:y pairs");
            out.first.push_back(number(item.substr(0, colon), field));
            out.second.push_back(number(item.substr(colon + 1), field));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        return out;
    }

private:
    std::string source_;
    std::size_t line_ = 0;
};

inline bool strictly_increasing(const std::vector<double>& v)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1]))
            return false;
    return true;
}

} // namespace detail

/// Parses and validates a scenario. Throws InputError naming the source,
/// line and field at fault.
inline ScenarioFile parse_scenario(std::istream& in, const std::string& source = "<input>")
{
    using detail::trim;
    detail::Parser parser(source);
    ScenarioFile file;
    enum class Section { None, Scenario, Period, Adjustment, Map } section = Section::None;
    bool seen_scenario = false, seen_adjustment = false, seen_version = false, seen_base = false;
    std::optional<double> period_time;
    std::optional<std::vector<double>> period_exponents, period_prices;
    std::optional<AdjustmentMap> map;
    bool map_has_time = false;
    std::size_t section_line = 0;

    auto close_section = [&] {
        parser.at_line(section_line);
        if (section == Section::Period) {
            if (!period_time)
                parser.fail("period: missing time");
            if (!period_exponents)
                parser.fail("period: missing exponents");
            if (!period_prices)
                parser.fail("period: missing prices");
            file.times.push_back(*period_time);
            file.exponents.push_back(std::move(*period_exponents));
            file.prices.push_back(std::move(*period_prices));
            period_time.reset();
            period_exponents.reset();
            period_prices.reset();
        } else if (section == Section::Map) {
            if (!map_has_time)
                parser.fail("adjustment.map: missing time");
            file.adjustment.maps.push_back(std::move(*map));
            map.reset();
        }
    };

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        parser.at_line(line_no);
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                parser.fail("unterminated section header");
            const auto name = trim(line.substr(1, line.size() - 2));
            close_section();
            parser.at_line(line_no);
            section_line = line_no;
            if (name == "scenario") {
                if (seen_scenario)
                    parser.fail("duplicate [scenario] section");
                seen_scenario = true;
                section = Section::Scenario;
            } else if (name == "period") {
                section = Section::Period;
            } else if (name == "adjustment") {
                if (seen_adjustment)
                    parser.fail("duplicate [adjustment] section");
                seen_adjustment = true;
                section = Section::Adjustment;
            } else if (name == "adjustment.map") {
                section = Section::Map;
                map.emplace();
                map_has_time = false;
            } else {
                parser.fail("unknown section [" + std::string(name) + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            parser.fail("expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        auto unknown = [&](const char* where) { parser.fail(std::string(where) + ": unknown key '" + key + "'"); };

        switch (section) {
        case Section::None: parser.fail("key '" + key + "' outside any section");
        case Section::Scenario:
            if (key == "version") {
                const double v = parser.number(value, "version");
                if (v != scenario_version)
                    parser.fail("version: unsupported schema version " + std::string(value));
                file.version = scenario_version;
                seen_version = true;
            } else if (key == "goods") {
                const double n = parser.number(value, "goods");
                if (!(n >= 1) || n != std::floor(n))
                    parser.fail("goods: must be a positive integer");
                if (n > static_cast<double>(max_goods))
                    parser.fail("goods: at most " + std::to_string(max_goods) + " goods are supported");
                file.goods = static_cast<std::size_t>(n);
            } else if (key == "base_time") {
                file.base_time = parser.number(value, "base_time");
                seen_base = true;
            } else if (key == "costs") {
                file.costs = parser.list(value, "costs");
            } else {
                unknown("scenario");
            }
            break;
        case Section::Period:
            if (key == "time")
                period_time = parser.number(value, "time");
            else if (key == "exponents")
                period_exponents = parser.list(value, "exponents");
            else if (key == "prices")
                period_prices = parser.list(value, "prices");
            else
                unknown("period");
            break;
        case Section::Adjustment:
            if (key == "kind") {
                if (value == "naive")
                    file.adjustment.kind = AdjustmentSpec::Kind::Naive;
                else if (value == "scale")
                    file.adjustment.kind = AdjustmentSpec::Kind::Scale;
                else if (value == "generator")
                    file.adjustment.kind = AdjustmentSpec::Kind::Generator;
                else if (value == "tabulated")
                    file.adjustment.kind = AdjustmentSpec::Kind::Tabulated;
                else
                    parser.fail("kind: unknown adjustment kind '" + std::string(value) + "'");
            } else if (key == "factor") {
                file.adjustment.factor = parser.number(value, "factor");
                if (!(file.adjustment.factor > 0))
                    parser.fail("factor: must be strictly positive");
            } else if (key == "generator") {
                auto& g = file.adjustment.generator;
                const auto colon = value.find(':');
                const auto name = value.substr(0, colon);
                if (name == "zero" && colon == std::string_view::npos) {
                    g.kind = GeneratorSpec::Kind::Zero;
                } else if (name == "tabulated" && colon == std::string_view::npos) {
                    g.kind = GeneratorSpec::Kind::Tabulated;
                } else if ((name == "const" || name == "relative") && colon != std::string_view::npos) {
                    g.kind = name == "const" ? GeneratorSpec::Kind::Constant : GeneratorSpec::Kind::Relative;
                    g.k = parser.number(value.substr(colon + 1), "generator");
                } else {
                    parser.fail("generator: expected zero, const:k, relative:k or tabulated");
                }
            } else if (key == "rates") {
                auto [times, rates] = parser.pairs(value, "rates");
                if (times.empty() || !detail::strictly_increasing(times))
                    parser.fail("rates: times must be non-empty and strictly increasing");
                file.adjustment.generator.times = std::move(times);
                file.adjustment.generator.rates = std::move(rates);
            } else {
                unknown("adjustment");
            }
            break;
        case Section::Map:
            if (key == "time") {
                map->time = parser.number(value, "time");
                map_has_time = true;
            } else if (key == "knots") {
                auto [costs, adjusted] = parser.pairs(value, "knots");
                if (costs.empty() || !detail::strictly_increasing(costs) || !(costs.front() > 0))
                    parser.fail("knots: costs must be positive and strictly increasing");
                if (!detail::strictly_increasing(adjusted) || !(adjusted.front() > 0))
                    parser.fail("knots: adjusted costs must be positive and strictly increasing");
                map->costs = std::move(costs);
                map->adjusted = std::move(adjusted);
            } else {
                unknown("adjustment.map");
            }
            break;
        }
    }
    close_section();

    // Whole-file checks.
    parser.at_line(line_no);
    if (!seen_scenario)
        parser.fail("missing [scenario] section");
    if (!seen_version)
        parser.fail("version: missing");
    if (file.goods == 0)
        parser.fail("goods: missing");
    if (!seen_base)
        parser.fail("base_time: missing");
    if (file.costs.empty())
        parser.fail("cost grid empty");
    for (double c : file.costs)
        if (!(c > 0))
            parser.fail("costs: reference costs must be strictly positive");
    if (file.times.empty())
        parser.fail("no [period] sections");
    if (!detail::strictly_increasing(file.times))
        parser.fail("time: period times must be strictly increasing");
    for (std::size_t i = 0; i < file.times.size(); ++i) {
        const std::string at = " (period at time " + std::to_string(file.times[i]) + ")";
        if (file.exponents[i].size() != file.goods)
            parser.fail("exponents: expected " + std::to_string(file.goods) + " values" + at);
        if (file.prices[i].size() != file.goods)
            parser.fail("prices: expected " + std::to_string(file.goods) + " values" + at);
        for (double a : file.exponents[i])
            if (!(a > 0))
                parser.fail("exponents: exponents must be strictly positive" + at);
        for (double p : file.prices[i])
            if (!(p > 0))
                parser.fail("prices: prices must be strictly positive" + at);
    }
    bool base_on_grid = false;
    for (double t : file.times)
        base_on_grid = base_on_grid || cola::detail::same_time(t, file.base_time);
    if (!base_on_grid)
        parser.fail("base_time: not one of the period times");

    const auto& adj = file.adjustment;
    if (adj.kind == AdjustmentSpec::Kind::Generator && adj.generator.kind == GeneratorSpec::Kind::Tabulated
        && adj.generator.times.empty())
        parser.fail("rates: required by the tabulated generator");
    if (adj.kind == AdjustmentSpec::Kind::Tabulated) {
        for (double t : file.times) {
            if (cola::detail::same_time(t, file.base_time))
                continue;
            std::size_t hits = 0;
            for (const auto& m : adj.maps)
                hits += cola::detail::same_time(m.time, t) ? 1 : 0;
            if (hits != 1)
                parser.fail("adjustment.map: need exactly one map for time " + std::to_string(t));
        }
        for (const auto& m : adj.maps) {
            if (m.costs.empty())
                parser.fail("knots: missing for map at time " + std::to_string(m.time));
        }
    }
    return file;
}

inline ScenarioFile parse_scenario_text(const std::string& text, const std::string& source = "<input>")
{
    std::istringstream in(text);
    return parse_scenario(in, source);
}

inline ScenarioFile read_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError(path + ": cannot open scenario file");
    return parse_scenario(in, path);
}

namespace detail {

/// Shortest text that parses back to the same double.
inline std::string exact(double x)
{
    char buf[32];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        if (std::strtod(buf, nullptr) == x)
            break;
    }
    return buf;
}

inline std::string join(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? ", " : "") + exact(v[i]);
    return out;
}

inline std::string join_pairs(const std::vector<double>& a, const std::vector<double>& b)
{
    std::string out;
    for (std::size_t i = 0; i < a.size(); ++i)
        out += (i ? ", " : "") + exact(a[i]) + ":" + exact(b[i]);
    return out;
}

} // namespace detail

inline std::string serialize_scenario(const ScenarioFile& file)
{
    using detail::exact;
    std::string out = "[scenario]\n";
    out += "version = " + std::to_string(file.version) + "\n";
    out += "goods = " + std::to_string(file.goods) + "\n";
    out += "base_time = " + exact(file.base_time) + "\n";
    out += "costs = " + detail::join(file.costs) + "\n";
    for (std::size_t i = 0; i < file.times.size(); ++i) {
        out += "\n[period]\n";
        out += "time = " + exact(file.times[i]) + "\n";
        out += "exponents = " + detail::join(file.exponents[i]) + "\n";
        out += "prices = " + detail::join(file.prices[i]) + "\n";
    }
    const auto& adj = file.adjustment;
    out += "\n[adjustment]\n";
    switch (adj.kind) {
    case AdjustmentSpec::Kind::Naive: out += "kind = naive\n"; break;
    case AdjustmentSpec::Kind::Scale: out += "kind = scale\n"; break;
    case AdjustmentSpec::Kind::Generator: out += "kind = generator\n"; break;
    case AdjustmentSpec::Kind::Tabulated: out += "kind = tabulated\n"; break;
    }
    if (adj.factor != 1)
        out += "factor = " + exact(adj.factor) + "\n";
    const auto& g = adj.generator;
    if (g != GeneratorSpec{}) {
        switch (g.kind) {
        case GeneratorSpec::Kind::Zero: out += "generator = zero\n"; break;
        case GeneratorSpec::Kind::Constant: out += "generator = const:" + exact(g.k) + "\n"; break;
        case GeneratorSpec::Kind::Relative: out += "generator = relative:" + exact(g.k) + "\n"; break;
        case GeneratorSpec::Kind::Tabulated: out += "generator = tabulated\n"; break;
        }
        if (!g.times.empty())
            out += "rates = " + detail::join_pairs(g.times, g.rates) + "\n";
    }
    for (const auto& m : adj.maps) {
        out += "\n[adjustment.map]\n";
        out += "time = " + exact(m.time) + "\n";
        out += "knots = " + detail::join_pairs(m.costs, m.adjusted) + "\n";
    }
    return out;
}

} // namespace cola::io
