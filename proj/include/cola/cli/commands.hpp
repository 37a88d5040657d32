#pragma once

// Command implementations behind the `cola` executable. Each returns a
// process exit status and writes only to the streams it is given.

#include "cola/core/level_set.hpp"
#include "cola/errors.hpp"
#include "cola/io/scenario_file.hpp"
#include "cola/min_basket.hpp"
#include "cola/transport.hpp"
#include "cola/welfare.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cola::cli {

enum ExitCode : int { success = 0, input_error = 1, numeric_failure = 2, validation_failure = 3 };

enum class Reference { Cost, Utility };

struct Options
{
    std::string scenario_path;
    std::optional<double> base_time;
    std::string output_path;
    double tolerance = default_tolerance;
    std::size_t steps = default_steps_per_unit;
    Reference reference = Reference::Cost;
};

/// Fixed notation with 12 decimals for magnitudes in [0.1, 1e6), otherwise
/// scientific with 12 significant digits. Locale independent.
inline std::string format_number(double x)
{
    char buf[64];
    const double ax = std::abs(x);
    if (x == 0 || (ax >= 0.1 && ax < 1e6))
        std::snprintf(buf, sizeof buf, "%.12f", x);
    else
        std::snprintf(buf, sizeof buf, "%.11e", x);
    std::string out = buf;
    if (out.find_first_not_of("-0.") == std::string::npos && out.front() == '-')
        out.erase(0, 1); // no negative zero
    return out;
}

struct ResultRow
{
    double time;
    double reference_cost;
    double index;
    double adjusted_cost;
    std::vector<double> basket;
};

struct ResultTable
{
    std::size_t goods = 0;
    std::vector<ResultRow> rows;
};

inline void write_csv(const ResultTable& table, std::ostream& out)
{
    out << "time,reference_cost,index,adjusted_cost";
    for (std::size_t i = 1; i <= table.goods; ++i)
        out << ",q" << i;
    out << '\n';
    for (const auto& row : table.rows) {
        out << format_number(row.time) << ',' << format_number(row.reference_cost) << ','
            << format_number(row.index) << ',' << format_number(row.adjusted_cost);
        for (double q : row.basket)
            out << ',' << format_number(q);
        out << '\n';
    }
}

/// Computes the index table, time-major then cost. Cell failures are
/// collected into `errors` and leave the table without that row.
inline ResultTable compute_index_table(const io::ScenarioFile& file, const Options& opt,
                                       std::vector<std::string>& errors)
{
    const Scenario s = file.scenario();
    const double t_a = opt.base_time.value_or(file.base_time);
    if (!opt.base_time)
        (void)s.index_of(t_a);
    ResultTable table{s.goods(), {}};
    auto cell = [&](double t, double c) -> std::optional<IndexEvaluation> {
        try {
            if (opt.reference == Reference::Utility)
                return fixed_utility_index(s, t_a, t, c, opt.tolerance);
            const auto family = file.family(t_a, opt.steps);
            return cola_index_detail(s, family(t_a, t), t_a, t, c, opt.tolerance);
        } catch (const InputError&) {
            throw;
        } catch (const Error& e) {
            errors.push_back("t = " + format_number(t) + ", c = " + format_number(c) + ": " + e.what());
            return std::nullopt;
        }
    };
    for (double t : s.times())
        for (double c : file.costs)
            if (auto e = cell(t, c))
                table.rows.push_back({t, c, e->index, e->adjusted_cost, e->basket.vector()});
    return table;
}

namespace detail {

inline bool check_base_time(const io::ScenarioFile& file, const Options& opt, std::ostream& err)
{
    if (!opt.base_time)
        return true;
    for (double t : file.times)
        if (cola::detail::same_time(t, *opt.base_time))
            return true;
    err << "error: --base-time " << format_number(*opt.base_time) << " is not one of the period times\n";
    return false;
}

inline std::optional<io::ScenarioFile> load(const Options& opt, std::ostream& err)
{
    try {
        return io::read_scenario_file(opt.scenario_path);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return std::nullopt;
    }
}

} // namespace detail

inline int run_index(const io::ScenarioFile& file, const Options& opt, std::ostream& out, std::ostream& err)
{
    if (!detail::check_base_time(file, opt, err))
        return input_error;
    std::vector<std::string> errors;
    ResultTable table;
    try {
        table = compute_index_table(file, opt, errors);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return input_error;
    }
    if (!errors.empty()) {
        for (const auto& e : errors)
            err << "numeric failure at " << e << '\n';
        return numeric_failure;
    }
    if (opt.output_path.empty() || opt.output_path == "-") {
        write_csv(table, out);
        return success;
    }
    std::ofstream file_out(opt.output_path, std::ios::binary);
    if (!file_out) {
        err << "error: cannot write " << opt.output_path << '\n';
        return input_error;
    }
    write_csv(table, file_out);
    return file_out ? success : input_error;
}

inline int cmd_index(const Options& opt, std::ostream& out, std::ostream& err)
{
    const auto file = detail::load(opt, err);
    return file ? run_index(*file, opt, out, err) : input_error;
}

/// What cmd_validate checks. Built from a scenario file, or directly by
/// callers that need utilities a file cannot express.
struct ValidationInput
{
    Scenario scenario;
    AdjustmentFamily family;
    std::optional<CostGenerator> generator;
    std::vector<double> costs;
    double base_time;
};

inline ValidationInput validation_input(const io::ScenarioFile& file, const Options& opt)
{
    const double t_a = opt.base_time.value_or(file.base_time);
    std::optional<CostGenerator> generator;
    if (file.adjustment.kind == io::AdjustmentSpec::Kind::Generator)
        generator = file.adjustment.generator.build();
    return {file.scenario(), file.family(t_a, opt.steps), generator, file.costs, t_a};
}

namespace detail {

inline std::string basket_text(const Basket& q)
{
    std::string s = "(";
    for (std::size_t i = 0; i < q.size(); ++i)
        s += (i ? ", " : "") + format_number(q[i]);
    return s + ")";
}

/// Level of the equal-expenditure basket of cost c: always defined.
inline double probe_level(const UtilityFunction& u, const PriceFunctional& p, double c)
{
    std::vector<double> q(p.dimension());
    for (std::size_t i = 0; i < q.size(); ++i)
        q[i] = c / (static_cast<double>(q.size()) * p[i]);
    return u.value_at(q);
}

} // namespace detail

/// Runs every check, printing one PASS/FAIL line each.
inline int run_validate(const ValidationInput& in, const Options& opt, std::ostream& out)
{
    const Scenario& s = in.scenario;
    bool all = true;
    auto report = [&](bool ok, const std::string& name, const std::string& detail) {
        all = all && ok;
        out << (ok ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : ": " + detail) << '\n';
    };

    for (std::size_t k = 0; k < s.size(); ++k) {
        const std::string at = " t=" + format_number(s.times()[k]);
        const auto& c = s.utility(k);
        const auto& p = s.prices(k);
        std::vector<double> levels;
        for (double cost : in.costs)
            levels.push_back(detail::probe_level(c, p, cost));

        bool convex = true;
        std::string why;
        try {
            for (double u : levels) {
                const auto r = validate_convex_to_origin(c, u, 64, opt.tolerance);
                if (!r.passed) {
                    convex = false;
                    why = r.message + "; witness q = " + detail::basket_text(*r.witness_first) + ", q' = "
                          + detail::basket_text(*r.witness_second) + ", midpoint = "
                          + detail::basket_text(*r.witness_midpoint);
                    break;
                }
            }
        } catch (const Error& e) {
            convex = false;
            why = e.what();
        }
        report(convex, "convexity" + at, why);

        bool section = true;
        why.clear();
        try {
            section = validate_cross_section(minimal_price_section(c, p, opt.tolerance), levels, 1e-7);
            if (!section)
                why = "minimal baskets miss their utility levels";
        } catch (const Error& e) {
            section = false;
            why = e.what();
        }
        report(section, "cross-section" + at, why);
    }

    if (in.generator && s.size() >= 2) {
        const auto times = s.times();
        const double ta = times.front(), tb = times[times.size() / 2], tc = times.back();
        try {
            std::vector<double> grid = in.costs;
            std::sort(grid.begin(), grid.end());
            grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
            const auto r = check_group_laws(*in.generator, ta, tb, tc, grid, opt.steps);
            report(r.passed(1e-7), "group laws",
                   "inverse error " + format_number(r.inverse_error) + ", composition error "
                       + format_number(r.composition_error));
        } catch (const Error& e) {
            report(false, "group laws", e.what());
        }
    }

    try {
        const auto series = index_series(s, in.family, in.base_time, in.costs, opt.tolerance);
        std::string why;
        for (const auto& sr : series)
            for (const auto& e : sr.entries)
                if (!e.value && why.empty())
                    why = "t = " + format_number(e.time) + ", c = " + format_number(sr.reference_cost) + ": " + e.error;
        report(why.empty(), "index routes agree", why);
    } catch (const Error& e) {
        report(false, "index routes agree", e.what());
    }
    return all ? success : validation_failure;
}

inline int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err)
{
    const auto file = detail::load(opt, err);
    if (!file)
        return input_error;
    if (!detail::check_base_time(*file, opt, err))
        return input_error;
    try {
        return run_validate(validation_input(*file, opt), opt, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return input_error;
    }
}

/// zero | const:k | linear:k (A(x) = k x).
inline Connection1D parse_connection(std::string_view spec)
{
    if (spec == "zero")
        return Connection1D::trivial();
    const auto colon = spec.find(':');
    const auto name = spec.substr(0, colon);
    if (colon == std::string_view::npos || (name != "const" && name != "linear"))
        throw InputError("connection: expected zero, const:k or linear:k, got '" + std::string(spec) + "'");
    double k = 0;
    const auto text = spec.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(k))
        throw InputError("connection: '" + std::string(text) + "' is not a finite number");
    return name == "const" ? Connection1D::constant(k) : Connection1D::linear(k);
}

inline int cmd_transport(std::string_view connection, double from, double to, double initial, std::size_t steps,
                         std::ostream& out, std::ostream& err)
{
    try {
        const auto conn = parse_connection(connection);
        if (!(to >= from))
            throw InputError("transport: --to must not be less than --from");
        if (steps == 0)
            throw InputError("steps: must be at least 1");
        const double value = transport_1d(conn, from, to, initial, steps);
        if (!std::isfinite(value)) {
            err << "numeric failure: transported value is not finite\n";
            return numeric_failure;
        }
        out << format_number(value) << '\n';
        return success;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return input_error;
    } catch (const Error& e) {
        err << "numeric failure: " << e.what() << '\n';
        return numeric_failure;
    }
}

} // namespace cola::cli
