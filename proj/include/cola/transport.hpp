#pragma once

#include "cola/core/basket.hpp"
#include "cola/core/cross_section.hpp"
#include "cola/core/gauge.hpp"
#include "cola/core/utility.hpp"
#include "cola/errors.hpp"
#include "cola/monotone_cubic.hpp"
#include "cola/rk4.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cola {

inline constexpr std::size_t default_steps_per_unit = 1000;

// ---------------------------------------------------------------------------
// One-dimensional transport along a line

/// A connection on the real line: the function A in the covariant
/// derivative d/dt + A.
struct Connection1D
{
    std::function<double(double)> a;

    static Connection1D trivial() { return {[](double) { return 0.0; }}; }
    static Connection1D constant(double k) { return {[k](double) { return k; }}; }
    static Connection1D linear(double k) { return {[k](double x) { return k * x; }}; }
};

/// tau_{q,p}(x): solves f' + A(p + t) f = 0, f(0) = x on [0, q - p] with
/// fixed-step RK4 and returns f(q - p).
inline double transport_1d(const Connection1D& conn, double p, double q, double x, std::size_t steps = 1000)
{
    if (!(q >= p))
        throw DomainError("transport requires to >= from");
    if (steps == 0)
        throw DomainError("transport needs at least one step");
    if (!conn.a)
        throw DomainError("connection has no evaluator");
    auto rhs = [&](double t, double f) {
        const double a = conn.a(p + t);
        if (!std::isfinite(a))
            throw DomainError("connection sample at x = " + std::to_string(p + t) + " is not finite");
        return -a * f;
    };
    return ode::integrate_rk4(rhs, 0.0, x, q - p, steps);
}

// ---------------------------------------------------------------------------
// Cost generators and the adjustments they generate

/// Time-dependent vector field v(t, c) on costs; its flow is a cost adjustment.
struct CostGenerator
{
    std::function<double(double, double)> v;
    double t_min = -std::numeric_limits<double>::infinity();
    double t_max = std::numeric_limits<double>::infinity();
    std::string description;
    /// Shared by copies of one generator; flows compose as flows only when
    /// their tags match.
    std::shared_ptr<const int> tag = std::make_shared<const int>(0);

    [[nodiscard]] double operator()(double t, double c) const { return v(t, c); }

    [[nodiscard]] bool same_field(const CostGenerator& other) const noexcept { return tag == other.tag; }

    static CostGenerator make(std::function<double(double, double)> v, std::string description)
    {
        CostGenerator g;
        g.v = std::move(v);
        g.description = std::move(description);
        return g;
    }

    static CostGenerator zero() { return make([](double, double) { return 0.0; }, "zero"); }

    /// v = k, a uniform absolute drift.
    static CostGenerator constant(double k)
    {
        return make([k](double, double) { return k; }, "const:" + std::to_string(k));
    }

    /// v = k c, a uniform relative drift.
    static CostGenerator relative(double k)
    {
        return make([k](double, double c) { return k * c; }, "relative:" + std::to_string(k));
    }

    /// v = r(t) c with r piecewise linear through (times, rates), constant
    /// beyond the end knots.
    static CostGenerator relative_rate(std::vector<double> times, std::vector<double> rates)
    {
        if (times.empty() || times.size() != rates.size())
            throw DomainError("rate table needs matching, non-empty time and rate lists");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw DomainError("rate table times must be strictly increasing");
        auto rate = [times, rates](double t) {
            if (t <= times.front())
                return rates.front();
            if (t >= times.back())
                return rates.back();
            const auto k = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin()) - 1;
            const double w = (t - times[k]) / (times[k + 1] - times[k]);
            return (1 - w) * rates[k] + w * rates[k + 1];
        };
        return make([rate](double t, double c) { return rate(t) * c; }, "tabulated");
    }
};

namespace detail {

/// Integrates dc/dt = v(t, c) from t0 to t1. Steps whose RK4 stages leave
/// the positive half-line are retried with up to 2^20 substeps.
inline double integrate_cost(const CostGenerator& gen, double t0, double t1, double c,
                             std::size_t steps_per_unit = default_steps_per_unit)
{
    if (t0 == t1)
        return c;
    if (!(c > 0) || !std::isfinite(c))
        throw DomainError("cost must be finite and strictly positive");
    const double span = std::abs(t1 - t0);
    const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span * static_cast<double>(steps_per_unit) - 1e-9)));
    const double h = (t1 - t0) / static_cast<double>(steps);

    bool escaped = false;
    auto rhs = [&](double t, double y) {
        if (!(y > 0) || !std::isfinite(y)) {
            escaped = true;
            return 0.0;
        }
        const double v = gen.v(t, y);
        if (!std::isfinite(v))
            escaped = true;
        return v;
    };
    auto escape = [&](double t) {
        return FlowEscape("cost trajectory from c = " + std::to_string(c) + " escaped the positive half-line near t = "
                          + std::to_string(t));
    };

    double y = c;
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = t0 + static_cast<double>(i) * h;
        double next = 0;
        bool ok = false;
        for (std::size_t sub = 1; sub <= (std::size_t{1} << 20); sub *= 2) {
            escaped = false;
            const double hs = h / static_cast<double>(sub);
            next = y;
            for (std::size_t j = 0; j < sub && !escaped; ++j)
                next = ode::rk4_step(rhs, t + static_cast<double>(j) * hs, next, hs);
            if (!escaped && next > 0 && std::isfinite(next)) {
                ok = true;
                break;
            }
        }
        if (!ok || next > 1e300)
            throw escape(t);
        y = next;
    }
    return y;
}

inline bool same_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

} // namespace detail

/// A realized element of Diff+(R+) carrying costs at time t_from to costs at
/// time t_to. Forward and inverse maps are kept together so the group
/// operations are exact function compositions.
class CostAdjustment
{
public:
    enum class Provenance { Naive, Flow, Explicit };
    using Map = std::function<double(double)>;

    static CostAdjustment identity(double t_from, double t_to)
    {
        auto id = [](double c) { return c; };
        return CostAdjustment(t_from, t_to, id, id, Provenance::Naive);
    }

    /// c -> factor * c.
    static CostAdjustment scaling(double t_from, double t_to, double factor)
    {
        if (!(factor > 0) || !std::isfinite(factor))
            throw DomainError("scaling factor must be finite and strictly positive");
        return CostAdjustment(t_from, t_to, [factor](double c) { return factor * c; },
                              [factor](double c) { return c / factor; }, Provenance::Explicit);
    }

    /// Monotone cubic through (cost, adjusted cost) knots.
    static CostAdjustment tabulated(double t_from, double t_to, std::vector<double> costs, std::vector<double> adjusted)
    {
        if (costs.empty() || costs.front() <= 0)
            throw DomainError("tabulated adjustment knots must be positive costs");
        MonotoneCubic table(costs, adjusted);
        if (!table.increasing_values() || adjusted.front() <= 0)
            throw NonMonotone("tabulated adjustment values must be positive and strictly increasing");
        auto shared = std::make_shared<const MonotoneCubic>(std::move(table));
        CostAdjustment adj(t_from, t_to, [shared](double c) { return (*shared)(c); },
                           [shared](double c) { return shared->inverse(c); }, Provenance::Explicit);
        adj.knots_ = std::move(costs);
        adj.knot_values_ = std::move(adjusted);
        return adj;
    }

    /// Caller-supplied forward/inverse pair; no checks beyond sampling.
    static CostAdjustment from_maps(double t_from, double t_to, Map forward, Map inverse)
    {
        return CostAdjustment(t_from, t_to, std::move(forward), std::move(inverse), Provenance::Explicit);
    }

    [[nodiscard]] double t_from() const noexcept { return t_from_; }
    [[nodiscard]] double t_to() const noexcept { return t_to_; }
    [[nodiscard]] Provenance provenance() const noexcept { return provenance_; }
    [[nodiscard]] const std::shared_ptr<const CostGenerator>& generator() const noexcept { return generator_; }
    /// Costs on which the adjustment was realized (empty for analytic ones).
    [[nodiscard]] std::span<const double> knots() const noexcept { return knots_; }
    [[nodiscard]] std::span<const double> knot_values() const noexcept { return knot_values_; }

    [[nodiscard]] double operator()(double c) const { return forward(c); }

    [[nodiscard]] double forward(double c) const
    {
        if (!(c > 0) || !std::isfinite(c))
            throw DomainError("cost must be finite and strictly positive");
        return forward_(c);
    }

    [[nodiscard]] double inverse(double c) const
    {
        if (!(c > 0) || !std::isfinite(c))
            throw DomainError("cost must be finite and strictly positive");
        return inverse_(c);
    }

private:
    friend CostAdjustment flow_adjustment(const CostGenerator&, double, double, std::span<const double>, std::size_t);
    friend CostAdjustment compose_adjustments(const CostAdjustment&, const CostAdjustment&);
    friend CostAdjustment invert_adjustment(const CostAdjustment&);

    CostAdjustment(double t_from, double t_to, Map forward, Map inverse, Provenance provenance)
        : t_from_(t_from), t_to_(t_to), forward_(std::move(forward)), inverse_(std::move(inverse)),
          provenance_(provenance)
    {
        if (!std::isfinite(t_from) || !std::isfinite(t_to))
            throw DomainError("adjustment times must be finite");
    }

    double t_from_;
    double t_to_;
    Map forward_;
    Map inverse_;
    Provenance provenance_;
    std::shared_ptr<const CostGenerator> generator_;
    std::vector<double> knots_;
    std::vector<double> knot_values_;
};

/// Upsilon_{t_b, t_a}: the time-t_a to time-t_b flow of dc/dt = v(t, c),
/// realized on c_grid and evaluable at any positive cost.
inline CostAdjustment flow_adjustment(const CostGenerator& v, double t_a, double t_b, std::span<const double> c_grid,
                                      std::size_t steps_per_unit = default_steps_per_unit)
{
    if (!v.v)
        throw DomainError("generator has no evaluator");
    if (t_a < v.t_min || t_a > v.t_max || t_b < v.t_min || t_b > v.t_max)
        throw DomainError("flow interval lies outside the generator's time domain");
    for (std::size_t i = 0; i < c_grid.size(); ++i)
        if (!(c_grid[i] > 0) || (i > 0 && !(c_grid[i] > c_grid[i - 1])))
            throw DomainError("cost grid must be positive and strictly increasing");

    auto gen = std::make_shared<const CostGenerator>(v);
    CostAdjustment adj(
        t_a, t_b, [gen, t_a, t_b, steps_per_unit](double c) { return detail::integrate_cost(*gen, t_a, t_b, c, steps_per_unit); },
        [gen, t_a, t_b, steps_per_unit](double c) { return detail::integrate_cost(*gen, t_b, t_a, c, steps_per_unit); },
        CostAdjustment::Provenance::Flow);
    adj.generator_ = gen;
    adj.knots_.assign(c_grid.begin(), c_grid.end());
    adj.knot_values_.reserve(c_grid.size());
    for (double c : c_grid) {
        const double out = adj.forward(c);
        if (!adj.knot_values_.empty() && !(out > adj.knot_values_.back()))
            throw NonMonotone("flow trajectories crossed between costs " + std::to_string(adj.knots_[adj.knot_values_.size() - 1])
                              + " and " + std::to_string(c));
        adj.knot_values_.push_back(out);
    }
    return adj;
}

/// later o earlier, carrying costs from earlier.t_from to later.t_to.
inline CostAdjustment compose_adjustments(const CostAdjustment& later, const CostAdjustment& earlier)
{
    if (!detail::same_time(earlier.t_to(), later.t_from()))
        throw TimeMismatch("cannot compose: earlier adjustment ends at t = " + std::to_string(earlier.t_to())
                           + " but later one starts at t = " + std::to_string(later.t_from()));
    using P = CostAdjustment::Provenance;
    P provenance = P::Explicit;
    if (later.provenance() == P::Naive && earlier.provenance() == P::Naive)
        provenance = P::Naive;
    else if (later.provenance() == P::Flow && earlier.provenance() == P::Flow
             && later.generator()->same_field(*earlier.generator()))
        provenance = P::Flow;
    CostAdjustment adj(
        earlier.t_from(), later.t_to(), [later, earlier](double c) { return later.forward(earlier.forward(c)); },
        [later, earlier](double c) { return earlier.inverse(later.inverse(c)); }, provenance);
    if (provenance == P::Flow)
        adj.generator_ = later.generator();
    adj.knots_.assign(earlier.knots().begin(), earlier.knots().end());
    for (double c : earlier.knot_values())
        adj.knot_values_.push_back(later.forward(c));
    return adj;
}

/// Upsilon^{-1}: swaps the endpoint times and the forward/inverse maps.
inline CostAdjustment invert_adjustment(const CostAdjustment& adj)
{
    const auto values = adj.knot_values();
    for (std::size_t i = 1; i < values.size(); ++i)
        if (!(values[i] > values[i - 1]))
            throw NonMonotone("adjustment is not strictly increasing on its knots");
    CostAdjustment inv(adj.t_to(), adj.t_from(), adj.inverse_, adj.forward_, adj.provenance());
    inv.generator_ = adj.generator_;
    inv.knots_ = adj.knot_values_;
    inv.knot_values_ = adj.knots_;
    return inv;
}

/// Central-difference estimate of the generator behind a family of
/// adjustments: v(t, c) ~ (Upsilon_{t+h,t}(c) - Upsilon_{t-h,t}(c)) / 2h.
inline double estimate_generator(const std::function<CostAdjustment(double, double)>& family, double t, double c,
                                 double h = 1e-4)
{
    return (family(t, t + h)(c) - family(t, t - h)(c)) / (2 * h);
}

struct GroupLawReport
{
    double identity_error = 0;
    double inverse_error = 0;
    double composition_error = 0;

    [[nodiscard]] bool passed(double tol) const
    {
        return identity_error == 0 && inverse_error <= tol && composition_error <= tol;
    }
};

/// Measures the one-parameter group laws for the flow of v on t_a, t_b, t_c
/// over c_grid: Upsilon_{t,t} = id, Upsilon_{a,b} o Upsilon_{b,a} = id and
/// Upsilon_{c,b} o Upsilon_{b,a} = Upsilon_{c,a}. Errors are relative.
inline GroupLawReport check_group_laws(const CostGenerator& v, double t_a, double t_b, double t_c,
                                       std::span<const double> c_grid,
                                       std::size_t steps_per_unit = default_steps_per_unit)
{
    GroupLawReport report;
    const auto stay = flow_adjustment(v, t_a, t_a, c_grid, steps_per_unit);
    const auto ab = flow_adjustment(v, t_a, t_b, c_grid, steps_per_unit);
    const auto ba = flow_adjustment(v, t_b, t_a, c_grid, steps_per_unit);
    const auto bc = flow_adjustment(v, t_b, t_c, c_grid, steps_per_unit);
    const auto ac = flow_adjustment(v, t_a, t_c, c_grid, steps_per_unit);
    const auto round_trip = compose_adjustments(ba, ab);
    const auto chained = compose_adjustments(bc, ab);
    for (double c : c_grid) {
        report.identity_error = std::max(report.identity_error, std::abs(stay(c) - c));
        report.inverse_error = std::max(report.inverse_error, std::abs(round_trip(c) - c) / c);
        const double direct = ac(c);
        report.composition_error = std::max(report.composition_error, std::abs(chained(c) - direct) / direct);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Horizontality

/// A tangent vector to (C, X): gamma varies the utility, nu moves the section.
struct TangentPerturbation
{
    std::function<double(const Basket&)> gamma;
    std::function<std::vector<double>(const Basket&)> nu;
};

struct HorizontalityReport
{
    bool horizontal = true;
    double worst_gamma = 0;
    /// Largest |cos| between grad C and nu over the grid.
    double worst_normal_cosine = 0;
    std::optional<double> failing_utility;
    std::string message;
};

/// Checks, at X(u) for every u in the grid, that gamma vanishes and nu is
/// tangent to the level set: |grad C . nu| <= tol |grad C| |nu|.
inline HorizontalityReport horizontality_check(const UtilityFunction& c, const CrossSection& x,
                                               const TangentPerturbation& pert, std::span<const double> u_grid,
                                               double tol = default_tolerance)
{
    if (!pert.gamma || !pert.nu)
        throw DomainError("perturbation needs both gamma and nu");
    HorizontalityReport report;
    for (double u : u_grid) {
        const Basket q = x(u);
        const auto grad = c.gradient(q);
        const auto nu = pert.nu(q);
        if (nu.size() != grad.size())
            throw DomainError("basket variation has wrong dimension");
        double dot = 0, gn = 0, nn = 0;
        for (std::size_t i = 0; i < grad.size(); ++i) {
            dot += grad[i] * nu[i];
            gn += grad[i] * grad[i];
            nn += nu[i] * nu[i];
        }
        const double gamma = std::abs(pert.gamma(q));
        const double scale = std::sqrt(gn) * std::sqrt(nn);
        const double cosine = scale > 0 ? std::abs(dot) / scale : 0.0;
        report.worst_gamma = std::max(report.worst_gamma, gamma);
        report.worst_normal_cosine = std::max(report.worst_normal_cosine, cosine);
        const bool ok = gamma <= tol && std::abs(dot) <= tol * scale;
        if (!ok && report.horizontal) {
            report.horizontal = false;
            report.failing_utility = u;
            report.message = gamma > tol ? "utility variation does not vanish on the section at u = " + std::to_string(u)
                                         : "basket variation leaves the level set at u = " + std::to_string(u);
        }
    }
    if (report.horizontal)
        report.message = "horizontal on all " + std::to_string(u_grid.size()) + " grid levels";
    return report;
}

} // namespace cola
