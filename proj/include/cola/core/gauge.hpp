#pragma once

#include "cola/core/basket.hpp"
#include "cola/core/utility.hpp"
#include "cola/errors.hpp"
#include "cola/monotone_cubic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cola {

/// Default relative tolerance used across the library.
inline constexpr double default_tolerance = 1e-8;

/// An orientation-preserving reparameterization of the utility scale,
/// an element of Diff+(R+). Represented either as a pure scaling u -> s*u
/// or as a shape-preserving cubic through strictly increasing knots.
class GaugeMap
{
public:
    enum class Representation { Affine, Tabulated };

    static GaugeMap identity() { return affine(1.0); }

    static GaugeMap affine(double scale)
    {
        if (!(scale > 0) || !std::isfinite(scale))
            throw DomainError("gauge scale must be finite and strictly positive");
        GaugeMap g;
        g.rep_ = Affine{scale};
        return g;
    }

    static GaugeMap tabulated(MonotoneCubic table)
    {
        if (table.xs().front() <= 0 || table.ys().front() <= 0)
            throw DomainError("tabulated gauge must map positive utilities to positive utilities");
        if (!table.increasing_values())
            throw NonMonotone("tabulated gauge knots must be strictly increasing");
        GaugeMap g;
        g.rep_ = std::move(table);
        return g;
    }

    static GaugeMap from_knots(std::vector<double> us, std::vector<double> values)
    {
        return tabulated(MonotoneCubic(std::move(us), std::move(values)));
    }

    /// Samples f on `knots` log-spaced utilities over [u_min, u_max]. When the
    /// derivative is supplied the Hermite slopes are exact (subject to the
    /// monotonicity limiter), otherwise PCHIP slopes are used.
    static GaugeMap tabulate(const std::function<double(double)>& f, double u_min, double u_max,
                             std::size_t knots = 256, const std::function<double(double)>& df = {})
    {
        if (!(u_min > 0) || !(u_max > u_min) || knots < 2)
            throw DomainError("tabulation needs 0 < u_min < u_max and at least two knots");
        std::vector<double> xs(knots), ys(knots);
        const double step = std::log(u_max / u_min) / static_cast<double>(knots - 1);
        for (std::size_t i = 0; i < knots; ++i) {
            xs[i] = i + 1 == knots ? u_max : u_min * std::exp(step * static_cast<double>(i));
            ys[i] = f(xs[i]);
        }
        if (!df)
            return from_knots(std::move(xs), std::move(ys));
        std::vector<double> ds(knots);
        for (std::size_t i = 0; i < knots; ++i)
            ds[i] = df(xs[i]);
        return tabulated(MonotoneCubic(std::move(xs), std::move(ys), std::move(ds)));
    }

    [[nodiscard]] Representation representation() const noexcept
    {
        return std::holds_alternative<Affine>(rep_) ? Representation::Affine : Representation::Tabulated;
    }

    /// Scale factor of an affine gauge; throws for tabulated ones.
    [[nodiscard]] double scale() const
    {
        if (auto* a = std::get_if<Affine>(&rep_))
            return a->scale;
        throw DomainError("tabulated gauge has no scale factor");
    }

    [[nodiscard]] const MonotoneCubic* table() const noexcept { return std::get_if<MonotoneCubic>(&rep_); }

    [[nodiscard]] double domain_min() const { return table() ? table()->x_min() : 0.0; }
    [[nodiscard]] double domain_max() const
    {
        return table() ? table()->x_max() : std::numeric_limits<double>::infinity();
    }

    [[nodiscard]] double operator()(double u) const { return forward(u); }

    [[nodiscard]] double forward(double u) const
    {
        if (auto* a = std::get_if<Affine>(&rep_))
            return a->scale * u;
        return std::get<MonotoneCubic>(rep_)(u);
    }

    [[nodiscard]] double inverse(double v) const
    {
        if (auto* a = std::get_if<Affine>(&rep_))
            return v / a->scale;
        return std::get<MonotoneCubic>(rep_).inverse(v);
    }

    [[nodiscard]] double derivative(double u) const
    {
        if (auto* a = std::get_if<Affine>(&rep_))
            return a->scale;
        return std::get<MonotoneCubic>(rep_).derivative(u);
    }

    [[nodiscard]] double second_derivative(double u) const
    {
        if (std::holds_alternative<Affine>(rep_))
            return 0.0;
        return std::get<MonotoneCubic>(rep_).second_derivative(u);
    }

private:
    struct Affine
    {
        double scale;
    };

    GaugeMap() = default;

    std::variant<Affine, MonotoneCubic> rep_ = Affine{1.0};
};

/// outer o inner. Affine pairs stay affine; otherwise the composite is
/// re-tabulated on the inner map's knots (or a default grid).
inline GaugeMap compose(const GaugeMap& outer, const GaugeMap& inner)
{
    using R = GaugeMap::Representation;
    if (outer.representation() == R::Affine && inner.representation() == R::Affine)
        return GaugeMap::affine(outer.scale() * inner.scale());
    std::vector<double> xs;
    if (const auto* t = inner.table())
        xs.assign(t->xs().begin(), t->xs().end());
    else {
        const double lo = outer.domain_min() / inner.scale();
        const double hi = outer.domain_max() / inner.scale();
        const std::size_t n = outer.table()->size();
        xs.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            xs[i] = i + 1 == n ? hi : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    }
    std::vector<double> ys(xs.size()), ds(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double mid = inner(xs[i]);
        ys[i] = outer(mid);
        ds[i] = outer.derivative(mid) * inner.derivative(xs[i]);
    }
    return GaugeMap::tabulated(MonotoneCubic(std::move(xs), std::move(ys), std::move(ds)));
}

/// q -> G(C(q)). Same level sets as C, relabelled.
inline UtilityFunction apply_gauge(const GaugeMap& g, const UtilityFunction& c)
{
    auto value = [g, c](std::span<const double> q) { return g(c.value_at(q)); };
    auto gradient = [g, c](std::span<const double> q) {
        auto grad = c.gradient_at(q);
        const double slope = g.derivative(c.value_at(q));
        for (double& x : grad)
            x *= slope;
        return grad;
    };
    UtilityFunction::HessianFn hessian;
    if (c.has_hessian())
        hessian = [g, c](std::span<const double> q) {
            const double u = c.value_at(q);
            const auto grad = c.gradient_at(q);
            const Eigen::Map<const Eigen::VectorXd> gv(grad.data(), static_cast<Eigen::Index>(grad.size()));
            Eigen::MatrixXd h = g.derivative(u) * *c.hessian_at(q);
            h += g.second_derivative(u) * gv * gv.transpose();
            return h;
        };
    return UtilityFunction::black_box(c.dimension(), std::move(value), std::move(gradient), std::move(hessian),
                                      c.label().empty() ? std::string{} : "G o " + c.label());
}

/// Recovers the monotone G with C2 = G o C1 from sampled baskets. Returns an
/// affine gauge when every sampled ratio C2/C1 agrees to within tol.
inline GaugeMap infer_gauge(const UtilityFunction& c1, const UtilityFunction& c2, std::span<const Basket> samples,
                            double tol = default_tolerance)
{
    if (samples.size() < 2)
        throw DomainError("gauge inference needs at least two samples");
    struct Pair
    {
        double u1, u2;
        std::size_t index;
    };
    std::vector<Pair> pairs;
    pairs.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        pairs.push_back({c1(samples[i]), c2(samples[i]), i});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.u1 < b.u1; });

    auto close = [tol](double a, double b) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); };

    // Collapse samples sharing a C1 level; they must share the C2 level too.
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < pairs.size();) {
        std::size_t j = i;
        double sum1 = 0, sum2 = 0;
        for (; j < pairs.size() && close(pairs[j].u1, pairs[i].u1); ++j) {
            if (!close(pairs[j].u2, pairs[i].u2))
                throw NotSameFoliation("samples " + std::to_string(pairs[i].index) + " and "
                                       + std::to_string(pairs[j].index) + " share first utility "
                                       + std::to_string(pairs[i].u1) + " but have second utilities "
                                       + std::to_string(pairs[i].u2) + " and " + std::to_string(pairs[j].u2));
            sum1 += pairs[j].u1;
            sum2 += pairs[j].u2;
        }
        const double n = static_cast<double>(j - i);
        xs.push_back(sum1 / n);
        ys.push_back(sum2 / n);
        i = j;
    }
    if (xs.size() < 2)
        throw DomainError("gauge inference samples must span at least two distinct levels");

    // Flat steps within tol are dropped; genuine decreases are an error.
    std::size_t kept = 1;
    for (std::size_t i = 1; i < ys.size(); ++i) {
        if (ys[i] > ys[kept - 1]) {
            xs[kept] = xs[i];
            ys[kept] = ys[i];
            ++kept;
        } else if (!close(ys[i], ys[kept - 1]))
            throw NonMonotone("second utility does not increase with the first between levels "
                              + std::to_string(xs[kept - 1]) + " and " + std::to_string(xs[i]));
    }
    xs.resize(kept);
    ys.resize(kept);
    if (xs.size() < 2)
        throw DomainError("gauge inference samples must span at least two distinct levels");

    const double ratio0 = ys.front() / xs.front();
    bool affine = true;
    double ratio_sum = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] / xs[i];
        affine = affine && std::abs(r - ratio0) <= tol * ratio0;
        ratio_sum += r;
    }
    if (affine)
        return GaugeMap::affine(ratio_sum / static_cast<double>(xs.size()));
    return GaugeMap::from_knots(std::move(xs), std::move(ys));
}

} // namespace cola
