#pragma once

#include "cola/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cola {

/// Shape-preserving piecewise cubic Hermite interpolant through strictly
/// increasing knots (PCHIP slopes, or caller slopes limited by the
/// Fritsch-Carlson condition). Evaluation outside [front, back] throws.
class MonotoneCubic
{
public:
    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> xs, std::vector<double> ys)
        : xs_(std::move(xs)), ys_(std::move(ys))
    {
        check_knots();
        slopes_ = pchip_slopes();
    }

    MonotoneCubic(std::vector<double> xs, std::vector<double> ys, std::vector<double> slopes)
        : xs_(std::move(xs)), ys_(std::move(ys)), slopes_(std::move(slopes))
    {
        check_knots();
        if (slopes_.size() != xs_.size())
            throw DomainError("slope count does not match knot count");
        limit_slopes();
    }

    [[nodiscard]] std::size_t size() const noexcept { return xs_.size(); }
    [[nodiscard]] std::span<const double> xs() const noexcept { return xs_; }
    [[nodiscard]] std::span<const double> ys() const noexcept { return ys_; }
    [[nodiscard]] std::span<const double> slopes() const noexcept { return slopes_; }
    [[nodiscard]] double x_min() const { return xs_.front(); }
    [[nodiscard]] double x_max() const { return xs_.back(); }
    [[nodiscard]] double y_min() const { return ys_.front(); }
    [[nodiscard]] double y_max() const { return ys_.back(); }

    [[nodiscard]] double operator()(double x) const
    {
        auto [k, t, h] = locate(xs_, x);
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * ys_[k] + (t3 - 2 * t2 + t) * h * slopes_[k]
               + (-2 * t3 + 3 * t2) * ys_[k + 1] + (t3 - t2) * h * slopes_[k + 1];
    }

    [[nodiscard]] double derivative(double x) const
    {
        auto [k, t, h] = locate(xs_, x);
        const double t2 = t * t;
        return (6 * t2 - 6 * t) / h * ys_[k] + (3 * t2 - 4 * t + 1) * slopes_[k]
               + (-6 * t2 + 6 * t) / h * ys_[k + 1] + (3 * t2 - 2 * t) * slopes_[k + 1];
    }

    [[nodiscard]] double second_derivative(double x) const
    {
        auto [k, t, h] = locate(xs_, x);
        return ((12 * t - 6) * ys_[k] + (-12 * t + 6) * ys_[k + 1]) / (h * h)
               + ((6 * t - 4) * slopes_[k] + (6 * t - 2) * slopes_[k + 1]) / h;
    }

    /// Solves interp(x) = y; requires strictly increasing ys.
    [[nodiscard]] double inverse(double y) const
    {
        if (!increasing_values())
            throw NonMonotone("inverse requested for a non-increasing interpolant");
        auto [k, t0, hy] = locate(ys_, y);
        (void)hy;
        if (t0 == 0.0)
            return xs_[k];
        if (t0 == 1.0)
            return xs_[k + 1];
        // Safeguarded Newton on the segment; the cubic is monotone there.
        double lo = xs_[k], hi = xs_[k + 1];
        double x = lo + t0 * (hi - lo);
        for (int it = 0; it < 100; ++it) {
            const double r = (*this)(x)-y;
            if (r == 0.0)
                return x;
            if (r > 0)
                hi = x;
            else
                lo = x;
            const double d = derivative(x);
            double next = d > 0 ? x - r / d : 0.5 * (lo + hi);
            if (!(next > lo && next < hi))
                next = 0.5 * (lo + hi);
            if (std::abs(next - x) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(x))
                return next;
            x = next;
        }
        return x;
    }

    [[nodiscard]] bool increasing_values() const
    {
        for (std::size_t i = 1; i < ys_.size(); ++i)
            if (!(ys_[i] > ys_[i - 1]))
                return false;
        return true;
    }

private:
    struct Cell
    {
        std::size_t k;
        double t;
        double h;
    };

    static Cell locate(const std::vector<double>& grid, double v)
    {
        const double lo = grid.front(), hi = grid.back();
        const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
        if (!std::isfinite(v) || v < lo - slack || v > hi + slack)
            throw OutOfRange("value " + std::to_string(v) + " outside tabulated range ["
                             + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        v = std::clamp(v, lo, hi);
        auto it = std::upper_bound(grid.begin(), grid.end(), v);
        std::size_t k = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
        k = std::min(k, grid.size() - 2);
        const double h = grid[k + 1] - grid[k];
        return {k, (v - grid[k]) / h, h};
    }

    void check_knots() const
    {
        if (xs_.size() < 2 || xs_.size() != ys_.size())
            throw DomainError("monotone interpolant needs at least two (x, y) knots of equal count");
        for (std::size_t i = 0; i < xs_.size(); ++i) {
            if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i]))
                throw DomainError("non-finite knot");
            if (i > 0 && !(xs_[i] > xs_[i - 1]))
                throw DomainError("knot abscissae must be strictly increasing");
        }
    }

    std::vector<double> pchip_slopes() const
    {
        const std::size_t n = xs_.size();
        std::vector<double> h(n - 1), delta(n - 1), d(n, 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            h[k] = xs_[k + 1] - xs_[k];
            delta[k] = (ys_[k + 1] - ys_[k]) / h[k];
        }
        if (n == 2) {
            d[0] = d[1] = delta[0];
            return d;
        }
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (delta[k - 1] * delta[k] <= 0)
                continue;
            const double w1 = 2 * h[k] + h[k - 1];
            const double w2 = h[k] + 2 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
        d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        return d;
    }

    static double edge_slope(double h0, double h1, double m0, double m1)
    {
        double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        auto sign = [](double v) { return (v > 0) - (v < 0); };
        if (sign(d) != sign(m0))
            d = 0;
        else if (sign(m0) != sign(m1) && std::abs(d) > 3 * std::abs(m0))
            d = 3 * m0;
        return d;
    }

    void limit_slopes()
    {
        for (std::size_t k = 0; k + 1 < xs_.size(); ++k) {
            const double delta = (ys_[k + 1] - ys_[k]) / (xs_[k + 1] - xs_[k]);
            if (delta == 0) {
                slopes_[k] = slopes_[k + 1] = 0;
                continue;
            }
            double a = slopes_[k] / delta, b = slopes_[k + 1] / delta;
            if (a < 0)
                slopes_[k] = a = 0;
            if (b < 0)
                slopes_[k + 1] = b = 0;
            const double r = a * a + b * b;
            if (r > 9) {
                const double tau = 3 / std::sqrt(r);
                slopes_[k] = tau * a * delta;
                slopes_[k + 1] = tau * b * delta;
            }
        }
    }

    std::vector<double> xs_;
    std::vector<double> ys_;
    std::vector<double> slopes_;
};

} // namespace cola
