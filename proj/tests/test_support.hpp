#pragma once

// Shared fixtures and independent oracles for the test suites. Nothing here
// calls into the minimization or transport code it is used to check.

#include "cola/core/basket.hpp"
#include "cola/core/utility.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace cola::testing {

/// q1 * q2 presented as a black box without a Hessian.
inline UtilityFunction product_black_box()
{
    return UtilityFunction::black_box(
        2, [](std::span<const double> q) { return q[0] * q[1]; },
        [](std::span<const double> q) { return std::vector<double>{q[1], q[0]}; }, {}, "q1*q2");
}

/// q1^2 + q2^2: increasing but concave to the origin.
inline UtilityFunction circle_utility()
{
    return UtilityFunction::black_box(
        2, [](std::span<const double> q) { return q[0] * q[0] + q[1] * q[1]; },
        [](std::span<const double> q) { return std::vector<double>{2 * q[0], 2 * q[1]}; }, {}, "circle");
}

/// q1 + q2: perfect substitutes, flat level sets.
inline UtilityFunction sum_utility()
{
    return UtilityFunction::black_box(
        2, [](std::span<const double> q) { return q[0] + q[1]; },
        [](std::span<const double>) { return std::vector<double>{1.0, 1.0}; }, {}, "sum");
}

/// CES utility (sum w_i q_i^rho)^(1/rho) with rho < 1, convex to the origin.
inline UtilityFunction ces_utility(std::vector<double> weights, double rho, bool with_hessian)
{
    auto value = [weights, rho](std::span<const double> q) {
        double s = 0;
        for (std::size_t i = 0; i < weights.size(); ++i)
            s += weights[i] * std::pow(q[i], rho);
        return std::pow(s, 1 / rho);
    };
    auto gradient = [weights, rho, value](std::span<const double> q) {
        const double u = value(q);
        double s = 0;
        for (std::size_t i = 0; i < weights.size(); ++i)
            s += weights[i] * std::pow(q[i], rho);
        std::vector<double> g(weights.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = u / s * weights[i] * std::pow(q[i], rho - 1);
        return g;
    };
    UtilityFunction::HessianFn hessian;
    if (with_hessian)
        hessian = [weights, rho, value, gradient](std::span<const double> q) {
            const double u = value(q);
            const auto g = gradient(q);
            const auto n = static_cast<Eigen::Index>(weights.size());
            Eigen::MatrixXd h(n, n);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j) {
                    const auto iu = static_cast<std::size_t>(i), ju = static_cast<std::size_t>(j);
                    h(i, j) = (1 - rho) * g[iu] * g[ju] / u;
                    if (i == j)
                        h(i, j) += (rho - 1) * g[iu] / q[iu];
                }
            return h;
        };
    return UtilityFunction::black_box(weights.size(), value, gradient, hessian, "ces");
}

/// Central finite-difference gradient.
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> q, double rel_step = 1e-6)
{
    std::vector<double> g(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double h = rel_step * std::max(1.0, std::abs(q[i]));
        const double saved = q[i];
        q[i] = saved + h;
        const double up = f(q);
        q[i] = saved - h;
        const double down = f(q);
        q[i] = saved;
        g[i] = (up - down) / (2 * h);
    }
    return g;
}

/// Brute-force cheapest point on {C(q1, q2) = u}: scans q1 over a log grid,
/// solves C(q1, q2) = u for q2 by bisection, then refines the best cell with
/// golden-section search. Returns (q1, q2, cost).
struct BruteForceResult
{
    double q1, q2, cost;
};

inline double solve_second_coordinate(const UtilityFunction& c, double q1, double u)
{
    double lo = 1e-12, hi = 1.0;
    auto at = [&](double q2) {
        const std::vector<double> q{q1, q2};
        return c.value_at(q);
    };
    while (at(hi) < u) {
        hi *= 2;
        if (hi > 1e300)
            return INFINITY; // level unreachable at this q1
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (at(mid) < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline BruteForceResult brute_force_min_basket(const UtilityFunction& c, std::span<const double> prices, double u,
                                               double q1_lo = 1e-3, double q1_hi = 1e3, int points = 20000)
{
    auto price_at = [&](double q1) { return prices[0] * q1 + prices[1] * solve_second_coordinate(c, q1, u); };
    const double ratio = std::log(q1_hi / q1_lo);
    int best = 0;
    double best_cost = INFINITY;
    for (int i = 0; i <= points; ++i) {
        const double q1 = q1_lo * std::exp(ratio * i / points);
        const double cost = price_at(q1);
        if (cost < best_cost) {
            best_cost = cost;
            best = i;
        }
    }
    double a = q1_lo * std::exp(ratio * std::max(best - 1, 0) / points);
    double b = q1_lo * std::exp(ratio * std::min(best + 1, points) / points);
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int i = 0; i < 200; ++i) {
        const double x1 = b - g * (b - a), x2 = a + g * (b - a);
        (price_at(x1) < price_at(x2) ? b : a) = (price_at(x1) < price_at(x2) ? x2 : x1);
    }
    const double q1 = 0.5 * (a + b);
    const double q2 = solve_second_coordinate(c, q1, u);
    return {q1, q2, prices[0] * q1 + prices[1] * q2};
}

/// Composite Simpson rule.
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals = 2000)
{
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i)
        s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

inline std::vector<Basket> integer_grid(int lo, int hi)
{
    std::vector<Basket> out;
    for (int i = lo; i <= hi; ++i)
        for (int j = lo; j <= hi; ++j)
            out.push_back(Basket{static_cast<double>(i), static_cast<double>(j)});
    return out;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace cola::testing
