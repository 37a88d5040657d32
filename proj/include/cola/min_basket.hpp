#pragma once

#include "cola/core/basket.hpp"
#include "cola/core/cross_section.hpp"
#include "cola/core/gauge.hpp"
#include "cola/core/level_set.hpp"
#include "cola/core/utility.hpp"
#include "cola/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace cola {

/// Cheapest basket on one indifference level, with the Lagrange multiplier
/// of the first-order condition p = -multiplier * grad C(basket).
struct MinimalBasketRecord
{
    double utility;
    double cost;
    Basket basket;
    double multiplier;
};

/// Analytic expenditure minimizer for prod q_i^{a_i}: expenditure shares are
/// a_i / sum(a), so q_i = a_i c / (A p_i) with c fixed by the constraint.
inline MinimalBasketRecord minimal_basket_closed_form(std::span<const double> exponents, const PriceFunctional& p,
                                                      double u)
{
    if (exponents.size() != p.dimension())
        throw DomainError("exponent and price dimensions differ");
    if (!(u > 0) || !std::isfinite(u))
        throw DomainError("utility level must be finite and strictly positive");
    double total = 0;
    for (double a : exponents) {
        if (!(a > 0) || !std::isfinite(a))
            throw DomainError("Cobb-Douglas exponents must be strictly positive");
        total += a;
    }
    double log_cost = std::log(u);
    for (std::size_t i = 0; i < exponents.size(); ++i)
        log_cost -= exponents[i] * std::log(exponents[i] / (total * p[i]));
    const double cost = std::exp(log_cost / total);

    std::vector<double> q(exponents.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        q[i] = exponents[i] * cost / (total * p[i]);
    Basket basket(std::move(q));
    return {u, p(basket), std::move(basket), -cost / (u * total)};
}

inline MinimalBasketRecord minimal_basket_closed_form(const UtilityFunction& c, const PriceFunctional& p, double u)
{
    if (!c.is_cobb_douglas())
        throw DomainError("closed-form minimal basket requires a Cobb-Douglas utility");
    return minimal_basket_closed_form(c.exponents(), p, u);
}

/// Solves { p + lambda grad C = 0, C(q) = u } by damped Newton iteration in
/// log-quantity coordinates, starting from the equal-expenditure ray. Uses
/// the utility's Hessian when available and a damped BFGS model of the
/// Lagrangian Hessian otherwise. Converged when the componentwise relative
/// stationarity residual and the relative constraint residual are <= tol.
inline MinimalBasketRecord minimal_basket_numeric(const UtilityFunction& c, const PriceFunctional& p, double u,
                                                  double tol = default_tolerance, int max_iterations = 100)
{
    const std::size_t n = c.dimension();
    if (p.dimension() != n)
        throw DomainError("utility and price dimensions differ");
    if (!(u > 0) || !std::isfinite(u))
        throw DomainError("utility level must be finite and strictly positive");

    const auto ni = static_cast<Eigen::Index>(n);
    std::vector<double> start_dir(n);
    for (std::size_t i = 0; i < n; ++i)
        start_dir[i] = 1.0 / (static_cast<double>(n) * p[i]);
    const Basket start = locate_on_ray(c, start_dir, u);

    Eigen::VectorXd x(ni);
    for (std::size_t i = 0; i < n; ++i)
        x(static_cast<Eigen::Index>(i)) = std::log(start[i]);

    struct State
    {
        std::vector<double> q;
        double value = 0;
        Eigen::VectorXd grad_h; // gradient of log C(e^x)
        Eigen::VectorXd obj;    // p_i q_i
    };
    auto evaluate = [&](const Eigen::VectorXd& at) {
        State s;
        s.q.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            s.q[i] = std::exp(at(static_cast<Eigen::Index>(i)));
        s.value = c.value_at(s.q);
        if (!(s.value > 0) || !std::isfinite(s.value))
            throw NonConvergence("utility left the positive range during minimization");
        const auto g = c.gradient_at(s.q);
        s.grad_h.resize(ni);
        s.obj.resize(ni);
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            if (!std::isfinite(g[i]))
                throw NonConvergence("non-finite utility gradient");
            s.grad_h(k) = s.q[i] * g[i] / s.value;
            s.obj(k) = p[i] * s.q[i];
        }
        return s;
    };
    auto residual = [&](const State& s, double mu) {
        Eigen::VectorXd r(ni + 1);
        r.head(ni) = (s.obj + mu * s.grad_h).cwiseQuotient(s.obj);
        r(ni) = std::log(s.value / u);
        return r;
    };
    auto exact_hessian = [&](const State& s, double mu) {
        auto h = c.hessian_at(s.q);
        Eigen::MatrixXd w = s.obj.asDiagonal();
        const Eigen::Map<const Eigen::VectorXd> q(s.q.data(), ni);
        Eigen::MatrixXd hh = (q.asDiagonal() * *h * q.asDiagonal()) / s.value;
        hh.diagonal() += s.grad_h;
        hh -= s.grad_h * s.grad_h.transpose();
        return Eigen::MatrixXd(w + mu * hh);
    };

    State state = evaluate(x);
    double mu = -state.grad_h.dot(state.obj) / std::max(state.grad_h.squaredNorm(), 1e-300);
    const bool use_hessian = c.has_hessian();
    Eigen::MatrixXd model = state.obj.asDiagonal();

    Eigen::VectorXd r = residual(state, mu);
    double merit = r.norm();
    bool converged = r.lpNorm<Eigen::Infinity>() <= tol;
    for (int iter = 0; iter < max_iterations; ++iter) {
        if (converged)
            break;
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(ni + 1, ni + 1);
        kkt.topLeftCorner(ni, ni) = use_hessian ? exact_hessian(state, mu) : model;
        kkt.topRightCorner(ni, 1) = state.grad_h;
        kkt.bottomLeftCorner(1, ni) = state.grad_h.transpose();
        Eigen::VectorXd rhs(ni + 1);
        rhs.head(ni) = -(state.obj + mu * state.grad_h);
        rhs(ni) = -std::log(state.value / u);
        const Eigen::VectorXd step = kkt.fullPivLu().solve(rhs);
        if (!step.allFinite())
            throw NonConvergence("singular Lagrange system during minimization");

        double alpha = 1;
        bool accepted = false;
        State trial;
        double trial_mu = mu, trial_merit = merit;
        for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
            try {
                trial = evaluate(x + alpha * step.head(ni));
            } catch (const NonConvergence&) {
                continue;
            }
            trial_mu = mu + alpha * step(ni);
            trial_merit = residual(trial, trial_mu).norm();
            if (trial_merit < merit) {
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw NonConvergence("line search failed to reduce the Lagrange residual at u = " + std::to_string(u));

        if (!use_hessian) {
            // Damped BFGS update of the Lagrangian Hessian model.
            const Eigen::VectorXd s = alpha * step.head(ni);
            const Eigen::VectorXd y = (trial.obj + trial_mu * trial.grad_h) - (state.obj + trial_mu * state.grad_h);
            const Eigen::VectorXd bs = model * s;
            const double sbs = s.dot(bs);
            const double sy = s.dot(y);
            if (sbs > 0) {
                const double theta = sy >= 0.2 * sbs ? 1.0 : 0.8 * sbs / (sbs - sy);
                const Eigen::VectorXd yd = theta * y + (1 - theta) * bs;
                model += yd * yd.transpose() / s.dot(yd) - bs * bs.transpose() / sbs;
            }
        }

        x += alpha * step.head(ni);
        state = std::move(trial);
        mu = trial_mu;
        merit = trial_merit;
        r = residual(state, mu);
        if (r.lpNorm<Eigen::Infinity>() <= tol) {
            converged = true;
            // One more full step usually lands at machine precision.
            if (use_hessian) {
                kkt.topLeftCorner(ni, ni) = exact_hessian(state, mu);
                kkt.topRightCorner(ni, 1) = state.grad_h;
                kkt.bottomLeftCorner(1, ni) = state.grad_h.transpose();
                rhs.head(ni) = -(state.obj + mu * state.grad_h);
                rhs(ni) = -std::log(state.value / u);
                const Eigen::VectorXd polish = kkt.fullPivLu().solve(rhs);
                if (polish.allFinite()) {
                    try {
                        State p_state = evaluate(x + polish.head(ni));
                        const double p_mu = mu + polish(ni);
                        if (residual(p_state, p_mu).norm() < merit) {
                            x += polish.head(ni);
                            state = std::move(p_state);
                            mu = p_mu;
                        }
                    } catch (const NonConvergence&) {
                    }
                }
            }
        }
    }
    if (!converged)
        throw NonConvergence("minimal basket search did not converge within " + std::to_string(max_iterations)
                             + " iterations at u = " + std::to_string(u));

    Basket basket(state.q);
    const double cost = p(basket);
    return {u, cost, std::move(basket), mu / state.value};
}

/// Closed form for Cobb-Douglas utilities, Newton otherwise.
inline MinimalBasketRecord minimal_basket(const UtilityFunction& c, const PriceFunctional& p, double u,
                                          double tol = default_tolerance)
{
    if (c.is_cobb_douglas())
        return minimal_basket_closed_form(c, p, u);
    return minimal_basket_numeric(c, p, u, tol);
}

/// Minimum expenditure needed to reach utility u at prices p.
inline double cost_of_living(const UtilityFunction& c, const PriceFunctional& p, double u,
                             double tol = default_tolerance)
{
    return minimal_basket(c, p, u, tol).cost;
}

/// The strictly increasing map u -> cost_of_living(C, P, u) and its inverse.
class CostOfLivingCurve
{
public:
    CostOfLivingCurve(UtilityFunction c, PriceFunctional p, double tol = default_tolerance)
        : c_(std::move(c)), p_(std::move(p)), tol_(tol)
    {
        if (c_.dimension() != p_.dimension())
            throw DomainError("utility and price dimensions differ");
    }

    [[nodiscard]] const UtilityFunction& utility_function() const noexcept { return c_; }
    [[nodiscard]] const PriceFunctional& prices() const noexcept { return p_; }

    [[nodiscard]] MinimalBasketRecord record(double u) const { return minimal_basket(c_, p_, u, tol_); }
    [[nodiscard]] double cost(double u) const { return record(u).cost; }
    [[nodiscard]] double operator()(double u) const { return cost(u); }

    /// Utility level whose minimal cost is c. Brackets log u geometrically,
    /// then runs a safeguarded Newton iteration on log c(log u) using the
    /// envelope slope dc/du = -multiplier.
    [[nodiscard]] double utility(double c) const
    {
        if (!(c > 0) || !std::isfinite(c))
            throw UnattainableCost("cost must be finite and strictly positive");
        const double target = std::log(c);
        auto log_cost = [&](double log_u) {
            try {
                return std::log(cost(std::exp(log_u)));
            } catch (const LevelSetNotAttained&) {
                throw UnattainableCost("cost " + std::to_string(c) + " is outside the attainable range");
            }
        };

        double lo = 0, hi = 0;
        double f_lo = log_cost(0), f_hi = f_lo;
        const double step = std::log(2.0);
        for (int k = 0; f_hi < target; ++k) {
            if (k > 2000)
                throw UnattainableCost("cost " + std::to_string(c) + " exceeds the attainable range");
            lo = hi;
            f_lo = f_hi;
            hi += step;
            f_hi = log_cost(hi);
        }
        for (int k = 0; f_lo > target; ++k) {
            if (k > 2000)
                throw UnattainableCost("cost " + std::to_string(c) + " is below the attainable range");
            hi = lo;
            f_hi = f_lo;
            lo -= step;
            f_lo = log_cost(lo);
        }
        if (f_lo == target)
            return std::exp(lo);
        if (f_hi == target)
            return std::exp(hi);

        double x = lo + (target - f_lo) * (hi - lo) / (f_hi - f_lo);
        for (int it = 0; it < 200; ++it) {
            const double u = std::exp(x);
            const MinimalBasketRecord rec = record(u);
            const double f = std::log(rec.cost) - target;
            if (f == 0)
                return u;
            (f < 0 ? lo : hi) = x;
            const double slope = -rec.multiplier * u / rec.cost;
            double next = slope > 0 ? x - f / slope : 0.5 * (lo + hi);
            if (!(next > lo && next < hi))
                next = 0.5 * (lo + hi);
            if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-15 * std::max(1.0, std::abs(x)))
                return std::exp(next);
            x = next;
        }
        throw NonConvergence("cost-of-living inversion did not converge for cost " + std::to_string(c));
    }

private:
    UtilityFunction c_;
    PriceFunctional p_;
    double tol_;
};

/// Minimal basket expressed in cost coordinates: the cheapest basket whose
/// price is c. Cobb-Douglas utilities use the exact expenditure shares.
inline Basket basket_by_cost(const UtilityFunction& c, const PriceFunctional& p, double cost,
                             double tol = default_tolerance)
{
    if (c.dimension() != p.dimension())
        throw DomainError("utility and price dimensions differ");
    if (!(cost > 0) || !std::isfinite(cost))
        throw UnattainableCost("cost must be finite and strictly positive");
    if (c.is_cobb_douglas()) {
        const auto& a = c.exponents();
        const double total = std::accumulate(a.begin(), a.end(), 0.0);
        std::vector<double> q(a.size());
        for (std::size_t i = 0; i < q.size(); ++i)
            q[i] = a[i] * cost / (total * p[i]);
        return Basket(std::move(q));
    }
    const CostOfLivingCurve curve(c, p, tol);
    return curve.record(curve.utility(cost)).basket;
}

/// (P o X o C)(q): relabels q's indifference level by its minimal cost.
inline double m_map_eval(const UtilityFunction& c, const PriceFunctional& p, const Basket& q,
                         double tol = default_tolerance)
{
    return cost_of_living(c, p, c(q), tol);
}

/// The minimal-price-basket section u -> X^P_C(u).
inline CrossSection minimal_price_section(const UtilityFunction& c, const PriceFunctional& p,
                                          double tol = default_tolerance)
{
    return CrossSection{c, [c, p, tol](double u) { return minimal_basket(c, p, u, tol).basket; }};
}

} // namespace cola
