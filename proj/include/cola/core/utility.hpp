#pragma once

#include "cola/core/basket.hpp"
#include "cola/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cola {

/// Cardinal utility V+ -> R+. Either a parametric Cobb-Douglas product
/// prod q_i^{a_i} or a black box carrying its own value and gradient
/// evaluators (and optionally a Hessian).
class UtilityFunction
{
public:
    using ValueFn = std::function<double(std::span<const double>)>;
    using GradientFn = std::function<std::vector<double>(std::span<const double>)>;
    using HessianFn = std::function<Eigen::MatrixXd(std::span<const double>)>;

    enum class Kind { CobbDouglas, BlackBox };

    static UtilityFunction cobb_douglas(std::vector<double> exponents, std::string label = {})
    {
        if (exponents.empty())
            throw DomainError("Cobb-Douglas utility needs at least one exponent");
        for (double a : exponents)
            if (!(a > 0) || !std::isfinite(a))
                throw DomainError("Cobb-Douglas exponents must be strictly positive");
        UtilityFunction u;
        u.kind_ = Kind::CobbDouglas;
        u.n_ = exponents.size();
        u.exponents_ = std::move(exponents);
        u.label_ = std::move(label);
        return u;
    }

    static UtilityFunction black_box(std::size_t dimension, ValueFn value, GradientFn gradient,
                                     HessianFn hessian = {}, std::string label = {})
    {
        if (dimension == 0)
            throw DomainError("utility dimension must be at least one");
        if (!value || !gradient)
            throw DomainError("black-box utility requires value and gradient evaluators");
        UtilityFunction u;
        u.kind_ = Kind::BlackBox;
        u.n_ = dimension;
        u.value_ = std::move(value);
        u.gradient_ = std::move(gradient);
        u.hessian_ = std::move(hessian);
        u.label_ = std::move(label);
        return u;
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_cobb_douglas() const noexcept { return kind_ == Kind::CobbDouglas; }
    [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }
    /// Empty for black boxes.
    [[nodiscard]] const std::vector<double>& exponents() const noexcept { return exponents_; }
    [[nodiscard]] bool has_hessian() const noexcept { return kind_ == Kind::CobbDouglas || static_cast<bool>(hessian_); }

    [[nodiscard]] double operator()(const Basket& q) const
    {
        check_dimension(q);
        return value_at(q.values());
    }

    [[nodiscard]] std::vector<double> gradient(const Basket& q) const
    {
        check_dimension(q);
        return gradient_at(q.values());
    }

    [[nodiscard]] std::optional<Eigen::MatrixXd> hessian(const Basket& q) const
    {
        check_dimension(q);
        return hessian_at(q.values());
    }

    /// Unchecked evaluation on a raw point of the positive orthant.
    [[nodiscard]] double value_at(std::span<const double> q) const
    {
        if (kind_ == Kind::BlackBox)
            return value_(q);
        double u = 1;
        for (std::size_t i = 0; i < n_; ++i)
            u *= std::pow(q[i], exponents_[i]);
        return u;
    }

    [[nodiscard]] std::vector<double> gradient_at(std::span<const double> q) const
    {
        if (kind_ == Kind::BlackBox) {
            auto g = gradient_(q);
            if (g.size() != n_)
                throw DomainError("gradient evaluator returned wrong dimension");
            return g;
        }
        const double u = value_at(q);
        std::vector<double> g(n_);
        for (std::size_t i = 0; i < n_; ++i)
            g[i] = exponents_[i] * u / q[i];
        return g;
    }

    [[nodiscard]] std::optional<Eigen::MatrixXd> hessian_at(std::span<const double> q) const
    {
        if (kind_ == Kind::BlackBox) {
            if (!hessian_)
                return std::nullopt;
            return hessian_(q);
        }
        const double u = value_at(q);
        Eigen::MatrixXd h(n_, n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                const double aij = exponents_[i] * (exponents_[j] - (i == j ? 1.0 : 0.0));
                h(i, j) = aij * u / (q[i] * q[j]);
            }
        return h;
    }

private:
    UtilityFunction() = default;

    void check_dimension(const Basket& q) const
    {
        if (q.size() != n_)
            throw DomainError("utility of dimension " + std::to_string(n_) + " applied to basket of dimension "
                              + std::to_string(q.size()));
    }

    Kind kind_ = Kind::CobbDouglas;
    std::size_t n_ = 0;
    std::vector<double> exponents_;
    ValueFn value_;
    GradientFn gradient_;
    HessianFn hessian_;
    std::string label_;
};

/// C(q) for a validated basket; throws DomainError on dimension mismatch.
inline double eval_utility(const UtilityFunction& c, const Basket& q) { return c(q); }

} // namespace cola
