#pragma once

#include "cola/errors.hpp"

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace cola {

/// A bundle of n goods with strictly positive quantities.
class Basket
{
public:
    explicit Basket(std::vector<double> quantities) : q_(std::move(quantities))
    {
        if (q_.empty())
            throw DomainError("basket must hold at least one good");
        for (std::size_t i = 0; i < q_.size(); ++i)
            if (!(q_[i] > 0) || !std::isfinite(q_[i]))
                throw DomainError("basket coordinate " + std::to_string(i)
                                  + " must be finite and strictly positive");
    }
    Basket(std::initializer_list<double> quantities) : Basket(std::vector<double>(quantities)) {}

    [[nodiscard]] std::size_t size() const noexcept { return q_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return q_[i]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return q_; }
    [[nodiscard]] const std::vector<double>& vector() const noexcept { return q_; }

    friend bool operator==(const Basket&, const Basket&) = default;

private:
    std::vector<double> q_;
};

/// Linear, strictly positive price functional q -> sum p_i q_i.
class PriceFunctional
{
public:
    explicit PriceFunctional(std::vector<double> prices) : p_(std::move(prices))
    {
        if (p_.empty())
            throw DomainError("price vector must not be empty");
        for (double p : p_)
            if (!(p > 0) || !std::isfinite(p))
                throw DomainError("prices must be strictly positive");
    }
    PriceFunctional(std::initializer_list<double> prices) : PriceFunctional(std::vector<double>(prices)) {}

    [[nodiscard]] std::size_t dimension() const noexcept { return p_.size(); }
    [[nodiscard]] std::span<const double> prices() const noexcept { return p_; }
    [[nodiscard]] double operator[](std::size_t i) const { return p_[i]; }

    /// Evaluates on any vector of matching length, so linearity can be checked
    /// on combinations that leave the positive orthant.
    [[nodiscard]] double evaluate(std::span<const double> q) const
    {
        if (q.size() != p_.size())
            throw DomainError("price functional of dimension " + std::to_string(p_.size())
                              + " applied to vector of dimension " + std::to_string(q.size()));
        return std::inner_product(p_.begin(), p_.end(), q.begin(), 0.0);
    }

    [[nodiscard]] double operator()(const Basket& q) const { return evaluate(q.values()); }

    friend bool operator==(const PriceFunctional&, const PriceFunctional&) = default;

private:
    std::vector<double> p_;
};

} // namespace cola
