#pragma once

#include "cola/core/basket.hpp"
#include "cola/core/gauge.hpp"
#include "cola/core/utility.hpp"

#include <cmath>
#include <functional>
#include <span>

namespace cola {

/// A choice of one representative basket per utility level: C(X(u)) = u.
struct CrossSection
{
    UtilityFunction utility;
    std::function<Basket(double)> map;

    [[nodiscard]] Basket operator()(double u) const { return map(u); }
};

/// u -> X(G^-1(u)), a section for G o C with the same image as X.
inline CrossSection reparameterize_section(const CrossSection& x, const GaugeMap& g)
{
    return CrossSection{apply_gauge(g, x.utility), [x, g](double u) { return x.map(g.inverse(u)); }};
}

/// True iff |C(X(u)) - u| <= tol * max(1, u) on every grid point.
inline bool validate_cross_section(const CrossSection& x, std::span<const double> u_grid, double tol = default_tolerance)
{
    for (double u : u_grid)
        if (!(std::abs(x.utility(x(u)) - u) <= tol * std::max(1.0, u)))
            return false;
    return true;
}

} // namespace cola
