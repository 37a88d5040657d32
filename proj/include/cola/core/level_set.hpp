#pragma once

#include "cola/core/basket.hpp"
#include "cola/core/gauge.hpp"
#include "cola/core/utility.hpp"
#include "cola/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cola {

/// Finds s > 0 with C(s * direction) = u by geometric bracketing followed by
/// bisection to `rel_tol` in s. Relies on C increasing along rays.
inline Basket locate_on_ray(const UtilityFunction& c, std::span<const double> direction, double u,
                            double rel_tol = 1e-10)
{
    if (direction.size() != c.dimension())
        throw DomainError("ray direction has wrong dimension");
    if (!(u > 0) || !std::isfinite(u))
        throw DomainError("utility level must be finite and strictly positive");
    std::vector<double> point(direction.size());
    auto fail = [&] {
        return LevelSetNotAttained("ray never attains utility level " + std::to_string(u));
    };
    auto at = [&](double s) {
        for (std::size_t i = 0; i < point.size(); ++i)
            point[i] = s * direction[i];
        const double v = c.value_at(point);
        if (std::isnan(v))
            throw fail();
        return v;
    };

    double lo = 1, hi = 1;
    if (at(1) < u) {
        do {
            lo = hi;
            hi *= 2;
            if (hi > 1e300)
                throw fail();
        } while (at(hi) < u);
    } else {
        do {
            hi = lo;
            lo *= 0.5;
            if (lo < 1e-300)
                throw fail();
        } while (at(lo) > u);
    }
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (at(mid) < u ? lo : hi) = mid;
    }
    // Final secant step inside the bracket.
    const double flo = at(lo) - u, fhi = at(hi) - u;
    double s = 0.5 * (lo + hi);
    if (fhi != flo) {
        const double secant = lo - flo * (hi - lo) / (fhi - flo);
        if (secant >= lo && secant <= hi)
            s = secant;
    }
    at(s);
    return Basket(point);
}

struct ConvexityReport
{
    bool passed = true;
    std::size_t pairs_checked = 0;
    /// Smallest value of C(midpoint) - u over all checked pairs.
    double worst_excess = 0;
    std::optional<Basket> witness_first;
    std::optional<Basket> witness_second;
    std::optional<Basket> witness_midpoint;
    std::string message;
};

/// Spot-checks that the level set C^-1(u) is convex to the origin: for sampled
/// pairs q, q' on the level set, the midpoint must lie strictly above the
/// level (C(mid) > u) whenever q and q' are well separated, and never below
/// it by more than tol. Sampling is deterministic for a given seed.
inline ConvexityReport validate_convex_to_origin(const UtilityFunction& c, double u, std::size_t sample_pairs = 64,
                                                 double tol = default_tolerance, std::uint64_t seed = 0x5eed)
{
    ConvexityReport report;
    const std::size_t n = c.dimension();
    if (n == 1) {
        report.message = "single good: level sets are points";
        return report;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.02, 1.0);
    auto direction = [&] {
        std::vector<double> d(n);
        double norm = 0;
        for (double& x : d) {
            x = unit(rng);
            norm += x * x;
        }
        for (double& x : d)
            x /= std::sqrt(norm);
        return d;
    };

    const double scale = std::max(1.0, u);
    report.worst_excess = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sample_pairs; ++k) {
        const Basket q1 = locate_on_ray(c, direction(), u);
        const Basket q2 = locate_on_ray(c, direction(), u);
        std::vector<double> mid(n);
        double separation = 0, size = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mid[i] = 0.5 * (q1[i] + q2[i]);
            separation += (q1[i] - q2[i]) * (q1[i] - q2[i]);
            size += mid[i] * mid[i];
        }
        const Basket midpoint(mid);
        const double excess = c(midpoint) - u;
        ++report.pairs_checked;
        const bool separated = std::sqrt(separation) >= 1e-2 * std::sqrt(size);
        const bool ok = excess >= -tol * scale && (!separated || excess > tol * scale);
        if (excess < report.worst_excess) {
            report.worst_excess = excess;
            report.witness_first = q1;
            report.witness_second = q2;
            report.witness_midpoint = midpoint;
        }
        if (!ok && report.passed) {
            report.passed = false;
            report.message = "midpoint utility " + std::to_string(u + excess) + " not above level "
                             + std::to_string(u);
        }
    }
    if (report.passed)
        report.message = "all sampled midpoints lie above the level set";
    return report;
}

} // namespace cola
