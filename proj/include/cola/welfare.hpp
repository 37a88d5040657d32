#pragma once

#include "cola/core/basket.hpp"
#include "cola/core/utility.hpp"
#include "cola/errors.hpp"
#include "cola/min_basket.hpp"
#include "cola/transport.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cola {

/// Agreement required between the two evaluations of every index value.
inline constexpr double cross_route_tolerance = 1e-7;

/// Preferences and prices sampled on a strictly increasing time grid.
class Scenario
{
public:
    Scenario(std::vector<double> times, std::vector<UtilityFunction> utilities, std::vector<PriceFunctional> prices)
        : times_(std::move(times)), utilities_(std::move(utilities)), prices_(std::move(prices))
    {
        if (times_.empty())
            throw DomainError("scenario needs at least one time");
        if (utilities_.size() != times_.size() || prices_.size() != times_.size())
            throw DomainError("scenario needs one utility and one price vector per time");
        const std::size_t n = utilities_.front().dimension();
        for (std::size_t i = 0; i < times_.size(); ++i) {
            if (!std::isfinite(times_[i]) || (i > 0 && !(times_[i] > times_[i - 1])))
                throw DomainError("scenario times must be finite and strictly increasing");
            if (utilities_[i].dimension() != n || prices_[i].dimension() != n)
                throw DomainError("every period must have the same number of goods");
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
    [[nodiscard]] std::size_t goods() const noexcept { return utilities_.front().dimension(); }
    [[nodiscard]] std::span<const double> times() const noexcept { return times_; }
    [[nodiscard]] const UtilityFunction& utility(std::size_t i) const { return utilities_.at(i); }
    [[nodiscard]] const PriceFunctional& prices(std::size_t i) const { return prices_.at(i); }

    [[nodiscard]] std::size_t index_of(double t) const
    {
        for (std::size_t i = 0; i < times_.size(); ++i)
            if (detail::same_time(times_[i], t))
                return i;
        throw DomainError("time " + std::to_string(t) + " is not on the scenario grid");
    }

    [[nodiscard]] const UtilityFunction& utility_at(double t) const { return utilities_[index_of(t)]; }
    [[nodiscard]] const PriceFunctional& prices_at(double t) const { return prices_[index_of(t)]; }

    /// Copy with the utility of period i replaced.
    [[nodiscard]] Scenario with_utility(std::size_t i, UtilityFunction c) const
    {
        auto utilities = utilities_;
        utilities.at(i) = std::move(c);
        return Scenario(times_, std::move(utilities), prices_);
    }

private:
    std::vector<double> times_;
    std::vector<UtilityFunction> utilities_;
    std::vector<PriceFunctional> prices_;
};

/// Equal cost is equal welfare: the minimal basket of cost c at time t.
inline Basket naive_welfare(const Scenario& s, double t_a, double t, double c, double tol = default_tolerance)
{
    (void)s.index_of(t_a);
    const std::size_t k = s.index_of(t);
    return basket_by_cost(s.utility(k), s.prices(k), c, tol);
}

namespace detail {

inline void check_span(const CostAdjustment& adj, double t_a, double t)
{
    if (!same_time(adj.t_from(), t_a) || !same_time(adj.t_to(), t))
        throw TimeMismatch("adjustment spans [" + std::to_string(adj.t_from()) + ", " + std::to_string(adj.t_to())
                           + "] but welfare map needs [" + std::to_string(t_a) + ", " + std::to_string(t) + "]");
}

/// Throws CrossRouteMismatch unless the two index routes agree.
inline void check_routes(double price_ratio, double adjustment_ratio, double t, double c)
{
    if (!(std::abs(price_ratio - adjustment_ratio) <= cross_route_tolerance * adjustment_ratio))
        throw CrossRouteMismatch("index routes disagree at t = " + std::to_string(t) + ", c = " + std::to_string(c)
                                 + ": price ratio " + std::to_string(price_ratio) + " vs adjustment ratio "
                                 + std::to_string(adjustment_ratio));
}

} // namespace detail

/// The welfare map induced by a cost adjustment: the minimal basket of
/// cost adj(c) at time t.
inline Basket welfare(const Scenario& s, const CostAdjustment& adj, double t_a, double t, double c,
                      double tol = default_tolerance)
{
    detail::check_span(adj, t_a, t);
    (void)s.index_of(t_a);
    const std::size_t k = s.index_of(t);
    return basket_by_cost(s.utility(k), s.prices(k), adj(c), tol);
}

struct IndexEvaluation
{
    double index;
    /// P_t(welfare basket) / P_{t_a}(base basket).
    double price_ratio;
    /// adj(c) / c.
    double adjustment_ratio;
    double adjusted_cost;
    Basket basket;
};

/// Evaluates the index by both routes and throws CrossRouteMismatch if they
/// disagree beyond cross_route_tolerance. The reported index is the price
/// ratio.
inline IndexEvaluation cola_index_detail(const Scenario& s, const CostAdjustment& adj, double t_a, double t, double c,
                                         double tol = default_tolerance)
{
    detail::check_span(adj, t_a, t);
    const std::size_t ka = s.index_of(t_a);
    const std::size_t kt = s.index_of(t);
    const Basket base = basket_by_cost(s.utility(ka), s.prices(ka), c, tol);
    const double adjusted = adj(c);
    Basket later = basket_by_cost(s.utility(kt), s.prices(kt), adjusted, tol);
    const double price_ratio = s.prices(kt)(later) / s.prices(ka)(base);
    const double adjustment_ratio = adjusted / c;
    detail::check_routes(price_ratio, adjustment_ratio, t, c);
    return {price_ratio, price_ratio, adjustment_ratio, adjusted, std::move(later)};
}

inline double cola_index(const Scenario& s, const CostAdjustment& adj, double t_a, double t, double c,
                         double tol = default_tolerance)
{
    return cola_index_detail(s, adj, t_a, t, c, tol).index;
}

/// Alternative reference convention: hold the base-time utility level of
/// the cost-c basket fixed and compare minimal costs. Depends on the
/// cardinal labels chosen for each period.
inline IndexEvaluation fixed_utility_index(const Scenario& s, double t_a, double t, double c,
                                           double tol = default_tolerance)
{
    const std::size_t ka = s.index_of(t_a);
    const std::size_t kt = s.index_of(t);
    const Basket base = basket_by_cost(s.utility(ka), s.prices(ka), c, tol);
    const double u = s.utility(ka)(base);
    MinimalBasketRecord rec = minimal_basket(s.utility(kt), s.prices(kt), u, tol);
    const double ratio = rec.cost / s.prices(ka)(base);
    return {ratio, ratio, rec.cost / c, rec.cost, std::move(rec.basket)};
}

/// Maps (t_from, t_to) to the cost adjustment between those times.
using AdjustmentFamily = std::function<CostAdjustment(double, double)>;

inline AdjustmentFamily naive_family()
{
    return [](double from, double to) { return CostAdjustment::identity(from, to); };
}

/// Adjustments realized as flows of one generator, tabulated on c_grid.
inline AdjustmentFamily flow_family(const CostGenerator& v, std::vector<double> c_grid = {},
                                    std::size_t steps_per_unit = default_steps_per_unit)
{
    std::sort(c_grid.begin(), c_grid.end());
    c_grid.erase(std::unique(c_grid.begin(), c_grid.end()), c_grid.end());
    return [v, c_grid, steps_per_unit](double from, double to) {
        return flow_adjustment(v, from, to, c_grid, steps_per_unit);
    };
}

struct IndexEntry
{
    double time;
    std::optional<IndexEvaluation> value;
    std::string error;
};

struct IndexSeries
{
    double base_time;
    double reference_cost;
    std::vector<IndexEntry> entries;
    CostAdjustment::Provenance provenance;

    [[nodiscard]] bool complete() const
    {
        return std::all_of(entries.begin(), entries.end(), [](const IndexEntry& e) { return e.value.has_value(); });
    }
};

/// One series per reference cost, one entry per scenario time. Failures are
/// recorded on the entry and do not abort the batch.
inline std::vector<IndexSeries> index_series(const Scenario& s, const AdjustmentFamily& family, double t_a,
                                             std::span<const double> costs, double tol = default_tolerance)
{
    (void)s.index_of(t_a);
    std::vector<IndexSeries> out;
    out.reserve(costs.size());
    for (double c : costs) {
        IndexSeries series{t_a, c, {}, CostAdjustment::Provenance::Naive};
        for (double t : s.times()) {
            IndexEntry entry{t, std::nullopt, {}};
            try {
                const CostAdjustment adj = family(t_a, t);
                series.provenance = adj.provenance();
                entry.value = cola_index_detail(s, adj, t_a, t, c, tol);
            } catch (const Error& e) {
                entry.error = e.what();
            }
            series.entries.push_back(std::move(entry));
        }
        out.push_back(std::move(series));
    }
    return out;
}

/// Flows of v, integrated separately for each reference cost so that one
/// escaping trajectory does not spoil the other series.
inline std::vector<IndexSeries> index_series(const Scenario& s, const CostGenerator& v, double t_a,
                                             std::span<const double> costs, double tol = default_tolerance,
                                             std::size_t steps_per_unit = default_steps_per_unit)
{
    std::vector<IndexSeries> out;
    out.reserve(costs.size());
    for (double c : costs) {
        const double one[] = {c};
        auto series = index_series(s, flow_family(v, {}, steps_per_unit), t_a, one, tol);
        out.push_back(std::move(series.front()));
    }
    return out;
}

} // namespace cola
