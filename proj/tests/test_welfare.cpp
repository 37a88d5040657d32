#include "cola/welfare.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace cola;

namespace {

/// a(t) = (t, 1), p = (1, 1) on the given times.
Scenario baseline_scenario(std::vector<double> times)
{
    std::vector<UtilityFunction> utilities;
    std::vector<PriceFunctional> prices;
    for (double t : times) {
        utilities.push_back(UtilityFunction::cobb_douglas({t, 1}));
        prices.push_back(PriceFunctional{1, 1});
    }
    return Scenario(std::move(times), std::move(utilities), std::move(prices));
}

const std::vector<double> baseline_times{1, 1.25, 1.5, 1.75, 2};

} // namespace

TEST(Scenario, Validation)
{
    EXPECT_THROW(Scenario({}, {}, {}), DomainError);
    EXPECT_THROW(Scenario({1, 1}, {UtilityFunction::cobb_douglas({1, 1}), UtilityFunction::cobb_douglas({1, 1})},
                          {PriceFunctional{1, 1}, PriceFunctional{1, 1}}),
                 DomainError);
    EXPECT_THROW(Scenario({1, 2}, {UtilityFunction::cobb_douglas({1, 1}), UtilityFunction::cobb_douglas({1, 1, 1})},
                          {PriceFunctional{1, 1}, PriceFunctional{1, 1, 1}}),
                 DomainError);
    EXPECT_THROW(Scenario({1}, {UtilityFunction::cobb_douglas({1, 1})}, {}), DomainError);
    const auto s = baseline_scenario(baseline_times);
    EXPECT_EQ(s.size(), 5u);
    EXPECT_EQ(s.goods(), 2u);
    EXPECT_EQ(s.index_of(1.5), 2u);
    EXPECT_THROW((void)s.index_of(1.6), DomainError);
}

TEST(NaiveWelfare, ReferenceValues)
{
    const auto s = baseline_scenario(baseline_times);
    const auto q = naive_welfare(s, 1, 2, 3);
    EXPECT_NEAR(q[0], 2, 1e-14);
    EXPECT_NEAR(q[1], 1, 1e-14);
    const auto r = naive_welfare(s, 1, 1.5, 5);
    EXPECT_NEAR(r[0], 3, 1e-14);
    EXPECT_NEAR(r[1], 2, 1e-14);
    const auto same = naive_welfare(s, 1, 1, 4);
    const auto base = basket_by_cost(s.utility(0), s.prices(0), 4);
    EXPECT_EQ(same, base);
    EXPECT_THROW((void)naive_welfare(s, 1, 2, 0), UnattainableCost);
}

TEST(Welfare, Adjustments)
{
    const auto s = baseline_scenario(baseline_times);
    const auto id = welfare(s, CostAdjustment::identity(1, 2), 1, 2, 3);
    EXPECT_EQ(id, naive_welfare(s, 1, 2, 3));

    const auto doubled = welfare(s, CostAdjustment::scaling(1, 2, 2), 1, 2, 3);
    EXPECT_NEAR(doubled[0], 4, 1e-14);
    EXPECT_NEAR(doubled[1], 2, 1e-14);

    const double k = 0.3;
    const auto flow = flow_adjustment(CostGenerator::relative(k), 1, 1.5, std::vector<double>{3});
    const auto q = welfare(s, flow, 1, 1.5, 3);
    const double adjusted = 3 * std::exp(k * 0.5);
    EXPECT_NEAR(q[0], 1.5 * adjusted / 2.5, 1e-8 * adjusted);
    EXPECT_NEAR(q[1], adjusted / 2.5, 1e-8 * adjusted);

    EXPECT_THROW((void)welfare(s, CostAdjustment::identity(1, 1.5), 1, 2, 3), TimeMismatch);
}

TEST(ColaIndex, Examples)
{
    const auto s = baseline_scenario(baseline_times);
    for (double t : baseline_times)
        for (double c : {1.0, 2.0, 3.0, 6.0}) {
            EXPECT_NEAR(cola_index(s, CostAdjustment::identity(1, t), 1, t, c), 1, 1e-12);
            EXPECT_NEAR(cola_index(s, CostAdjustment::scaling(1, t, 2), 1, t, c), 2, 1e-12);
        }
    const double k = 0.2;
    const auto flow = flow_adjustment(CostGenerator::relative(k), 1, 2, std::vector<double>{1, 2});
    EXPECT_NEAR(cola_index(s, flow, 1, 2, 2), std::exp(k), 1e-7);
    const auto detail = cola_index_detail(s, flow, 1, 2, 2);
    EXPECT_NEAR(detail.price_ratio, detail.adjustment_ratio, 1e-7);
    EXPECT_NEAR(detail.adjusted_cost, 2 * std::exp(k), 1e-8);
}

TEST(ColaIndex, BaseNormalizationIsExact)
{
    const auto s = baseline_scenario(baseline_times);
    const auto v = CostGenerator::make([](double t, double c) { return std::sin(3 * t) * c; }, "wavy");
    for (double c : {0.3, 1.0, 17.0}) {
        EXPECT_EQ(cola_index(s, CostAdjustment::identity(1, 1), 1, 1, c), 1.0);
        EXPECT_EQ(cola_index(s, flow_adjustment(v, 1, 1, std::vector<double>{c}), 1, 1, c), 1.0);
    }
}

TEST(ColaIndex, CrossRouteCheck)
{
    EXPECT_NO_THROW(detail::check_routes(2.0, 2.0 * (1 + 5e-8), 1, 3));
    EXPECT_THROW(detail::check_routes(2.0, 2.0 * (1 + 5e-7), 1, 3), CrossRouteMismatch);
    EXPECT_THROW(detail::check_routes(NAN, 2.0, 1, 3), CrossRouteMismatch);
}

TEST(FixedUtilityIndex, DependsOnCardinalLabels)
{
    // The alternative convention changes when one period's utility is rescaled.
    const auto s = baseline_scenario({1, 2});
    const double before = fixed_utility_index(s, 1, 2, 3).index;
    const auto relabelled = s.with_utility(1, apply_gauge(GaugeMap::affine(4), s.utility(1)));
    const double after = fixed_utility_index(relabelled, 1, 2, 3).index;
    EXPECT_GT(std::abs(before - after), 1e-3);
    EXPECT_NEAR(fixed_utility_index(s, 1, 1, 3).index, 1.0, 1e-14);
}

TEST(IndexSeries, NaiveOnConstantPrices)
{
    const auto s = baseline_scenario(baseline_times);
    const std::vector<double> costs{1, 2, 3, 6};
    const auto all = index_series(s, naive_family(), 1, costs);
    ASSERT_EQ(all.size(), 4u);
    for (const auto& series : all) {
        EXPECT_TRUE(series.complete());
        EXPECT_EQ(series.provenance, CostAdjustment::Provenance::Naive);
        ASSERT_EQ(series.entries.size(), baseline_times.size());
        for (const auto& e : series.entries)
            EXPECT_NEAR(e.value->index, 1, 1e-9);
    }
}

TEST(IndexSeries, SingleTime)
{
    const auto s = baseline_scenario({1.3});
    const auto all = index_series(s, naive_family(), 1.3, std::vector<double>{5});
    ASSERT_EQ(all.size(), 1u);
    ASSERT_EQ(all[0].entries.size(), 1u);
    EXPECT_EQ(all[0].entries[0].value->index, 1.0);
}

TEST(IndexSeries, RelativeGenerator)
{
    const auto s = baseline_scenario({1, 1.5, 2});
    const std::vector<double> costs{0.5, 4, 30};
    for (const auto& series : index_series(s, CostGenerator::relative(0.1), 1, costs)) {
        EXPECT_EQ(series.provenance, CostAdjustment::Provenance::Flow);
        EXPECT_NEAR(series.entries[0].value->index, 1, 1e-6);
        EXPECT_NEAR(series.entries[1].value->index, std::exp(0.05), 1e-6);
        EXPECT_NEAR(series.entries[2].value->index, std::exp(0.1), 1e-6);
    }
}

TEST(IndexSeries, ErrorsAreRecordedPerEntry)
{
    const auto s = baseline_scenario({1, 2, 3, 4});
    // Unit downward drift: a cost of 1.5 survives to t = 2 but not to t = 3.
    const auto all = index_series(s, CostGenerator::constant(-1), 1, std::vector<double>{1.5, 10});
    ASSERT_EQ(all.size(), 2u);
    EXPECT_FALSE(all[0].complete());
    EXPECT_TRUE(all[0].entries[1].value.has_value());
    EXPECT_FALSE(all[0].entries[2].value.has_value());
    EXPECT_FALSE(all[0].entries[2].error.empty());
    EXPECT_TRUE(all[1].complete());
    EXPECT_NEAR(all[1].entries[3].value->index, 0.7, 1e-9);
}

namespace {

/// Random Cobb-Douglas scenario with n goods and m times.
Scenario random_scenario(std::mt19937_64& rng, std::size_t n, std::size_t m)
{
    std::uniform_real_distribution<double> expo(0.3, 3), price(0.2, 5), gap(0.2, 1);
    std::vector<double> times;
    std::vector<UtilityFunction> utilities;
    std::vector<PriceFunctional> prices;
    double t = 0;
    for (std::size_t k = 0; k < m; ++k) {
        times.push_back(t);
        t += gap(rng);
        std::vector<double> a(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = expo(rng);
            p[i] = price(rng);
        }
        utilities.push_back(UtilityFunction::cobb_douglas(a));
        prices.push_back(PriceFunctional(p));
    }
    return Scenario(times, utilities, prices);
}

} // namespace

TEST(ColaIndex, PropertyCorollaryIdentity)
{
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> cost(0.1, 50), rate(-0.5, 0.5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto s = random_scenario(rng, 1 + trial % 4, 3);
        const double c = cost(rng);
        const double t = s.times()[2];
        const double k = rate(rng);
        const auto flow = flow_adjustment(CostGenerator::relative(k), s.times()[0], t, std::vector<double>{c});
        for (const auto& adj : {CostAdjustment::identity(s.times()[0], t),
                                CostAdjustment::scaling(s.times()[0], t, std::exp(k)), flow}) {
            const auto e = cola_index_detail(s, adj, s.times()[0], t, c);
            EXPECT_NEAR(e.price_ratio, adj(c) / c, 1e-7 * adj(c) / c);
        }
    }
}

TEST(ColaIndex, PropertyGaugeIndependence)
{
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> scale(0.1, 10);
    const auto s = random_scenario(rng, 3, 4);
    std::vector<UtilityFunction> gauged;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double k = scale(rng);
        const auto g = i % 2 ? GaugeMap::affine(k)
                             : GaugeMap::tabulate([k](double u) { return k * std::sqrt(u) + u; }, 1e-30, 1e30, 1024,
                                                  [k](double u) { return 0.5 * k / std::sqrt(u) + 1; });
        gauged.push_back(apply_gauge(g, s.utility(i)));
    }
    std::vector<PriceFunctional> prices;
    for (std::size_t i = 0; i < s.size(); ++i)
        prices.push_back(s.prices(i));
    const Scenario relabelled(std::vector<double>(s.times().begin(), s.times().end()), gauged, prices);
    const std::vector<double> costs{0.5, 3, 20};
    const auto family = flow_family(CostGenerator::relative(0.2), costs);
    const auto before = index_series(s, family, s.times()[0], costs);
    const auto after = index_series(relabelled, family, s.times()[0], costs);
    for (std::size_t i = 0; i < before.size(); ++i)
        for (std::size_t j = 0; j < before[i].entries.size(); ++j) {
            ASSERT_TRUE(after[i].entries[j].value.has_value()) << after[i].entries[j].error;
            EXPECT_NEAR(after[i].entries[j].value->index, before[i].entries[j].value->index, 1e-7);
        }
}

TEST(ColaIndex, PropertyChaining)
{
    std::mt19937_64 rng(53);
    const auto v = CostGenerator::make([](double t, double c) { return (0.1 + 0.2 * std::cos(t)) * c; }, "cycle");
    for (int trial = 0; trial < 10; ++trial) {
        const auto s = random_scenario(rng, 2, 3);
        const double ta = s.times()[0], tb = s.times()[1], tc = s.times()[2];
        const double c = 2.5;
        const std::vector<double> grid{c};
        const auto ab = flow_adjustment(v, ta, tb, grid);
        const auto bc = flow_adjustment(v, tb, tc, grid);
        const double first = cola_index(s, ab, ta, tb, c);
        const double second = cola_index(s, bc, tb, tc, ab(c));
        const double whole = cola_index(s, compose_adjustments(bc, ab), ta, tc, c);
        EXPECT_NEAR(whole, first * second, 1e-6);
    }
}
