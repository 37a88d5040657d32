#include "cola/monotone_cubic.hpp"

#include <gtest/gtest.h>

#include <random>

using cola::MonotoneCubic;

TEST(MonotoneCubic, MatchesReferencePchip)
{
    // Reference values from scipy.interpolate.PchipInterpolator on the same knots.
    const MonotoneCubic f({0.5, 1, 2, 3.5, 5}, {0.2, 1.0, 1.1, 3.0, 7.0});
    EXPECT_NEAR(f(0.7), 0.622782608695652, 1e-14);
    EXPECT_NEAR(f(1.5), 1.054163879598662, 1e-14);
    EXPECT_NEAR(f(2.9), 1.985472333767927, 1e-14);
    EXPECT_NEAR(f(4.2), 4.555724293785311, 1e-14);
    EXPECT_NEAR(f.derivative(0.7), 1.985217391304348, 1e-13);
    EXPECT_NEAR(f.derivative(1.5), 0.053979933110367945, 1e-13);
    EXPECT_NEAR(f.derivative(2.9), 1.5617752281616684, 1e-13);
    EXPECT_NEAR(f.derivative(4.2), 2.6731525423728817, 1e-13);
}

TEST(MonotoneCubic, InterpolatesKnotsAndRejectsOutOfRange)
{
    const MonotoneCubic f({1, 2, 4}, {3, 5, 6});
    EXPECT_DOUBLE_EQ(f(1), 3);
    EXPECT_DOUBLE_EQ(f(2), 5);
    EXPECT_DOUBLE_EQ(f(4), 6);
    EXPECT_THROW((void)f(0.5), cola::OutOfRange);
    EXPECT_THROW((void)f(4.5), cola::OutOfRange);
    EXPECT_THROW((void)f.inverse(7), cola::OutOfRange);
}

TEST(MonotoneCubic, RejectsBadKnots)
{
    EXPECT_THROW(MonotoneCubic({1}, {1}), cola::DomainError);
    EXPECT_THROW(MonotoneCubic({1, 1}, {1, 2}), cola::DomainError);
    EXPECT_THROW(MonotoneCubic({1, 2}, {1, 2, 3}), cola::DomainError);
}

TEST(MonotoneCubic, ExactSlopesReproduceQuadratics)
{
    // Cubic Hermite with exact slopes is exact for polynomials of degree <= 3,
    // and u^2 on a positive grid never trips the monotonicity limiter.
    std::vector<double> xs{1, 2, 3, 5, 8}, ys, ds;
    for (double x : xs) {
        ys.push_back(x * x);
        ds.push_back(2 * x);
    }
    const MonotoneCubic f(xs, ys, ds);
    for (double x : {1.3, 2.5, 4.1, 7.9})
        EXPECT_NEAR(f(x), x * x, 1e-12 * x * x);
}

TEST(MonotoneCubic, PropertyMonotoneAndInvertible)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> step(0.01, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> xs{step(rng)}, ys{step(rng)};
        for (int i = 0; i < 12; ++i) {
            xs.push_back(xs.back() + step(rng));
            ys.push_back(ys.back() + step(rng) * step(rng));
        }
        const MonotoneCubic f(xs, ys);
        double previous = f(xs.front());
        for (int k = 1; k <= 400; ++k) {
            const double x = xs.front() + (xs.back() - xs.front()) * k / 400.0;
            const double y = f(x);
            ASSERT_GE(y, previous - 1e-12);
            previous = y;
            ASSERT_NEAR(f.inverse(y), x, 1e-9 * std::max(1.0, x));
        }
    }
}
