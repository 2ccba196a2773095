#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "swamp/channel.hpp"

using namespace swamp;

TEST(Channel, AwgnClosedForm)
{
    const OutputChannel ch = AwgnChannel{0.25};
    EXPECT_DOUBLE_EQ(gout(ch, 2.0, 0.5, 0.75), 1.5);
    EXPECT_DOUBLE_EQ(dgout(ch, 2.0, 0.5, 0.75), 1.0);
    // dg = -d g / d omega
    const double fd = oracle::derivative([&](double w) { return gout(ch, 2.0, w, 0.75); }, 0.5, 1e-3);
    EXPECT_NEAR(-fd, dgout(ch, 2.0, 0.5, 0.75), 1e-10);
}

TEST(Channel, AwgnZeroNoiseIsFloored)
{
    const OutputChannel ch = AwgnChannel{0.0};
    const double g = gout(ch, 1.0, 0.0, 1e-300);
    EXPECT_TRUE(std::isfinite(g));
    EXPECT_NEAR(g, 1.0 / kVarianceFloor, 1.0);
}

TEST(Channel, SignMatchesQuadrature)
{
    const OutputChannel ch = SignChannel{};
    for (double V : {0.01, 1.0, 7.0})
        for (double y : {-1.0, 1.0})
            for (int k = 0; k <= 40; ++k) {
                const double t = -10.0 + 0.5 * k; // omega / sqrt(V)
                const double w = t * std::sqrt(V);
                const double ref = oracle::sign_g(y, w, V);
                const double got = gout(ch, y, w, V);
                EXPECT_LE(std::abs(got - ref), 1e-8 * std::max(1.0, std::abs(ref))) << y << ' ' << w << ' ' << V;
            }
}

TEST(Channel, SignDerivativeMatchesFiniteDifferences)
{
    const OutputChannel ch = SignChannel{};
    for (double V : {0.01, 1.0, 7.0})
        for (double y : {-1.0, 1.0})
            for (int k = 0; k <= 40; ++k) {
                const double t = -10.0 + 0.5 * k;
                const double w = t * std::sqrt(V);
                const double h = 1e-3 * std::sqrt(V);
                const double fd = -oracle::derivative([&](double x) { return gout(ch, y, x, V); }, w, h);
                const double dg = dgout(ch, y, w, V);
                EXPECT_LE(std::abs(fd - dg), 1e-5 * std::max(1.0 / V, std::abs(dg))) << y << ' ' << w << ' ' << V;
                EXPECT_GE(dg, 0.0);
            }
}

TEST(Channel, SignFiniteFarIntoTails)
{
    const OutputChannel ch = SignChannel{};
    for (double t = -40.0; t <= 40.0; t += 0.25)
        for (double y : {-1.0, 1.0}) {
            const double g = gout(ch, y, t, 1.0);
            const double dg = dgout(ch, y, t, 1.0);
            EXPECT_TRUE(std::isfinite(g) && std::isfinite(dg)) << t;
            EXPECT_GE(dg, 0.0);
        }
    // Deep in the wrong tail the channel term grows like |t| and dg tends to 1/V.
    EXPECT_NEAR(gout(ch, 1.0, -40.0, 1.0), 40.0, 0.05);
    EXPECT_NEAR(dgout(ch, 1.0, -40.0, 1.0), 1.0, 1e-3);
}

TEST(Channel, HazardContinuousAcrossBranch)
{
    const double below = detail::gaussian_hazard(std::nextafter(-5.0, -6.0));
    const double above = detail::gaussian_hazard(-5.0);
    EXPECT_NEAR(below, above, 1e-12 * above);
}

TEST(Channel, RejectsBadArguments)
{
    const OutputChannel sign = SignChannel{};
    const OutputChannel awgn = AwgnChannel{1.0};
    EXPECT_THROW(gout(sign, 1.0, 0.0, 0.0), std::invalid_argument);
    EXPECT_THROW(dgout(awgn, 1.0, 0.0, -1.0), std::invalid_argument);
    EXPECT_THROW(gout(awgn, std::numeric_limits<double>::infinity(), 0.0, 1.0), std::invalid_argument);
}
