#include "microlaser/params.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "microlaser/error.hpp"

using namespace microlaser;

TEST(ParamsTest, derived_quantities)
{
    MicrolaserParams p;
    p.v0 = 780;
    p.r = 2e6;
    double const t = std::sqrt(M_PI) * 41e-6 / 780;
    EXPECT_DOUBLE_EQ(t, p.interaction_time());
    EXPECT_DOUBLE_EQ(2e6 / p.gamma_c, p.n_ex());
    EXPECT_NEAR(std::sqrt(p.n_ex()) * p.g * t, p.theta(), 1e-12);
    EXPECT_DOUBLE_EQ(2e6 * t, p.mean_atom_number());
    EXPECT_NEAR(220.0, p.with_mean_atom_number(220).mean_atom_number(), 1e-9);
}

TEST(ParamsTest, validate_rejects_nonpositive)
{
    MicrolaserParams p;
    EXPECT_NO_THROW(p.validate());
    p.w0 = 0;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p = {};
    p.dv_over_v0 = -0.1;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p = {};
    p.r = -1;
    EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(ParamsTest, dimensionless_round_trip)
{
    auto const p = MicrolaserParams::from_dimensionless(12.0, 2.5, 0.07, 0.3, 3.0, 2.0);
    EXPECT_NEAR(12.0, p.n_ex(), 1e-12);
    EXPECT_NEAR(2.5, p.theta(), 1e-12);
    EXPECT_NEAR(0.07, p.gamma_c_t_int(), 1e-14);
    EXPECT_DOUBLE_EQ(0.3, p.dv_over_v0);
    EXPECT_DOUBLE_EQ(3.0, p.gamma_c);
}

TEST(ParamsTest, rescaling_preserves_dimensionless)
{
    MicrolaserParams p;
    p = p.with_mean_atom_number(150);
    for (double s : {1e-3, 0.5, 7.0, 1e4})
    {
        auto const q = p.rescaled(s);
        EXPECT_NEAR(p.n_ex(), q.n_ex(), 1e-12 * p.n_ex());
        EXPECT_NEAR(p.theta(), q.theta(), 1e-12 * p.theta());
        EXPECT_NEAR(p.gamma_c_t_int(), q.gamma_c_t_int(), 1e-14);
        EXPECT_NEAR(p.mean_atom_number(), q.mean_atom_number(), 1e-9);
    }
}

TEST(VelocityDistributionTest, delta)
{
    auto const d = VelocityDistribution::delta(500);
    ASSERT_EQ(1u, d.node_count());
    EXPECT_EQ(500, d.speeds()[0]);
    EXPECT_EQ(1, d.weights()[0]);
    EXPECT_EQ(VelocityShape::delta, d.shape());
}

TEST(VelocityDistributionTest, gaussian_weights)
{
    auto const d = VelocityDistribution::gaussian(780, 0.3 * 780);
    EXPECT_EQ(33u, d.node_count());
    double sum = 0;
    double mean = 0;
    for (std::size_t i = 0; i < d.node_count(); ++i)
    {
        EXPECT_GE(d.weights()[i], 0);
        EXPECT_GE(d.speeds()[i], d.lower());
        EXPECT_LE(d.speeds()[i], d.upper());
        sum += d.weights()[i];
        mean += d.weights()[i] * d.speeds()[i];
    }
    EXPECT_NEAR(1.0, sum, 1e-12);
    // symmetric truncation keeps the mean at v0
    EXPECT_NEAR(780.0, mean, 1e-9);
    EXPECT_NEAR(780 - 3 * 0.3 * 780, d.lower(), 1e-9);
}

TEST(VelocityDistributionTest, gaussian_variance)
{
    // FWHM -> sigma; truncation at 3 FWHM (about 7 sigma) is negligible
    double const fwhm = 100;
    auto const d = VelocityDistribution::gaussian(1000, fwhm, 41);
    double var = 0;
    for (std::size_t i = 0; i < d.node_count(); ++i)
    {
        var += d.weights()[i] * (d.speeds()[i] - 1000) * (d.speeds()[i] - 1000);
    }
    double const sigma = fwhm / (2 * std::sqrt(2 * std::log(2.0)));
    EXPECT_NEAR(sigma * sigma, var, 1e-6 * sigma * sigma);
}

TEST(VelocityDistributionTest, rejects_nonpositive_speeds)
{
    EXPECT_THROW(VelocityDistribution::gaussian(100, 40), InvalidArgument);
    EXPECT_THROW(VelocityDistribution::gaussian_bounded(100, 10, -5, 200, 9), InvalidArgument);
    EXPECT_THROW(VelocityDistribution::gaussian_bounded(100, 10, 120, 200, 9), InvalidArgument);
    EXPECT_THROW(VelocityDistribution::delta(0), InvalidArgument);
}

TEST(VelocityDistributionTest, from_params)
{
    MicrolaserParams p;
    p.dv_over_v0 = 0;
    EXPECT_EQ(VelocityShape::delta, VelocityDistribution::from_params(p).shape());
    p.dv_over_v0 = 0.25;
    auto const d = VelocityDistribution::from_params(p);
    EXPECT_EQ(VelocityShape::gaussian, d.shape());
    EXPECT_NEAR(0.25 * p.v0, d.fwhm(), 1e-12);
}
