#include "microlaser/calibration.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "microlaser/error.hpp"

using namespace microlaser;

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        v[i] = lo + (hi - lo) * double(i) / double(n - 1);
    }
    return v;
}

// raw counts F = N / a, C = n / b from the predicted curve
std::vector<RawCountPoint> synthetic_counts(double a, double b, double noise, unsigned seed)
{
    MicrolaserParams const p;
    auto const dist = VelocityDistribution::from_params(p);
    auto const grid = linspace(40, 1250, 48);
    auto const curve = predict_io_curve(p, dist, grid);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<RawCountPoint> out;
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        double const c = curve.photons[i] / b;
        out.push_back({grid[i] / a, noise > 0 ? c * (1 + noise * normal(gen)) : c});
    }
    return out;
}

}  // namespace

TEST(PredictIoCurveTest, vanishes_at_low_atom_number)
{
    MicrolaserParams const p;
    auto const dist = VelocityDistribution::from_params(p);
    std::vector<double> const grid{0.01, 0.1, 1, 3};
    auto const curve = predict_io_curve(p, dist, grid);
    EXPECT_LT(curve.photons[0], 1e-2);
    for (std::size_t i = 1; i < grid.size(); ++i)
    {
        EXPECT_GE(curve.photons[i], curve.photons[i - 1]);
    }
    EXPECT_TRUE(curve.jumps.empty());
}

TEST(PredictIoCurveTest, jumps_near_310_and_900)
{
    MicrolaserParams const p;
    auto const dist = VelocityDistribution::from_params(p);
    auto const curve = predict_io_curve(p, dist, linspace(10, 1300, 260));
    ASSERT_EQ(2u, curve.jumps.size());
    EXPECT_NEAR(310, curve.jumps[0], 0.15 * 310);
    EXPECT_NEAR(900, curve.jumps[1], 0.15 * 900);
    for (double n : curve.photons)
    {
        EXPECT_GE(n, 0.0);
    }
    // the lobe index steps up at each jump
    EXPECT_EQ(0, curve.branch.front());
    EXPECT_EQ(2, curve.branch.back());
}

TEST(PredictIoCurveTest, jumps_stable_under_refinement)
{
    MicrolaserParams const p;
    auto const dist = VelocityDistribution::from_params(p);
    auto const coarse = predict_io_curve(p, dist, linspace(10, 1300, 130));
    auto const fine = predict_io_curve(p, dist, linspace(10, 1300, 521));
    ASSERT_EQ(coarse.jumps.size(), fine.jumps.size());
    for (std::size_t i = 0; i < fine.jumps.size(); ++i)
    {
        EXPECT_NEAR(fine.jumps[i], coarse.jumps[i], 1e-4 * fine.jumps[i]);
    }
}

TEST(PredictIoCurveTest, rejects_bad_grid)
{
    MicrolaserParams const p;
    auto const dist = VelocityDistribution::from_params(p);
    std::vector<double> const descending{20, 10};
    std::vector<double> const negative{-1, 10};
    EXPECT_THROW(predict_io_curve(p, dist, descending), InvalidArgument);
    EXPECT_THROW(predict_io_curve(p, dist, negative), InvalidArgument);
}

class FitCalibrationTest : public ::testing::Test
{
  protected:
    MicrolaserParams params;
    VelocityDistribution dist = VelocityDistribution::from_params(params);
};

TEST_F(FitCalibrationTest, exact_recovery)
{
    auto const raw = synthetic_counts(2.0, 5.0, 0, 0);
    auto const fit = fit_calibration(raw, params, dist);
    EXPECT_NEAR(2.0, fit.scale_atoms, 1e-6 * 2.0);
    EXPECT_NEAR(5.0, fit.scale_photons, 1e-6 * 5.0);
    EXPECT_LT(fit.residual, 1e-3);
    EXPECT_EQ(raw.size(), fit.points);
    EXPECT_EQ(2u, fit.jumps_in_range);
}

TEST_F(FitCalibrationTest, noisy_recovery)
{
    auto const raw = synthetic_counts(2.0, 5.0, 0.03, 17);
    auto const fit = fit_calibration(raw, params, dist);
    EXPECT_NEAR(2.0, fit.scale_atoms, 0.05 * 2.0);
    EXPECT_NEAR(5.0, fit.scale_photons, 0.05 * 5.0);
    EXPECT_GT(fit.covariance[0], 0.0);
    EXPECT_GT(fit.covariance[3], 0.0);
}

TEST_F(FitCalibrationTest, scale_equivariance)
{
    auto raw = synthetic_counts(2.0, 5.0, 0.03, 23);
    auto const base = fit_calibration(raw, params, dist);
    double const k = 3.7;
    for (auto& r : raw)
    {
        r.fluorescence *= k;
    }
    auto const scaled = fit_calibration(raw, params, dist);
    EXPECT_NEAR(base.scale_atoms / k, scaled.scale_atoms, 1e-9 * base.scale_atoms);
    EXPECT_NEAR(base.scale_photons, scaled.scale_photons, 1e-9 * base.scale_photons);
}

TEST_F(FitCalibrationTest, degenerate_inputs)
{
    std::vector<RawCountPoint> same(30, RawCountPoint{100, 50});
    EXPECT_THROW(fit_calibration(same, params, dist), NonIdentifiable);

    std::vector<RawCountPoint> few(10, RawCountPoint{100, 50});
    EXPECT_THROW(fit_calibration(few, params, dist), InsufficientData);
}
