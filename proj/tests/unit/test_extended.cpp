#include "microlaser/extended.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "microlaser/error.hpp"

using namespace microlaser;

namespace {

MicrolaserParams measured_condition(double atoms, double v0, double dv)
{
    MicrolaserParams p;
    p.v0 = v0;
    p.dv_over_v0 = dv;
    return p.with_mean_atom_number(atoms);
}

}  // namespace

TEST(VarianceOdeTest, no_pump_relaxes_like_decaying_field)
{
    MicrolaserParams p;
    p.r = 0;
    auto const d = VelocityDistribution::from_params(p);
    MomentState const s{30.0, 55.0};
    EXPECT_DOUBLE_EQ(-2 * p.gamma_c * 55.0 + p.gamma_c * 30.0, variance_ode_rhs(s, p, d, 1.7));
}

TEST(VarianceOdeTest, flat_gain_is_poissonian)
{
    MicrolaserParams p;
    p.g = 1e-12;
    p.r = 1e6;
    auto const d = VelocityDistribution::delta(p.v0);
    MomentState const s{12.0, 12.0};
    // with P ~ 0 the field only decays and a Poisson state stays Poisson:
    // d var/dt = d<n>/dt = -gamma_c <n>
    EXPECT_NEAR(-p.gamma_c * 12.0, variance_ode_rhs(s, p, d, 0.0), 1e-6 * p.gamma_c);
}

TEST(VarianceOdeTest, rejects_negative_state)
{
    MicrolaserParams p;
    p.r = 1e6;
    EXPECT_THROW(variance_ode_rhs({-1, 1}, p, VelocityDistribution::delta(p.v0), 1), InvalidArgument);
}

TEST(VarianceOdeTest, steady_state_reproduces_linear_correction)
{
    // To first order in eta the root of the variance equation shifts Q by
    // eta * bracket * gamma_c t_int. At full eta the shift is larger because
    // the noise term grows with the variance it produces.
    for (double atoms : {150.0, 220.0, 272.0})
    {
        auto const p = measured_condition(atoms, 780, 0.3);
        auto const d = VelocityDistribution::from_params(p);
        auto const t = alpha_terms(p, d);
        double const q0 = extended_steady_state_q(p, d, 0.0);
        // eta = 0 recovers the unextended value up to the closure's curvature term
        EXPECT_NEAR(t.q_qmt, q0, 0.02) << atoms;

        double const small = 1e-3;
        double const first_order = small * t.bracket * p.gamma_c_t_int();
        double const shift = extended_steady_state_q(p, d, small) - q0;
        EXPECT_NEAR(first_order, shift, 0.01 * first_order) << atoms;

        double const full = extended_steady_state_q(p, d, 1.84) - q0;
        EXPECT_GT(full, 1.84 * t.bracket * p.gamma_c_t_int()) << atoms;
    }
}

TEST(AlphaTest, quadratic_values)
{
    EXPECT_EQ(0.0, alpha_quadratic(0.0, 1.84));
    EXPECT_NEAR(0.951, alpha_quadratic(-0.719, 1.84), 5e-4);
    EXPECT_DOUBLE_EQ(1.84, alpha_quadratic(-1.0, 1.84));
    EXPECT_LT(alpha_quadratic(-0.3, 1.84), alpha_quadratic(-0.6, 1.84));
}

TEST(AlphaTest, corrected_q_values)
{
    EXPECT_DOUBLE_EQ(-0.719, corrected_q(-0.719, 0.951, 0.0));
    EXPECT_NEAR(-0.624, corrected_q(-0.719, 0.951, 0.0995), 1e-3);
    EXPECT_NEAR(-0.669, corrected_q(-0.781, alpha_quadratic(-0.781, 1.84), 0.0995), 1e-3);
    EXPECT_GE(corrected_q(-0.5, 0.3, 0.1), -0.5);
    EXPECT_THROW(corrected_q(-0.5, 0.3, -0.1), InvalidArgument);
    EXPECT_THROW(corrected_q(-0.5, -0.3, 0.1), InvalidArgument);
}

TEST(AlphaTest, first_order_bracket_is_q_squared)
{
    auto const p = measured_condition(220, 762, 0.33);
    auto const t = alpha_terms(p, VelocityDistribution::from_params(p));
    double const n_ex = p.n_ex();
    double const first = n_ex * n_ex * t.p_slope * t.p_slope * t.variance_qmt * t.variance_qmt
                         / (t.n0 * t.n0);
    EXPECT_NEAR(t.q_qmt * t.q_qmt, first, 1e-9);
    EXPECT_GE(t.bracket, first);
}

TEST(AlphaTest, exact_approaches_quadratic_at_large_pump)
{
    int checked = 0;
    for (double theta = 1.0; theta < 6.0; theta += 0.25)
    {
        auto const p = MicrolaserParams::from_dimensionless(1000, theta, 0.05, 0.0);
        auto const d = VelocityDistribution::delta(p.v0);
        auto const t = alpha_terms(p, d);
        if (t.q_qmt > -0.3 || t.q_qmt < -0.95)
        {
            continue;
        }
        double const exact = alpha_exact(p, d, 1.84);
        double const quad = alpha_quadratic(t.q_qmt, 1.84);
        EXPECT_LT(std::abs(exact - quad), 0.1 * quad) << "theta=" << theta;
        ++checked;
    }
    EXPECT_GT(checked, 3);
}

TEST(AlphaTest, vanishes_where_slope_vanishes)
{
    // scan Theta through the gain maximum where P'(n0) = 0 and Q_QMT = 0
    // only the curvature part of the bracket survives there
    double best_q = 1;
    double best_alpha = 1;
    double best_curvature_part = 0;
    for (double theta = 0.8; theta < 2.5; theta += 0.002)
    {
        auto const p = MicrolaserParams::from_dimensionless(200, theta, 0.05, 0.0);
        auto const d = VelocityDistribution::delta(p.v0);
        auto const t = alpha_terms(p, d);
        if (std::abs(t.q_qmt) < std::abs(best_q))
        {
            best_q = t.q_qmt;
            best_alpha = 1.84 * t.bracket;
            double const v = t.variance_qmt;
            best_curvature_part = 1.84 * 200.0 * 200.0 * v
                                  * (0.5 * t.p_curvature * t.p_curvature * v * v) / (t.n0 * t.n0);
        }
    }
    EXPECT_LT(std::abs(best_q), 0.01);
    EXPECT_NEAR(best_curvature_part, best_alpha, 0.05 * best_alpha);
    EXPECT_LT(best_alpha, 0.02 * alpha_quadratic(-0.5, 1.84));
}

TEST(FitEtaTest, synthetic_recovery)
{
    std::vector<double> thetas;
    for (double th = 0.8; th <= 4.0; th += 0.05)
    {
        thetas.push_back(th);
    }
    auto const brackets = bracket_curve(15, thetas, 0.0);
    std::vector<AlphaPoint> points;
    for (std::size_t i = 0; i < brackets.size(); i += 8)
    {
        points.push_back({brackets[i].q_qmt, 1.7 * brackets[i].bracket, 0.01});
    }
    auto const model = fit_eta(points, brackets, 0.0, 15);
    EXPECT_NEAR(1.7, model.eta, 2e-3);
    EXPECT_LT(model.eta_err, 0.01);
    ASSERT_EQ(8u, model.poly_coeffs.size());
    EXPECT_EQ(0.0, model.alpha(0.0));
    EXPECT_GT(model.eta, 0);
}

TEST(FitEtaTest, degenerate_inputs_rejected)
{
    std::vector<BracketPoint> brackets;
    for (int i = 0; i < 20; ++i)
    {
        double const q = -0.04 * i;
        brackets.push_back({q, q * q});
    }
    std::vector<AlphaPoint> same(6, AlphaPoint{-0.5, 0.4, 0.01});
    EXPECT_THROW(fit_eta(same, brackets), FitError);
    std::vector<AlphaPoint> few(3, AlphaPoint{-0.5, 0.4, 0.01});
    EXPECT_THROW(fit_eta(few, brackets), InvalidArgument);
}
