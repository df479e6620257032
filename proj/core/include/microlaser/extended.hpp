#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "microlaser/params.hpp"
#include "microlaser/qmt.hpp"

namespace microlaser {

struct MomentState
{
    double n_mean = 0;
    double variance = 0;
};

/*!
 * Moments of the emission probability under a narrow-distribution closure:
 * P is expanded to second order about n_mean and the photon number is
 * treated as Gaussian with the given variance.
 */
struct ClosureMoments
{
    double mean_p = 0;       //!< <P(n)>
    double p_deviation = 0;  //!< <P(n) (n - <n>)>
    double p_variance = 0;   //!< <P(n)^2> - <P(n)>^2
};

ClosureMoments closure_moments(const GainFunction& gain, const MomentState& state);

/*!
 * Time derivative of the photon-number variance including cavity decay and
 * the finite-width emission term 2 r^2 dP^2 eta t_int:
 *
 *   r<P> + 2r<P (n-<n>)> - 2 gamma_c var + gamma_c <n> + 2 r^2 dP^2 eta t_int
 */
double variance_ode_rhs(const MomentState& state,
                        const MicrolaserParams& params,
                        const VelocityDistribution& dist,
                        double eta);

//! Root of variance_ode_rhs in the variance at n_mean = n0 of the selected
//! branch; returns the resulting Mandel Q.
double extended_steady_state_q(const MicrolaserParams& params,
                               const VelocityDistribution& dist,
                               double eta);

//! Ingredients of the correction slope, all evaluated with the unextended
//! theory at the selected operating branch.
struct AlphaTerms
{
    double n0 = 0;
    double q_qmt = 0;         //!< linearised Q at n0
    double variance_qmt = 0;  //!< (1 + q_qmt) n0
    double p_slope = 0;
    double p_curvature = 0;
    double p_variance = 0;    //!< P'^2 var + P''^2 var^2 / 2
    double bracket = 0;       //!< N_ex^2 var dP^2 / n0^2 (alpha / eta)
};

AlphaTerms alpha_terms(const MicrolaserParams& params, const VelocityDistribution& dist);

//! alpha = eta * N_ex^2 [dn]^2_QMT dP(n0)^2 / n0^2.
double alpha_exact(const MicrolaserParams& params,
                   const VelocityDistribution& dist,
                   double eta);

//! Large-N_ex limit alpha = eta * q_qmt^2.
double alpha_quadratic(double q_qmt, double eta);

//! Q0 = q_qmt + alpha * gamma_c t_int.
double corrected_q(double q_qmt, double alpha, double gamma_c_t_int);

struct AlphaPoint
{
    double q_qmt = 0;
    double alpha = 0;
    double alpha_err = 0;  //!< 0 means unweighted
};

struct BracketPoint
{
    double q_qmt = 0;
    double bracket = 0;
};

/*!
 * alpha(x) / eta represented as sum_{i=1..8} c_i x^i on the fit domain,
 * scaled by the fitted eta.
 */
struct AlphaModel
{
    static constexpr int degree = 8;
    static constexpr double domain_lo = -0.85;
    static constexpr double domain_hi = 0.0;

    double eta = 0;
    double eta_err = 0;
    std::vector<double> poly_coeffs;  //!< c_1 .. c_8
    double dv_over_v0 = 0;
    double n_ex = 0;
    std::size_t points_used = 0;
    double reduced_chi2 = 0;

    double bracket(double q_qmt) const;
    double alpha(double q_qmt) const { return eta * bracket(q_qmt); }
};

/*!
 * Fit the degree-8 polynomial to the theory bracket values, then the scale
 * eta that best maps it onto the simulated alpha points (weighted by
 * 1/alpha_err^2 when errors are given). eta_err is residual-scaled.
 *
 * Points outside [domain_lo, domain_hi] (with a 0.05 margin for the
 * simulated points) are ignored.
 */
AlphaModel fit_eta(std::span<const AlphaPoint> qts_points,
                   std::span<const BracketPoint> bracket_points,
                   double dv_over_v0 = 0,
                   double n_ex = 0);

//! Theory bracket values for a fixed N_ex over a list of Theta values.
std::vector<BracketPoint> bracket_curve(double n_ex,
                                        std::span<const double> thetas,
                                        double dv_over_v0,
                                        double gamma_c_t_int = 0.05);

}  // namespace microlaser
