#include "microlaser/extended.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "microlaser/error.hpp"
#include "microlaser/numerics.hpp"

namespace microlaser {

ClosureMoments closure_moments(const GainFunction& gain, const MomentState& state)
{
    double const p = gain.emission_probability(state.n_mean);
    double const dp = gain.emission_slope(state.n_mean);
    double const d2p = gain.emission_curvature(state.n_mean);
    double const var = state.variance;

    ClosureMoments m;
    m.mean_p = p + 0.5 * d2p * var;
    m.p_deviation = dp * var;
    m.p_variance = dp * dp * var + 0.5 * d2p * d2p * var * var;
    return m;
}

double variance_ode_rhs(const MomentState& state,
                        const MicrolaserParams& params,
                        const VelocityDistribution& dist,
                        double eta)
{
    if (!(state.n_mean >= 0) || !(state.variance >= 0))
    {
        throw InvalidArgument("variance_ode_rhs: n_mean and variance must be >= 0");
    }
    GainFunction const gf(params, dist);
    auto const m = closure_moments(gf, state);
    double const r = params.r;
    double const gc = params.gamma_c;
    return r * m.mean_p + 2 * r * m.p_deviation - 2 * gc * state.variance
           + gc * state.n_mean
           + 2 * r * r * m.p_variance * eta * params.interaction_time();
}

double extended_steady_state_q(const MicrolaserParams& params,
                               const VelocityDistribution& dist,
                               double eta)
{
    auto const op = select_operating_branch(params, dist);
    double const n0 = op.branch.n0;
    if (!(n0 > 0))
    {
        throw NoStableBranch("extended steady state needs a lasing branch (n0 > 0)");
    }
    GainFunction const gf(params, dist);
    double const r = params.r;
    double const gc = params.gamma_c;
    double const t = params.interaction_time();
    double const p = gf.emission_probability(n0);
    double const dp = gf.emission_slope(n0);
    double const d2p = gf.emission_curvature(n0);

    // rhs = a + b var + c var^2 under the closure
    double const a = r * p + gc * n0;
    double const b = 0.5 * r * d2p + 2 * r * dp - 2 * gc + 2 * r * r * eta * t * dp * dp;
    double const c = r * r * eta * t * d2p * d2p;
    double const disc = b * b - 4 * a * c;
    if (!(b < 0) || disc < 0)
    {
        throw NoStableBranch("variance equation has no finite steady state");
    }
    double const var = 2 * a / (-b + std::sqrt(disc));
    return var / n0 - 1.0;
}

AlphaTerms alpha_terms(const MicrolaserParams& params, const VelocityDistribution& dist)
{
    OperatingPointSolver solver(params, dist);
    auto const op = solver.solve(params.r);
    auto const& gf = solver.unit_gain();

    AlphaTerms t;
    t.n0 = op.branch.n0;
    t.q_qmt = op.q_linearized;
    if (!(t.n0 > 0))
    {
        return t;
    }
    t.variance_qmt = (1 + t.q_qmt) * t.n0;
    t.p_slope = gf.emission_slope(t.n0);
    t.p_curvature = gf.emission_curvature(t.n0);
    double const var = t.variance_qmt;
    t.p_variance = t.p_slope * t.p_slope * var
                   + 0.5 * t.p_curvature * t.p_curvature * var * var;
    double const n_ex = params.n_ex();
    t.bracket = n_ex * n_ex * var * t.p_variance / (t.n0 * t.n0);
    return t;
}

double alpha_exact(const MicrolaserParams& params,
                   const VelocityDistribution& dist,
                   double eta)
{
    if (!(eta >= 0))
    {
        throw InvalidArgument("eta must be >= 0");
    }
    return eta * alpha_terms(params, dist).bracket;
}

double alpha_quadratic(double q_qmt, double eta)
{
    return eta * q_qmt * q_qmt;
}

double corrected_q(double q_qmt, double alpha, double gamma_c_t_int)
{
    if (!(gamma_c_t_int >= 0))
    {
        throw InvalidArgument("gamma_c_t_int must be >= 0");
    }
    if (!(alpha >= 0))
    {
        throw InvalidArgument("alpha must be >= 0");
    }
    return q_qmt + alpha * gamma_c_t_int;
}

double AlphaModel::bracket(double q_qmt) const
{
    return evaluate_powers(poly_coeffs, 1, q_qmt);
}

AlphaModel fit_eta(std::span<const AlphaPoint> qts_points,
                   std::span<const BracketPoint> bracket_points,
                   double dv_over_v0,
                   double n_ex)
{
    constexpr double margin = 0.05;
    if (qts_points.size() < 5)
    {
        throw InvalidArgument("fit_eta needs at least 5 simulated alpha points");
    }
    auto const [qmin, qmax] = std::minmax_element(
        qts_points.begin(), qts_points.end(),
        [](const AlphaPoint& a, const AlphaPoint& b) { return a.q_qmt < b.q_qmt; });
    if (qmax->q_qmt - qmin->q_qmt <= 1e-12)
    {
        throw FitError("fit_eta: all q_qmt values are identical");
    }

    std::vector<double> bx;
    std::vector<double> by;
    for (auto const& b : bracket_points)
    {
        if (b.q_qmt >= AlphaModel::domain_lo && b.q_qmt <= AlphaModel::domain_hi)
        {
            bx.push_back(b.q_qmt);
            by.push_back(b.bracket);
        }
    }
    if (bx.size() < static_cast<std::size_t>(AlphaModel::degree) + 1)
    {
        throw FitError("fit_eta: need at least 9 bracket points inside the fit domain, got "
                       + std::to_string(bx.size()));
    }
    std::vector<double> const ones(bx.size(), 1.0);
    auto const poly = fit_powers(bx, by, ones, 1, AlphaModel::degree);

    AlphaModel model;
    model.poly_coeffs = poly.coefficients;
    model.dv_over_v0 = dv_over_v0;
    model.n_ex = n_ex;

    double sxy = 0;
    double sxx = 0;
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> ws;
    for (auto const& p : qts_points)
    {
        if (p.q_qmt < AlphaModel::domain_lo - margin
            || p.q_qmt > AlphaModel::domain_hi + margin)
        {
            continue;
        }
        double const x = model.bracket(p.q_qmt);
        double const w = p.alpha_err > 0 ? 1.0 / (p.alpha_err * p.alpha_err) : 1.0;
        xs.push_back(x);
        ys.push_back(p.alpha);
        ws.push_back(w);
        sxy += w * x * p.alpha;
        sxx += w * x * x;
    }
    if (xs.size() < 5)
    {
        throw InvalidArgument("fit_eta: fewer than 5 simulated points inside the fit domain");
    }
    if (!(sxx > 0))
    {
        throw FitError("fit_eta: bracket vanishes at every simulated point");
    }
    model.eta = sxy / sxx;
    double chi2 = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        double const res = ys[i] - model.eta * xs[i];
        chi2 += ws[i] * res * res;
    }
    model.points_used = xs.size();
    model.reduced_chi2 = chi2 / static_cast<double>(xs.size() - 1);
    model.eta_err = std::sqrt(model.reduced_chi2 / sxx);
    return model;
}

std::vector<BracketPoint> bracket_curve(double n_ex,
                                        std::span<const double> thetas,
                                        double dv_over_v0,
                                        double gamma_c_t_int)
{
    std::vector<BracketPoint> out;
    out.reserve(thetas.size());
    for (double theta : thetas)
    {
        auto const params = MicrolaserParams::from_dimensionless(
            n_ex, theta, gamma_c_t_int, dv_over_v0);
        auto const dist = VelocityDistribution::from_params(params);
        auto const t = alpha_terms(params, dist);
        out.push_back({t.q_qmt, t.bracket});
    }
    return out;
}

}  // namespace microlaser
