#include "microlaser/params.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "microlaser/error.hpp"
#include "microlaser/numerics.hpp"

namespace microlaser {
namespace {

constexpr double fwhm_to_sigma = 0.42466090014400953;  // 1 / (2 sqrt(2 ln 2))

void require_positive(double value, const char* name)
{
    if (!(value > 0) || !std::isfinite(value))
    {
        throw InvalidArgument(std::string(name) + " must be positive and finite");
    }
}

}  // namespace

void MicrolaserParams::validate() const
{
    if (!(g >= 0) || !std::isfinite(g))
    {
        throw InvalidArgument("g must be non-negative and finite");
    }
    require_positive(gamma_c, "gamma_c");
    require_positive(gamma_a, "gamma_a");
    require_positive(w0, "w0");
    require_positive(v0, "v0");
    if (!(dv_over_v0 >= 0) || !std::isfinite(dv_over_v0))
    {
        throw InvalidArgument("dv_over_v0 must be non-negative");
    }
    if (!(r >= 0) || !std::isfinite(r))
    {
        throw InvalidArgument("injection rate r must be non-negative");
    }
}

double MicrolaserParams::interaction_time(double speed) const
{
    return std::sqrt(std::numbers::pi) * w0 / speed;
}

double MicrolaserParams::theta() const
{
    return std::sqrt(n_ex()) * g * interaction_time();
}

MicrolaserParams MicrolaserParams::with_mean_atom_number(double atoms) const
{
    MicrolaserParams out = *this;
    out.r = atoms / interaction_time();
    return out;
}

MicrolaserParams MicrolaserParams::with_speed(double speed) const
{
    MicrolaserParams out = *this;
    out.v0 = speed;
    return out;
}

MicrolaserParams MicrolaserParams::rescaled(double s) const
{
    MicrolaserParams out = *this;
    out.g *= s;
    out.gamma_c *= s;
    out.gamma_a *= s;
    out.r *= s;
    out.v0 *= s;
    return out;
}

MicrolaserParams MicrolaserParams::from_dimensionless(double n_ex,
                                                      double theta,
                                                      double gamma_c_t_int,
                                                      double dv_over_v0,
                                                      double gamma_c,
                                                      double w0)
{
    require_positive(gamma_c_t_int, "gamma_c_t_int");
    require_positive(gamma_c, "gamma_c");
    if (n_ex < 0 || theta < 0)
    {
        throw InvalidArgument("n_ex and theta must be non-negative");
    }
    MicrolaserParams p;
    p.gamma_c = gamma_c;
    p.gamma_a = gamma_c;
    p.w0 = w0;
    p.dv_over_v0 = dv_over_v0;
    double const t_int = gamma_c_t_int / gamma_c;
    p.v0 = std::sqrt(std::numbers::pi) * w0 / t_int;
    p.r = n_ex * gamma_c;
    p.g = n_ex > 0 ? theta / (std::sqrt(n_ex) * t_int) : 0.0;
    return p;
}

VelocityDistribution VelocityDistribution::delta(double v0)
{
    require_positive(v0, "v0");
    VelocityDistribution d;
    d.shape_ = VelocityShape::delta;
    d.v0_ = v0;
    d.lower_ = v0;
    d.upper_ = v0;
    d.speeds_ = {v0};
    d.weights_ = {1.0};
    return d;
}

VelocityDistribution VelocityDistribution::gaussian(double v0,
                                                    double fwhm,
                                                    std::size_t nodes,
                                                    double truncation_fwhm)
{
    require_positive(fwhm, "fwhm");
    require_positive(truncation_fwhm, "truncation_fwhm");
    return gaussian_bounded(v0,
                            fwhm,
                            v0 - truncation_fwhm * fwhm,
                            v0 + truncation_fwhm * fwhm,
                            nodes);
}

VelocityDistribution VelocityDistribution::gaussian_bounded(double v0,
                                                            double fwhm,
                                                            double lower,
                                                            double upper,
                                                            std::size_t nodes)
{
    require_positive(v0, "v0");
    require_positive(fwhm, "fwhm");
    if (!(lower > 0))
    {
        throw InvalidArgument(
            "velocity truncation must exclude non-positive speeds (lower bound "
            + std::to_string(lower) + ")");
    }
    if (!(upper > lower) || !(lower <= v0 && v0 <= upper))
    {
        throw InvalidArgument("velocity truncation bounds must bracket v0");
    }
    if (nodes < 2)
    {
        throw InvalidArgument("gaussian velocity distribution needs >= 2 nodes");
    }

    VelocityDistribution d;
    d.shape_ = VelocityShape::gaussian;
    d.v0_ = v0;
    d.fwhm_ = fwhm;
    d.lower_ = lower;
    d.upper_ = upper;

    auto const rule = gauss_legendre(nodes);
    double const half = 0.5 * (upper - lower);
    double const mid = 0.5 * (upper + lower);
    double const sigma = fwhm * fwhm_to_sigma;
    d.speeds_.resize(nodes);
    d.weights_.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i)
    {
        double const v = mid + half * rule.nodes[i];
        double const z = (v - v0) / sigma;
        d.speeds_[i] = v;
        d.weights_[i] = rule.weights[i] * std::exp(-0.5 * z * z);
    }
    double const total
        = std::accumulate(d.weights_.begin(), d.weights_.end(), 0.0);
    for (double& w : d.weights_)
    {
        w /= total;
    }
    return d;
}

VelocityDistribution VelocityDistribution::from_params(
    const MicrolaserParams& params, std::size_t nodes)
{
    if (params.dv_over_v0 == 0)
    {
        return delta(params.v0);
    }
    return gaussian(params.v0, params.dv_over_v0 * params.v0, nodes);
}

VelocityDistribution VelocityDistribution::rescaled(double s) const
{
    require_positive(s, "scale");
    VelocityDistribution d = *this;
    d.v0_ *= s;
    d.fwhm_ *= s;
    d.lower_ *= s;
    d.upper_ *= s;
    for (double& v : d.speeds_)
    {
        v *= s;
    }
    return d;
}

}  // namespace microlaser
