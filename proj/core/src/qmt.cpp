#include "microlaser/qmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "microlaser/error.hpp"

namespace microlaser {
namespace {

constexpr double root_tolerance = 1e-6;
constexpr double tail_limit = 1e-10;

double bisect(const std::function<double(double)>& f, double a, double b)
{
    double fa = f(a);
    while (b - a > root_tolerance)
    {
        double const c = 0.5 * (a + b);
        double const fc = f(c);
        if (fc == 0)
        {
            return c;
        }
        if ((fa > 0) == (fc > 0))
        {
            a = c;
            fa = fc;
        }
        else
        {
            b = c;
        }
    }
    return 0.5 * (a + b);
}

// Roots of a function sampled on the integer grid 0..f_grid.size()-1.
std::vector<FixedPointBranch>
roots_from_grid(const std::vector<double>& f_grid,
                const std::function<double(double)>& f,
                const std::function<double(double)>& gain_slope,
                double gamma_c)
{
    std::vector<FixedPointBranch> out;
    auto make_branch = [&](double n0) {
        FixedPointBranch b;
        b.n0 = n0;
        b.restoring_rate = gamma_c - gain_slope(n0);
        b.stable = b.restoring_rate > 0;
        return b;
    };
    if (f_grid.empty())
    {
        return out;
    }
    if (f_grid[0] == 0)
    {
        out.push_back(make_branch(0.0));
    }
    for (std::size_t i = 0; i + 1 < f_grid.size(); ++i)
    {
        double const lo = f_grid[i];
        double const hi = f_grid[i + 1];
        bool const down = lo > 0 && hi <= 0;
        bool const up = lo < 0 && hi >= 0;
        if (!down && !up)
        {
            continue;
        }
        double const a = static_cast<double>(i);
        double n0 = hi == 0 ? a + 1 : bisect(f, a, a + 1);
        out.push_back(make_branch(n0));
    }
    return out;
}

}  // namespace

double emission_probability(double n, double g, double t_int)
{
    double const s = std::sin(std::sqrt(n + 1.0) * g * t_int);
    return s * s;
}

GainFunction::GainFunction(const MicrolaserParams& params,
                           const VelocityDistribution& dist)
    : r_(params.r), gamma_c_(params.gamma_c)
{
    params.validate();
    auto const speeds = dist.speeds();
    auto const weights = dist.weights();
    angles_.reserve(speeds.size());
    for (std::size_t i = 0; i < speeds.size(); ++i)
    {
        if (!(weights[i] >= 0))
        {
            throw InvalidArgument("velocity distribution has negative weights");
        }
        if (!(speeds[i] > 0))
        {
            throw InvalidArgument("velocity distribution includes v <= 0");
        }
        angles_.push_back(params.g * params.interaction_time(speeds[i]));
    }
    weights_.assign(weights.begin(), weights.end());
}

double GainFunction::emission_probability(double n) const
{
    double const x = std::sqrt(n + 1.0);
    double acc = 0;
    for (std::size_t i = 0; i < angles_.size(); ++i)
    {
        double const s = std::sin(x * angles_[i]);
        acc += weights_[i] * s * s;
    }
    return acc;
}

double GainFunction::emission_slope(double n) const
{
    double const x = std::sqrt(n + 1.0);
    double acc = 0;
    for (std::size_t i = 0; i < angles_.size(); ++i)
    {
        double const a = angles_[i];
        acc += weights_[i] * a * std::sin(2 * x * a);
    }
    return acc / (2 * x);
}

double GainFunction::emission_curvature(double n) const
{
    double const x = std::sqrt(n + 1.0);
    double acc = 0;
    for (std::size_t i = 0; i < angles_.size(); ++i)
    {
        double const a = angles_[i];
        acc += weights_[i]
               * (a * a * std::cos(2 * x * a) / (2 * x * x)
                  - a * std::sin(2 * x * a) / (4 * x * x * x));
    }
    return acc;
}

std::vector<double> GainFunction::tabulate(std::size_t n_max) const
{
    std::vector<double> table;
    extend_table(table, n_max);
    return table;
}

void GainFunction::extend_table(std::vector<double>& table,
                                std::size_t n_max) const
{
    std::size_t const start = table.size();
    if (start > n_max)
    {
        return;
    }
    table.resize(n_max + 1);
    for (std::size_t n = start; n <= n_max; ++n)
    {
        table[n] = emission_probability(static_cast<double>(n));
    }
}

double gain(double n, const MicrolaserParams& params, const VelocityDistribution& dist)
{
    return GainFunction(params, dist).rate(n);
}

//---------------------------------------------------------------------------//

std::size_t PhotonStatistics::most_probable() const
{
    return static_cast<std::size_t>(
        std::distance(p.begin(), std::max_element(p.begin(), p.end())));
}

PhotonStatistics make_photon_statistics(std::vector<double> p)
{
    if (p.empty())
    {
        throw InvalidArgument("photon distribution is empty");
    }
    PhotonStatistics s;
    s.n_max = p.size() - 1;
    double m1 = 0;
    double m2 = 0;
    for (std::size_t n = 0; n < p.size(); ++n)
    {
        double const nn = static_cast<double>(n);
        m1 += nn * p[n];
        m2 += nn * nn * p[n];
    }
    s.n_mean = m1;
    s.variance = std::max(0.0, m2 - m1 * m1);
    s.mandel_q = m1 > 0 ? s.variance / m1 - 1.0
                        : std::numeric_limits<double>::quiet_NaN();
    s.p = std::move(p);
    return s;
}

std::size_t default_truncation(const MicrolaserParams& params)
{
    double const n_ex = params.n_ex();
    return static_cast<std::size_t>(std::ceil(n_ex + 10 * std::sqrt(n_ex) + 30));
}

PhotonStatistics steady_state_distribution(const MicrolaserParams& params,
                                           const VelocityDistribution& dist,
                                           std::optional<std::size_t> n_max)
{
    return OperatingPointSolver(params, dist).distribution(params.r, n_max);
}

std::vector<FixedPointBranch>
find_fixed_points(const std::function<double(double)>& gain,
                  const std::function<double(double)>& gain_slope,
                  double gamma_c,
                  double n_search_max)
{
    if (!(gamma_c > 0) || !(n_search_max >= 0))
    {
        throw InvalidArgument("find_fixed_points: invalid gamma_c or search range");
    }
    auto const m = static_cast<std::size_t>(std::ceil(n_search_max));
    std::vector<double> grid(m + 1);
    for (std::size_t i = 0; i <= m; ++i)
    {
        double const n = static_cast<double>(i);
        grid[i] = gain(n) - gamma_c * n;
    }
    auto f = [&](double n) { return gain(n) - gamma_c * n; };
    return roots_from_grid(grid, f, gain_slope, gamma_c);
}

std::vector<FixedPointBranch>
fixed_point_branches(const MicrolaserParams& params,
                     const VelocityDistribution& dist,
                     std::optional<double> n_search_max)
{
    return OperatingPointSolver(params, dist).branches(params.r, n_search_max);
}

double restoring_rate(const MicrolaserParams& params,
                      const VelocityDistribution& dist,
                      double n0)
{
    if (!(n0 >= 0))
    {
        throw InvalidArgument("restoring_rate: n0 must be >= 0");
    }
    GainFunction const gf(params, dist);
    return params.gamma_c - gf.slope(n0);
}

//---------------------------------------------------------------------------//

OperatingPointSolver::OperatingPointSolver(const MicrolaserParams& params,
                                           const VelocityDistribution& dist)
    : params_(params)
    , unit_gain_([&] {
        MicrolaserParams unit = params;
        unit.r = 1.0;
        return GainFunction(unit, dist);
    }())
{
    params_.validate();
}

const std::vector<double>& OperatingPointSolver::table(std::size_t n_max)
{
    unit_gain_.extend_table(table_, n_max);
    return table_;
}

std::vector<FixedPointBranch>
OperatingPointSolver::branches(double r, std::optional<double> n_search_max)
{
    if (!(r >= 0))
    {
        throw InvalidArgument("injection rate must be >= 0");
    }
    double const gamma_c = params_.gamma_c;
    double const hi = n_search_max.value_or(r / gamma_c + 1.0);
    if (!(hi >= 0))
    {
        throw InvalidArgument("n_search_max must be >= 0");
    }
    auto const m = static_cast<std::size_t>(std::ceil(hi));
    auto const& tbl = table(m);
    std::vector<double> grid(m + 1);
    for (std::size_t i = 0; i <= m; ++i)
    {
        grid[i] = r * tbl[i] - gamma_c * static_cast<double>(i);
    }
    auto f = [&](double n) {
        return r * unit_gain_.emission_probability(n) - gamma_c * n;
    };
    auto slope = [&](double n) { return r * unit_gain_.emission_slope(n); };
    return roots_from_grid(grid, f, slope, gamma_c);
}

PhotonStatistics OperatingPointSolver::distribution(double r,
                                                    std::optional<std::size_t> n_max)
{
    MicrolaserParams p = params_;
    p.r = r;
    std::size_t const top = n_max.value_or(default_truncation(p));
    double const n_ex = r / params_.gamma_c;
    auto const& tbl = table(top);

    std::vector<double> logp(top + 1);
    logp[0] = 0.0;
    double best = 0.0;
    double const ninf = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n <= top; ++n)
    {
        double const ratio = n_ex * tbl[n - 1] / static_cast<double>(n);
        logp[n] = ratio > 0 && logp[n - 1] > ninf ? logp[n - 1] + std::log(ratio)
                                                  : ninf;
        best = std::max(best, logp[n]);
    }
    std::vector<double> prob(top + 1);
    double total = 0;
    for (std::size_t n = 0; n <= top; ++n)
    {
        prob[n] = std::exp(logp[n] - best);
        total += prob[n];
    }
    for (double& x : prob)
    {
        x /= total;
    }
    if (!(prob[top] < tail_limit))
    {
        throw TruncationError("photon truncation n_max = " + std::to_string(top)
                              + " too small: tail probability "
                              + std::to_string(prob[top]));
    }
    return make_photon_statistics(std::move(prob));
}

std::size_t OperatingPointSolver::log_argmax(double n_ex, std::size_t n_max)
{
    auto const& tbl = table(n_max);
    double lp = 0;
    double best = 0;
    std::size_t arg = 0;
    for (std::size_t n = 1; n <= n_max; ++n)
    {
        double const ratio = n_ex * tbl[n - 1] / static_cast<double>(n);
        if (!(ratio > 0))
        {
            break;
        }
        lp += std::log(ratio);
        if (lp > best)
        {
            best = lp;
            arg = n;
        }
    }
    return arg;
}

OperatingPoint OperatingPointSolver::solve(double r)
{
    auto const all = branches(r);
    std::vector<FixedPointBranch> stable;
    std::copy_if(all.begin(), all.end(), std::back_inserter(stable),
                 [](const FixedPointBranch& b) { return b.stable; });
    if (stable.empty())
    {
        throw NoStableBranch("no stable fixed point of G(n) = gamma_c n");
    }

    OperatingPoint op;
    op.stable_branches = stable.size();
    op.branch = stable.front();
    if (stable.size() > 1)
    {
        MicrolaserParams p = params_;
        p.r = r;
        auto const mode = static_cast<double>(
            log_argmax(r / params_.gamma_c, default_truncation(p)));
        op.most_probable_n = mode;
        op.branch = *std::min_element(
            stable.begin(), stable.end(),
            [mode](const FixedPointBranch& a, const FixedPointBranch& b) {
                return std::abs(a.n0 - mode) < std::abs(b.n0 - mode);
            });
    }
    double const phase = std::sqrt(op.branch.n0 + 1.0) * params_.g
                         * params_.interaction_time();
    op.lobe = static_cast<int>(std::floor(phase / std::numbers::pi));
    double const n_ex = r / params_.gamma_c;
    op.q_linearized
        = 1.0 / (1.0 - n_ex * unit_gain_.emission_slope(op.branch.n0)) - 1.0;
    return op;
}

OperatingPoint OperatingPointSolver::solve_mean_atom_number(double atoms)
{
    return solve(atoms / params_.interaction_time());
}

OperatingPoint select_operating_branch(const MicrolaserParams& params,
                                       const VelocityDistribution& dist)
{
    return OperatingPointSolver(params, dist).solve(params.r);
}

double mandel_q_linearized(const MicrolaserParams& params,
                           const VelocityDistribution& dist)
{
    return select_operating_branch(params, dist).q_linearized;
}

double mandel_q_linearized_at(const MicrolaserParams& params,
                              const VelocityDistribution& dist,
                              double n0)
{
    GainFunction const gf(params, dist);
    return 1.0 / (1.0 - params.n_ex() * gf.emission_slope(n0)) - 1.0;
}

double output_flux(const PhotonStatistics& stats, double gamma_c)
{
    return output_flux(stats.n_mean, gamma_c);
}

double output_flux(double n_mean, double gamma_c)
{
    return n_mean * gamma_c;
}

}  // namespace microlaser
