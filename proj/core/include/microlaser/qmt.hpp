#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "microlaser/params.hpp"

namespace microlaser {

//! Probability that an excited atom emits into a cavity holding n photons
//! after interacting for t_int: sin^2(sqrt(n+1) g t_int).
double emission_probability(double n, double g, double t_int);

/*!
 * Velocity-averaged emission probability <P(n)>_v and the gain
 * G(n) = r <P(n)>_v, with analytic derivatives in n (n treated as a
 * continuous variable).
 */
class GainFunction
{
  public:
    GainFunction(const MicrolaserParams& params,
                 const VelocityDistribution& dist);

    double emission_probability(double n) const;
    double emission_slope(double n) const;      //!< d<P>/dn
    double emission_curvature(double n) const;  //!< d^2<P>/dn^2

    double rate(double n) const { return r_ * emission_probability(n); }
    double slope(double n) const { return r_ * emission_slope(n); }

    double injection_rate() const { return r_; }
    double gamma_c() const { return gamma_c_; }

    //! <P(n)> for n = 0 .. n_max.
    std::vector<double> tabulate(std::size_t n_max) const;
    //! Append <P(n)> for n = table.size() .. n_max.
    void extend_table(std::vector<double>& table, std::size_t n_max) const;

  private:
    std::vector<double> angles_;   // g * t_int(v_i)
    std::vector<double> weights_;
    double r_ = 0;
    double gamma_c_ = 0;
};

//! G(n) = r <sin^2(sqrt(n+1) g t_int(v))>_v.
double gain(double n, const MicrolaserParams& params, const VelocityDistribution& dist);

/*!
 * Truncated photon-number distribution with its moments.
 *
 * mandel_q is variance / n_mean - 1; it is NaN for the vacuum.
 */
struct PhotonStatistics
{
    std::size_t n_max = 0;
    std::vector<double> p;
    double n_mean = 0;
    double variance = 0;
    double mandel_q = 0;

    std::size_t most_probable() const;
};

//! Moments of a normalised distribution.
PhotonStatistics make_photon_statistics(std::vector<double> p);

//! Photon-number cutoff large enough for the steady state at this pump.
std::size_t default_truncation(const MicrolaserParams& params);

/*!
 * Steady-state photon distribution from detailed balance of the
 * birth-death process with birth rate G(n) and death rate gamma_c * n:
 * p_n / p_{n-1} = N_ex <P(n-1)> / n, accumulated in log space.
 *
 * Throws TruncationError if p_{n_max} >= 1e-10.
 */
PhotonStatistics steady_state_distribution(const MicrolaserParams& params,
                                           const VelocityDistribution& dist,
                                           std::optional<std::size_t> n_max = {});

struct FixedPointBranch
{
    double n0 = 0;
    bool stable = false;
    double restoring_rate = 0;  //!< gamma_c - dG/dn at n0
};

/*!
 * Roots of gain(n) = gamma_c * n on [0, n_search_max], bracketed on the
 * integer grid and bisected to |dn| < 1e-6. `gain_slope` gives dG/dn for the
 * stability flag. Sorted by n0.
 */
std::vector<FixedPointBranch>
find_fixed_points(const std::function<double(double)>& gain,
                  const std::function<double(double)>& gain_slope,
                  double gamma_c,
                  double n_search_max);

//! Fixed points of the microlaser rate equation. Defaults the search range
//! to N_ex + 1, which bounds every root since G(n) <= r.
std::vector<FixedPointBranch>
fixed_point_branches(const MicrolaserParams& params,
                     const VelocityDistribution& dist,
                     std::optional<double> n_search_max = {});

//! 1/tau = gamma_c - dG/dn at n0.
double restoring_rate(const MicrolaserParams& params,
                      const VelocityDistribution& dist,
                      double n0);

struct OperatingPoint
{
    FixedPointBranch branch;
    int lobe = 0;                   //!< Rabi lobe index floor(phi(v0) / pi)
    std::size_t stable_branches = 0;
    double most_probable_n = 0;     //!< argmax of p_n (multi-branch case only)
    double q_linearized = 0;
};

/*!
 * Steady-state operating points over a sweep of injection rates with the
 * remaining parameters fixed. Caches the integer table of <P(n)> so that each
 * new rate costs O(N_ex) without re-evaluating the velocity average.
 *
 * Not thread-safe: use one instance per thread.
 */
class OperatingPointSolver
{
  public:
    OperatingPointSolver(const MicrolaserParams& params,
                         const VelocityDistribution& dist);

    const MicrolaserParams& params() const { return params_; }
    const GainFunction& unit_gain() const { return unit_gain_; }

    //! Branch-selected operating point. When several stable branches
    //! coexist, picks the one nearest the global maximum of p_n.
    OperatingPoint solve(double r);
    OperatingPoint solve_mean_atom_number(double atoms);

    std::vector<FixedPointBranch> branches(double r,
                                           std::optional<double> n_search_max = {});
    PhotonStatistics distribution(double r,
                                  std::optional<std::size_t> n_max = {});

  private:
    const std::vector<double>& table(std::size_t n_max);
    std::size_t log_argmax(double n_ex, std::size_t n_max);

    MicrolaserParams params_;
    GainFunction unit_gain_;  // r = 1
    std::vector<double> table_;
};

//! Branch-selected stable operating point.
OperatingPoint select_operating_branch(const MicrolaserParams& params,
                                       const VelocityDistribution& dist);

/*!
 * Linearised Mandel Q at the selected branch:
 * Q = [1 - N_ex <P>'(n0)]^{-1} - 1.
 */
double mandel_q_linearized(const MicrolaserParams& params,
                           const VelocityDistribution& dist);

//! Same formula evaluated at a given photon number.
double mandel_q_linearized_at(const MicrolaserParams& params,
                              const VelocityDistribution& dist,
                              double n0);

double output_flux(const PhotonStatistics& stats, double gamma_c);
double output_flux(double n_mean, double gamma_c);

}  // namespace microlaser
