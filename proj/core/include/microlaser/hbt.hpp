#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "microlaser/numerics.hpp"

namespace microlaser {

struct TrajectoryRecord;

/*!
 * Detection times (s) of one channel, strictly increasing within [0, span].
 */
struct TimestampStream
{
    int detector_id = 0;
    std::vector<double> times;
    double span = 0;
    double applied_deadtime = 0;
    double efficiency = 1;

    double rate() const { return span > 0 ? static_cast<double>(times.size()) / span : 0.0; }
    void validate() const;
};

//! Homogeneous Poisson stream of the given rate on [0, span].
TimestampStream poisson_stream(double rate, double span, Rng& rng, int detector_id = 0);

//! Emission timestamps after burn-in, shifted so the stream starts at zero.
TimestampStream stream_from_record(const TrajectoryRecord& record);

//! Route each event to detector 1 with probability eff_1, to detector 2 with
//! probability eff_2, or discard it.
std::pair<TimestampStream, TimestampStream> split_stream(const TimestampStream& source,
                                                         double efficiency_1,
                                                         double efficiency_2,
                                                         Rng& rng);

//! Non-paralysable deadtime: keep an event iff it is at least `deadtime`
//! after the previous kept event.
TimestampStream impose_deadtime(const TimestampStream& stream, double deadtime);

/*!
 * Folded g2(tau) histogram: bin k covers |t2 - t1| in [k w, (k+1) w).
 */
struct CorrelationCurve
{
    std::vector<double> tau;       //!< bin centres (s)
    std::vector<double> g2;
    std::vector<double> err;
    std::vector<double> counts;    //!< raw pair counts
    std::vector<double> expected;  //!< uncorrelated-pair expectation
    double bin_width = 0;
    double max_lag = 0;

    std::size_t size() const { return tau.size(); }
};

/*!
 * Multi-start multi-stop correlation of every pair of events with
 * |t2 - t1| < max_lag, both signs folded onto tau >= 0.
 *
 * Each bin is normalised by rate_1 rate_2 (T - tau) 2w using the measured
 * rates. When both arguments hold the same events (same detector id and
 * identical times) the i == j pairs are excluded and rate_2 uses N - 1.
 * The span overload sums counts and expectations over independent segments.
 */
CorrelationCurve correlate(const TimestampStream& s1,
                           const TimestampStream& s2,
                           double bin_width,
                           double max_lag);
CorrelationCurve correlate(std::span<const TimestampStream> s1,
                           std::span<const TimestampStream> s2,
                           double bin_width,
                           double max_lag);

/*!
 * Weighted fit of g2(tau) = 1 + A exp(-tau / tau_c), A = Q / <n>.
 *
 * `covariance` is for (A, tau_c), row-major. With `fixed_tau` only A is
 * fitted and the tau entries of the covariance are zero.
 */
struct G2Fit
{
    double g2_zero = 1;
    double tau = 0;
    double q_over_n = 0;
    double q = 0;
    double q_err = 0;
    double q_over_n_err = 0;
    double tau_err = 0;
    double covariance[4] = {0, 0, 0, 0};
    double chi2 = 0;
    std::size_t dof = 0;
    std::size_t iterations = 0;
    bool tau_fixed = false;
};

G2Fit fit_g2(const CorrelationCurve& curve,
             double n_mean,
             std::optional<double> fixed_tau = std::nullopt);

struct DeadtimePoint
{
    double deadtime = 0;
    double g2_zero = 0;
    double err = 0;
};

struct DeadtimeExtrapolation
{
    double g2_zero_free = 0;
    double err = 0;
    double linear = 0;     //!< d g2(0) / d deadtime at zero
    double quadratic = 0;
    double reduced_chi2 = 0;
};

//! Weighted quadratic fit of g2(0) against deadtime; the intercept is the
//! deadtime-free value. Needs at least 4 distinct deadtimes.
DeadtimeExtrapolation extrapolate_deadtime_free(std::span<const DeadtimePoint> points);

//! `count` deadtimes log-spaced over [0.02, 1] * tau_corr.
std::vector<double> default_deadtime_grid(double tau_corr, std::size_t count = 6);

}  // namespace microlaser
