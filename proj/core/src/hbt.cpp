#include "microlaser/hbt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "microlaser/error.hpp"
#include "microlaser/qts.hpp"

namespace microlaser {

void TimestampStream::validate() const
{
    if (!(span > 0))
    {
        throw InvalidArgument("timestamp stream span must be positive");
    }
    if (!(efficiency >= 0 && efficiency <= 1) || !(applied_deadtime >= 0))
    {
        throw InvalidArgument("timestamp stream efficiency or deadtime out of range");
    }
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        if (times[i] < 0 || times[i] > span || (i > 0 && !(times[i] > times[i - 1])))
        {
            throw InvalidArgument("timestamps must be strictly increasing within [0, span]");
        }
    }
}

TimestampStream poisson_stream(double rate, double span, Rng& rng, int detector_id)
{
    if (!(rate >= 0) || !(span > 0))
    {
        throw InvalidArgument("poisson_stream needs rate >= 0 and span > 0");
    }
    TimestampStream s;
    s.detector_id = detector_id;
    s.span = span;
    if (rate == 0)
    {
        return s;
    }
    s.times.reserve(static_cast<std::size_t>(rate * span * 1.05) + 16);
    double t = rng.exponential(rate);
    while (t <= span)
    {
        s.times.push_back(t);
        t += rng.exponential(rate);
    }
    return s;
}

TimestampStream stream_from_record(const TrajectoryRecord& record)
{
    TimestampStream s;
    s.span = record.duration - record.burn_in;
    auto first = std::lower_bound(record.emission_timestamps.begin(),
                                  record.emission_timestamps.end(),
                                  record.burn_in);
    for (auto it = first; it != record.emission_timestamps.end(); ++it)
    {
        double const t = *it - record.burn_in;
        if (t > s.span)
        {
            break;
        }
        if (s.times.empty() || t > s.times.back())
        {
            s.times.push_back(t);
        }
    }
    return s;
}

std::pair<TimestampStream, TimestampStream> split_stream(const TimestampStream& source,
                                                         double efficiency_1,
                                                         double efficiency_2,
                                                         Rng& rng)
{
    if (!(efficiency_1 >= 0 && efficiency_2 >= 0 && efficiency_1 + efficiency_2 <= 1 + 1e-12))
    {
        throw InvalidArgument("split efficiencies must be >= 0 with sum <= 1");
    }
    TimestampStream a;
    TimestampStream b;
    a.detector_id = 1;
    b.detector_id = 2;
    a.span = b.span = source.span;
    a.applied_deadtime = b.applied_deadtime = source.applied_deadtime;
    a.efficiency = source.efficiency * efficiency_1;
    b.efficiency = source.efficiency * efficiency_2;
    for (double t : source.times)
    {
        double const u = rng.uniform();
        if (u < efficiency_1)
        {
            a.times.push_back(t);
        }
        else if (u < efficiency_1 + efficiency_2)
        {
            b.times.push_back(t);
        }
    }
    return {std::move(a), std::move(b)};
}

TimestampStream impose_deadtime(const TimestampStream& stream, double deadtime)
{
    if (!(deadtime >= 0))
    {
        throw InvalidArgument("deadtime must be >= 0");
    }
    TimestampStream out = stream;
    out.applied_deadtime = std::max(stream.applied_deadtime, deadtime);
    if (deadtime == 0)
    {
        return out;
    }
    out.times.clear();
    for (double t : stream.times)
    {
        if (out.times.empty() || t - out.times.back() >= deadtime)
        {
            out.times.push_back(t);
        }
    }
    return out;
}

//---------------------------------------------------------------------------//

namespace {

bool same_events(const TimestampStream& a, const TimestampStream& b)
{
    return &a == &b || (a.detector_id == b.detector_id && a.times == b.times);
}

}  // namespace

CorrelationCurve correlate(std::span<const TimestampStream> s1,
                           std::span<const TimestampStream> s2,
                           double bin_width,
                           double max_lag)
{
    if (!(bin_width > 0) || !(max_lag >= bin_width))
    {
        throw InvalidArgument("correlate needs 0 < bin_width <= max_lag");
    }
    if (s1.size() != s2.size() || s1.empty())
    {
        throw InvalidArgument("correlate needs the same number of segments per channel");
    }
    auto const bins = static_cast<std::size_t>(std::ceil(max_lag / bin_width - 1e-9));
    CorrelationCurve c;
    c.bin_width = bin_width;
    c.max_lag = static_cast<double>(bins) * bin_width;
    c.counts.assign(bins, 0.0);
    c.expected.assign(bins, 0.0);
    // a self-correlation counts every unordered pair twice, doubling the variance
    std::vector<double> variance(bins, 0.0);
    std::size_t events_1 = 0;
    std::size_t events_2 = 0;

    for (std::size_t seg = 0; seg < s1.size(); ++seg)
    {
        auto const& a = s1[seg];
        auto const& b = s2[seg];
        double const span = std::min(a.span, b.span);
        if (!(span > c.max_lag))
        {
            throw InvalidArgument("correlate needs max_lag shorter than the overlapping span");
        }
        bool const self = same_events(a, b);
        auto const na = static_cast<std::size_t>(
            std::upper_bound(a.times.begin(), a.times.end(), span) - a.times.begin());
        auto const nb = static_cast<std::size_t>(
            std::upper_bound(b.times.begin(), b.times.end(), span) - b.times.begin());
        events_1 += na;
        events_2 += nb;
        double const pair_variance = self ? 2.0 : 1.0;

        std::size_t lo = 0;
        for (std::size_t i = 0; i < na; ++i)
        {
            double const ti = a.times[i];
            while (lo < nb && b.times[lo] <= ti - c.max_lag)
            {
                ++lo;
            }
            for (std::size_t j = lo; j < nb; ++j)
            {
                double const d = b.times[j] - ti;
                if (d >= c.max_lag)
                {
                    break;
                }
                if (self && i == j)
                {
                    continue;
                }
                auto const k = static_cast<std::size_t>(std::abs(d) / bin_width);
                if (k < bins)
                {
                    c.counts[k] += 1.0;
                    variance[k] += pair_variance;
                }
            }
        }

        double const r1 = static_cast<double>(na) / span;
        double const r2 = static_cast<double>(self && nb > 0 ? nb - 1 : nb) / span;
        for (std::size_t k = 0; k < bins; ++k)
        {
            double const centre = (static_cast<double>(k) + 0.5) * bin_width;
            c.expected[k] += r1 * r2 * (span - centre) * 2.0 * bin_width;
        }
    }
    if (events_1 == 0 || events_2 == 0)
    {
        throw InsufficientData("correlate: empty streams");
    }

    c.tau.resize(bins);
    c.g2.resize(bins);
    c.err.resize(bins);
    for (std::size_t k = 0; k < bins; ++k)
    {
        c.tau[k] = (static_cast<double>(k) + 0.5) * bin_width;
        double const e = c.expected[k];
        c.g2[k] = e > 0 ? c.counts[k] / e : 0.0;
        c.err[k] = e > 0 ? std::sqrt(std::max(variance[k], 1.0)) / e : 0.0;
    }
    return c;
}

CorrelationCurve correlate(const TimestampStream& s1,
                           const TimestampStream& s2,
                           double bin_width,
                           double max_lag)
{
    return correlate(std::span<const TimestampStream>(&s1, 1),
                     std::span<const TimestampStream>(&s2, 1),
                     bin_width,
                     max_lag);
}

//---------------------------------------------------------------------------//

namespace {

struct FitData
{
    std::vector<double> tau;
    std::vector<double> y;  // g2 - 1
    std::vector<double> w;
};

double chi2_of(const FitData& d, double a, double tau_c)
{
    double chi2 = 0;
    for (std::size_t k = 0; k < d.tau.size(); ++k)
    {
        double const r = d.y[k] - a * std::exp(-d.tau[k] / tau_c);
        chi2 += d.w[k] * r * r;
    }
    return chi2;
}

// Best A at fixed tau_c (linear sub-problem).
double best_amplitude(const FitData& d, double tau_c, double* variance)
{
    double num = 0;
    double den = 0;
    for (std::size_t k = 0; k < d.tau.size(); ++k)
    {
        double const e = std::exp(-d.tau[k] / tau_c);
        num += d.w[k] * e * d.y[k];
        den += d.w[k] * e * e;
    }
    if (!(den > 0))
    {
        throw FitError("g2 fit: no weighted information in the curve");
    }
    if (variance)
    {
        *variance = 1.0 / den;
    }
    return num / den;
}

}  // namespace

G2Fit fit_g2(const CorrelationCurve& curve, double n_mean, std::optional<double> fixed_tau)
{
    if (curve.size() < 10)
    {
        throw InsufficientData("g2 fit needs at least 10 bins");
    }
    FitData d;
    for (std::size_t k = 0; k < curve.size(); ++k)
    {
        if (curve.err[k] > 0 && std::isfinite(curve.g2[k]))
        {
            d.tau.push_back(curve.tau[k]);
            d.y.push_back(curve.g2[k] - 1.0);
            d.w.push_back(1.0 / (curve.err[k] * curve.err[k]));
        }
    }
    if (d.tau.size() < 10)
    {
        throw InsufficientData("g2 fit needs at least 10 populated bins");
    }

    double const tau_lo = 2.0 * curve.bin_width;
    double const tau_hi = curve.max_lag;
    G2Fit fit;

    if (fixed_tau)
    {
        if (!(*fixed_tau > 0))
        {
            throw InvalidArgument("fixed correlation time must be positive");
        }
        double var = 0;
        fit.tau = *fixed_tau;
        fit.q_over_n = best_amplitude(d, fit.tau, &var);
        fit.covariance[0] = var;
        fit.tau_fixed = true;
        fit.chi2 = chi2_of(d, fit.q_over_n, fit.tau);
        fit.dof = d.tau.size() - 1;
    }
    else
    {
        // Levenberg-Marquardt in (A, log tau_c)
        double tau0 = 0.1 * tau_hi;
        double const a_start = d.y[0];
        for (std::size_t k = 1; k < d.tau.size(); ++k)
        {
            if (std::abs(d.y[k]) < std::abs(a_start) / std::exp(1.0))
            {
                tau0 = d.tau[k];
                break;
            }
        }
        double log_tau = std::log(std::clamp(tau0, tau_lo, tau_hi));
        double a = best_amplitude(d, std::exp(log_tau), nullptr);
        double chi2 = chi2_of(d, a, std::exp(log_tau));
        double lambda = 1e-3;
        std::size_t it = 0;
        for (; it < 500; ++it)
        {
            double const tc = std::exp(log_tau);
            double h00 = 0, h01 = 0, h11 = 0, g0 = 0, g1 = 0;
            for (std::size_t k = 0; k < d.tau.size(); ++k)
            {
                double const e = std::exp(-d.tau[k] / tc);
                double const j0 = e;
                double const j1 = a * e * d.tau[k] / tc;
                double const r = d.y[k] - a * e;
                h00 += d.w[k] * j0 * j0;
                h01 += d.w[k] * j0 * j1;
                h11 += d.w[k] * j1 * j1;
                g0 += d.w[k] * j0 * r;
                g1 += d.w[k] * j1 * r;
            }
            bool improved = false;
            while (lambda < 1e12)
            {
                double const m00 = h00 * (1 + lambda);
                double const m11 = h11 * (1 + lambda) + 1e-300;
                double const det = m00 * m11 - h01 * h01;
                double const da = (m11 * g0 - h01 * g1) / det;
                double const dl = (m00 * g1 - h01 * g0) / det;
                double const na = a + da;
                double const nl = std::clamp(log_tau + dl, std::log(tau_lo), std::log(tau_hi));
                double const nchi2 = chi2_of(d, na, std::exp(nl));
                if (std::isfinite(nchi2) && nchi2 <= chi2)
                {
                    bool const small = std::abs(chi2 - nchi2) <= 1e-12 * std::max(1.0, chi2)
                                       && std::abs(nl - log_tau) < 1e-10;
                    a = na;
                    log_tau = nl;
                    chi2 = nchi2;
                    lambda = std::max(lambda / 10, 1e-12);
                    improved = !small;
                    break;
                }
                lambda *= 10;
            }
            if (!improved)
            {
                break;
            }
        }
        if (!std::isfinite(chi2) || !std::isfinite(a))
        {
            std::ostringstream msg;
            msg << "g2 fit did not converge after " << it << " iterations (chi2 = " << chi2 << ")";
            throw FitError(msg.str());
        }
        fit.iterations = it;
        fit.tau = std::exp(log_tau);
        fit.q_over_n = a;
        fit.chi2 = chi2;
        fit.dof = d.tau.size() - 2;

        // covariance in (A, tau_c)
        double h00 = 0, h01 = 0, h11 = 0;
        for (std::size_t k = 0; k < d.tau.size(); ++k)
        {
            double const e = std::exp(-d.tau[k] / fit.tau);
            double const j1 = a * e * d.tau[k] / (fit.tau * fit.tau);
            h00 += d.w[k] * e * e;
            h01 += d.w[k] * e * j1;
            h11 += d.w[k] * j1 * j1;
        }
        double const det = h00 * h11 - h01 * h01;
        if (det > 1e-12 * h00 * h11)
        {
            fit.covariance[0] = h11 / det;
            fit.covariance[1] = fit.covariance[2] = -h01 / det;
            fit.covariance[3] = h00 / det;
        }
        else
        {
            // amplitude too small to pin tau_c: report the conditional error on A
            fit.covariance[0] = 1.0 / h00;
            fit.covariance[3] = std::numeric_limits<double>::infinity();
        }
    }

    fit.g2_zero = 1.0 + fit.q_over_n;
    fit.q_over_n_err = std::sqrt(fit.covariance[0]);
    fit.tau_err = std::sqrt(fit.covariance[3]);
    fit.q = fit.q_over_n * n_mean;
    fit.q_err = fit.q_over_n_err * n_mean;
    return fit;
}

//---------------------------------------------------------------------------//

DeadtimeExtrapolation extrapolate_deadtime_free(std::span<const DeadtimePoint> points)
{
    std::set<double> distinct;
    double scale = 0;
    for (auto const& p : points)
    {
        if (!(p.deadtime >= 0) || !(p.err > 0))
        {
            throw InvalidArgument("deadtime points need deadtime >= 0 and err > 0");
        }
        distinct.insert(p.deadtime);
        scale = std::max(scale, p.deadtime);
    }
    if (distinct.size() < 4)
    {
        throw InsufficientData("deadtime extrapolation needs at least 4 distinct deadtimes");
    }
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> w;
    for (auto const& p : points)
    {
        x.push_back(p.deadtime / scale);
        y.push_back(p.g2_zero);
        w.push_back(1.0 / (p.err * p.err));
    }
    auto const fit = fit_powers(x, y, w, 0, 2);
    if (fit.condition > 1e8)
    {
        throw FitError("deadtime extrapolation is ill-conditioned");
    }
    DeadtimeExtrapolation out;
    out.g2_zero_free = fit.coefficients[0];
    out.err = std::sqrt(fit.variance(0));
    out.linear = fit.coefficients[1] / scale;
    out.quadratic = fit.coefficients[2] / (scale * scale);
    out.reduced_chi2 = fit.reduced_chi2();
    return out;
}

std::vector<double> default_deadtime_grid(double tau_corr, std::size_t count)
{
    if (!(tau_corr > 0) || count < 2)
    {
        throw InvalidArgument("deadtime grid needs tau_corr > 0 and at least 2 values");
    }
    std::vector<double> grid(count);
    double const lo = std::log(0.02);
    for (std::size_t i = 0; i < count; ++i)
    {
        double const f = static_cast<double>(i) / static_cast<double>(count - 1);
        grid[i] = tau_corr * std::exp(lo * (1.0 - f));
    }
    return grid;
}

}  // namespace microlaser
