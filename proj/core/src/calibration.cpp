#include "microlaser/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "microlaser/error.hpp"
#include "microlaser/numerics.hpp"
#include "microlaser/qmt.hpp"

namespace microlaser {

void IOCurve::validate() const
{
    if (atoms.size() != photons.size() || atoms.size() != branch.size())
    {
        throw InvalidArgument("IOCurve columns differ in length");
    }
    for (double n : photons)
    {
        if (!(n >= 0))
        {
            throw InvalidArgument("IOCurve has a negative photon number");
        }
    }
}

IOCurve predict_io_curve(const MicrolaserParams& params_template,
                         const VelocityDistribution& dist,
                         std::span<const double> atoms_grid)
{
    if (atoms_grid.empty())
    {
        throw InvalidArgument("predict_io_curve needs a non-empty grid");
    }
    for (std::size_t i = 0; i < atoms_grid.size(); ++i)
    {
        if (!(atoms_grid[i] > 0) || (i > 0 && !(atoms_grid[i] > atoms_grid[i - 1])))
        {
            throw InvalidArgument("atom-number grid must be positive and ascending");
        }
    }
    OperatingPointSolver solver(params_template, dist);
    IOCurve curve;
    curve.params = params_template;
    for (double atoms : atoms_grid)
    {
        auto const op = solver.solve_mean_atom_number(atoms);
        curve.atoms.push_back(atoms);
        curve.photons.push_back(op.branch.n0);
        curve.branch.push_back(op.lobe);
    }
    for (std::size_t i = 1; i < atoms_grid.size(); ++i)
    {
        if (curve.branch[i] == curve.branch[i - 1])
        {
            continue;
        }
        double lo = atoms_grid[i - 1];
        double hi = atoms_grid[i];
        int const lobe_lo = curve.branch[i - 1];
        while (hi - lo > 1e-6 * hi)
        {
            double const mid = 0.5 * (lo + hi);
            if (solver.solve_mean_atom_number(mid).lobe == lobe_lo)
            {
                lo = mid;
            }
            else
            {
                hi = mid;
            }
        }
        curve.jumps.push_back(0.5 * (lo + hi));
    }
    return curve;
}

//---------------------------------------------------------------------------//

namespace {

struct Objective
{
    double value = std::numeric_limits<double>::infinity();
    double scale_photons = 0;
};

class CalibrationProblem
{
  public:
    CalibrationProblem(std::span<const RawCountPoint> raw,
                       const MicrolaserParams& params,
                       const VelocityDistribution& dist,
                       const CalibrationOptions& options)
        : raw_(raw), options_(options), solver_(params, dist)
    {
        for (auto const& p : raw)
        {
            f_max_ = std::max(f_max_, p.fluorescence);
            f_min_ = std::min(f_min_, p.fluorescence);
        }
        // tabulate the response over every <N> the search can reach
        double const lo = options.atoms_min * f_min_ / f_max_;
        double const hi = options.atoms_max;
        std::size_t const count = std::max<std::size_t>(2 * options.coarse_points, 200);
        std::vector<double> grid(count);
        for (std::size_t i = 0; i < count; ++i)
        {
            double const f = static_cast<double>(i) / static_cast<double>(count - 1);
            grid[i] = lo * std::pow(hi / lo, f);
        }
        table_ = predict_io_curve(params, dist, grid);
    }

    const IOCurve& table() const { return table_; }
    double f_max() const { return f_max_; }

    double interpolated(double atoms) const
    {
        auto const& x = table_.atoms;
        auto const it = std::upper_bound(x.begin(), x.end(), atoms);
        if (it == x.begin())
        {
            return table_.photons.front() * atoms / x.front();
        }
        if (it == x.end())
        {
            return table_.photons.back();
        }
        auto const k = static_cast<std::size_t>(it - x.begin());
        double const f = (atoms - x[k - 1]) / (x[k] - x[k - 1]);
        return table_.photons[k - 1] + f * (table_.photons[k] - table_.photons[k - 1]);
    }

    double exact(double atoms) { return solver_.solve_mean_atom_number(atoms).branch.n0; }

    double weight(double atoms) const
    {
        for (double j : table_.jumps)
        {
            if (std::abs(atoms - j) <= options_.jump_window * j)
            {
                return options_.jump_weight;
            }
        }
        return 1.0;
    }

    template <class Predict>
    Objective evaluate(double s, Predict&& predict) const
    {
        double const a = s / f_max_;
        double sum_cn = 0;
        double sum_cc = 0;
        double sum_nn = 0;
        for (auto const& p : raw_)
        {
            double const atoms = a * p.fluorescence;
            double const n = predict(atoms);
            double const w = weight(atoms);
            sum_cn += w * p.output * n;
            sum_cc += w * p.output * p.output;
            sum_nn += w * n * n;
        }
        // residuals in count units, C - n / b; 1 / b enters linearly
        Objective o;
        if (!(sum_nn > 0) || !(sum_cn > 0))
        {
            o.value = sum_cc;
            return o;
        }
        o.scale_photons = sum_nn / sum_cn;
        o.value = std::max(0.0, sum_cc - sum_cn * sum_cn / sum_nn);
        return o;
    }

  private:
    std::span<const RawCountPoint> raw_;
    CalibrationOptions options_;
    OperatingPointSolver solver_;
    IOCurve table_;
    double f_max_ = 0;
    double f_min_ = std::numeric_limits<double>::infinity();
};

}  // namespace

CalibrationFit fit_calibration(std::span<const RawCountPoint> raw_points,
                               const MicrolaserParams& params_template,
                               const VelocityDistribution& dist,
                               const CalibrationOptions& options)
{
    if (raw_points.size() < 20)
    {
        throw InsufficientData("calibration needs at least 20 points");
    }
    if (!(options.atoms_min > 0) || !(options.atoms_max > options.atoms_min)
        || options.coarse_points < 3)
    {
        throw InvalidArgument("calibration search range is invalid");
    }
    double f_lo = std::numeric_limits<double>::infinity();
    double f_hi = -f_lo;
    double c_lo = f_lo;
    double c_hi = -f_lo;
    for (auto const& p : raw_points)
    {
        if (!(p.fluorescence > 0) || !(p.output >= 0))
        {
            throw InvalidArgument("raw counts must be positive");
        }
        f_lo = std::min(f_lo, p.fluorescence);
        f_hi = std::max(f_hi, p.fluorescence);
        c_lo = std::min(c_lo, p.output);
        c_hi = std::max(c_hi, p.output);
    }
    if (!(f_hi > f_lo) || !(c_hi > c_lo))
    {
        throw NonIdentifiable("calibration points are degenerate (no spread in counts)");
    }

    CalibrationProblem problem(raw_points, params_template, dist, options);
    auto interp = [&](double atoms) { return problem.interpolated(atoms); };

    std::vector<double> s_grid(options.coarse_points);
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s_grid.size(); ++i)
    {
        double const f = static_cast<double>(i) / static_cast<double>(s_grid.size() - 1);
        s_grid[i] = options.atoms_min * std::pow(options.atoms_max / options.atoms_min, f);
        double const v = problem.evaluate(s_grid[i], interp).value;
        if (v < best_value)
        {
            best_value = v;
            best = i;
        }
    }
    double const s_lo = s_grid[best > 0 ? best - 1 : 0];
    double const s_hi = s_grid[std::min(best + 1, s_grid.size() - 1)];
    auto exact = [&](double atoms) { return problem.exact(atoms); };
    double const s = golden_section_minimize(
        [&](double x) { return problem.evaluate(x, exact).value; }, s_lo, s_hi, 1e-13 * s_hi);
    auto const obj = problem.evaluate(s, exact);

    CalibrationFit fit;
    fit.scale_atoms = s / problem.f_max();
    fit.scale_photons = obj.scale_photons;
    fit.residual = std::sqrt(obj.value);
    fit.points = raw_points.size();
    if (!(fit.scale_photons > 0))
    {
        throw NonIdentifiable("calibration found no positive photon scale");
    }
    for (double j : problem.table().jumps)
    {
        if (j >= fit.scale_atoms * f_lo && j <= fit.scale_atoms * f_hi)
        {
            ++fit.jumps_in_range;
        }
    }
    if (fit.jumps_in_range == 0)
    {
        throw NonIdentifiable("no predicted quantum jump lies inside the calibrated atom range");
    }

    // Gauss-Newton covariance from the local branch slope
    double h00 = 0, h01 = 0, h11 = 0;
    for (auto const& p : raw_points)
    {
        double const atoms = fit.scale_atoms * p.fluorescence;
        double const step = 1e-4 * atoms;
        double const up = problem.exact(atoms + step);
        double const down = problem.exact(atoms - step);
        double slope = (up - down) / (2 * step);
        if (std::abs(up - down) > 0.05 * std::max(1.0, std::abs(up)))
        {
            slope = 0;  // straddles a jump
        }
        double const w = problem.weight(atoms);
        double const b = fit.scale_photons;
        double const ja = -slope * p.fluorescence / b;
        double const jb = problem.exact(atoms) / (b * b);
        h00 += w * ja * ja;
        h01 += w * ja * jb;
        h11 += w * jb * jb;
    }
    double const sigma2 = obj.value / static_cast<double>(raw_points.size() - 2);
    double const det = h00 * h11 - h01 * h01;
    if (det > 0)
    {
        fit.covariance[0] = sigma2 * h11 / det;
        fit.covariance[1] = fit.covariance[2] = -sigma2 * h01 / det;
        fit.covariance[3] = sigma2 * h00 / det;
    }
    return fit;
}

}  // namespace microlaser
