#include "microlaser/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "microlaser/error.hpp"
#include "microlaser/extended.hpp"
#include "microlaser/numerics.hpp"
#include "microlaser/qmt.hpp"

namespace microlaser {

namespace {

struct TagName
{
    ExperimentTag tag;
    const char* name;
};

constexpr TagName tag_names[] = {
    {ExperimentTag::fig2a, "fig2a"},
    {ExperimentTag::fig2b, "fig2b"},
    {ExperimentTag::fig3a, "fig3a"},
    {ExperimentTag::fig3b, "fig3b"},
    {ExperimentTag::fig4b, "fig4b"},
    {ExperimentTag::fig5, "fig5"},
    {ExperimentTag::custom, "custom"},
};

double apply_correction(double q_qmt, double gamma_c_t_int, const CorrectionModel& model)
{
    if (!model.enabled)
    {
        return q_qmt;
    }
    return corrected_q(q_qmt, alpha_quadratic(q_qmt, model.eta), gamma_c_t_int);
}

}  // namespace

std::string to_string(ExperimentTag tag)
{
    for (auto const& t : tag_names)
    {
        if (t.tag == tag)
        {
            return t.name;
        }
    }
    return "custom";
}

ExperimentTag parse_experiment_tag(const std::string& name)
{
    for (auto const& t : tag_names)
    {
        if (name == t.name)
        {
            return t.tag;
        }
    }
    throw InvalidArgument("unknown experiment tag '" + name + "'");
}

void Range::validate(const char* what) const
{
    if (!(hi > lo) || points < 2 || (log_spaced && !(lo > 0)))
    {
        throw InvalidArgument(std::string(what) + " range must satisfy lo < hi with at least 2 points");
    }
}

std::vector<double> Range::values() const
{
    std::vector<double> v(points);
    for (std::size_t i = 0; i < points; ++i)
    {
        double const f = points > 1 ? static_cast<double>(i) / static_cast<double>(points - 1) : 0.0;
        v[i] = log_spaced ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo);
    }
    return v;
}

void ScanSpec::validate() const
{
    atoms.validate("atom-number");
    speed.validate("speed");
    if (!(atoms.lo > 0) || !(speed.lo > 0))
    {
        throw InvalidArgument("scan ranges must be positive");
    }
}

std::vector<TraceRow> q_vs_n_trace(const MicrolaserParams& params_template,
                                   const VelocityDistribution& dist,
                                   std::span<const double> atoms_grid,
                                   const CorrectionModel& model)
{
    OperatingPointSolver solver(params_template, dist);
    double const tau = params_template.gamma_c_t_int();
    std::vector<TraceRow> rows;
    rows.reserve(atoms_grid.size());
    for (double atoms : atoms_grid)
    {
        if (!(atoms > 0))
        {
            throw InvalidArgument("atom numbers must be positive");
        }
        auto const op = solver.solve_mean_atom_number(atoms);
        TraceRow row;
        row.atoms = atoms;
        row.n_mean = op.branch.n0;
        row.q_qmt = op.q_linearized;
        row.q0 = apply_correction(op.q_linearized, tau, model);
        row.lobe = op.lobe;
        rows.push_back(row);
    }
    return rows;
}

std::vector<SurfaceRow> q_surface(const MicrolaserParams& params_template,
                                  std::span<const double> speeds,
                                  std::span<const double> atoms_grid,
                                  const CorrectionModel& model)
{
    std::vector<SurfaceRow> rows;
    rows.reserve(speeds.size() * atoms_grid.size());
    for (double v0 : speeds)
    {
        auto const params = params_template.with_speed(v0);
        auto const dist = VelocityDistribution::from_params(params);
        for (auto const& t : q_vs_n_trace(params, dist, atoms_grid, model))
        {
            rows.push_back({v0, t.atoms, t.n_mean, t.q_qmt, t.q0, t.lobe});
        }
    }
    return rows;
}

std::vector<SurfaceRow> surface_valley(std::span<const SurfaceRow> surface)
{
    std::vector<SurfaceRow> valley;
    for (auto const& row : surface)
    {
        if (valley.empty() || valley.back().v0 != row.v0)
        {
            valley.push_back(row);
        }
        else if (row.q0 < valley.back().q0)
        {
            valley.back() = row;
        }
    }
    return valley;
}

std::vector<ValleyRow> valley_scan(const MicrolaserParams& params_template,
                                   std::span<const double> speeds,
                                   const ValleyOptions& options,
                                   const CorrectionModel& model)
{
    if (!(options.atoms_min > 0) || !(options.atoms_max > options.atoms_min)
        || options.coarse_points < 3)
    {
        throw InvalidArgument("valley scan range is invalid");
    }
    double const inf = std::numeric_limits<double>::infinity();
    std::vector<ValleyRow> rows;
    for (double v0 : speeds)
    {
        auto const params = params_template.with_speed(v0);
        auto const dist = VelocityDistribution::from_params(params);
        OperatingPointSolver solver(params, dist);
        double const tau = params.gamma_c_t_int();

        auto q0_at = [&](double atoms) {
            auto const op = solver.solve_mean_atom_number(atoms);
            if (options.lobe >= 0 && op.lobe != options.lobe)
            {
                return inf;
            }
            return apply_correction(op.q_linearized, tau, model);
        };

        std::vector<double> grid(options.coarse_points);
        std::size_t best = 0;
        double best_q = inf;
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
            double const f = static_cast<double>(i) / static_cast<double>(grid.size() - 1);
            grid[i] = options.atoms_min * std::pow(options.atoms_max / options.atoms_min, f);
            double const q = q0_at(grid[i]);
            if (q < best_q)
            {
                best_q = q;
                best = i;
            }
        }
        if (!std::isfinite(best_q))
        {
            throw NoStableBranch("valley scan: no operating point on the requested lobe");
        }
        double const lo = grid[best > 0 ? best - 1 : 0];
        double const hi = grid[std::min(best + 1, grid.size() - 1)];
        double atoms = golden_section_minimize(q0_at, lo, hi, 1e-6 * hi);
        if (!(q0_at(atoms) <= best_q))
        {
            atoms = grid[best];
        }

        auto const op = solver.solve_mean_atom_number(atoms);
        ValleyRow row;
        row.v0 = v0;
        row.atoms = atoms;
        row.n_mean = op.branch.n0;
        row.q_qmt = op.q_linearized;
        row.q0 = apply_correction(op.q_linearized, tau, model);
        row.delta_theta = validity_check(params, row.n_mean).delta_theta;
        rows.push_back(row);
    }
    return rows;
}

Validity validity_check(const MicrolaserParams& params, double n_mean)
{
    if (!(n_mean >= 0))
    {
        throw InvalidArgument("validity_check needs n_mean >= 0");
    }
    Validity v;
    v.delta_theta = params.g * params.interaction_time() / (2.0 * std::sqrt(n_mean + 1.0));
    v.valid = v.delta_theta < validity_threshold;
    return v;
}

}  // namespace microlaser
