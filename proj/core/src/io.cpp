#include "microlaser/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "microlaser/error.hpp"
#include "microlaser/numerics.hpp"

namespace microlaser {

using nlohmann::ordered_json;

const char* version_string()
{
    return "0.1.0";
}

namespace {

class IoError : public Error
{
  public:
    explicit IoError(const std::string& what) : Error("io", what) {}
};

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string hex64(std::uint64_t x)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path())
    {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw IoError("cannot open '" + path.string() + "'");
    }
    return in;
}

void write_json(const std::filesystem::path& path, const ordered_json& j)
{
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

// Numbers go through %.17g so files are byte-stable across runs.
ordered_json num(double x)
{
    if (!std::isfinite(x))
    {
        return nullptr;
    }
    return ordered_json::parse(fmt(x));
}

ordered_json num_array(const std::vector<double>& v)
{
    auto a = ordered_json::array();
    for (double x : v)
    {
        a.push_back(num(x));
    }
    return a;
}

//---------------------------------------------------------------------------//
// Config parsing
//---------------------------------------------------------------------------//

class Section
{
  public:
    Section(const ordered_json& j, std::string name) : j_(j), name_(std::move(name))
    {
        if (!j_.is_object())
        {
            throw InvalidArgument("config section '" + name_ + "' must be an object");
        }
    }

    ~Section() = default;

    void finish(std::initializer_list<const char*> extra = {}) const
    {
        std::set<std::string> known = seen_;
        for (auto const* e : extra)
        {
            known.insert(e);
        }
        for (auto const& item : j_.items())
        {
            if (!known.count(item.key()))
            {
                throw InvalidArgument("unknown config key '" + name_ + "." + item.key() + "'");
            }
        }
    }

    bool has(const char* key)
    {
        seen_.insert(key);
        return j_.contains(key);
    }

    template <class T>
    void read(const char* key, T& value)
    {
        if (!has(key))
        {
            return;
        }
        try
        {
            value = j_.at(key).get<T>();
        }
        catch (const nlohmann::json::exception&)
        {
            throw InvalidArgument("config key '" + name_ + "." + key + "' has the wrong type");
        }
    }

    void read_optional(const char* key, std::optional<double>& value)
    {
        if (has(key))
        {
            double v = 0;
            read(key, v);
            value = v;
        }
    }

    const ordered_json& at(const char* key) const { return j_.at(key); }

  private:
    const ordered_json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

void read_range(Section& parent, const char* key, Range& range)
{
    if (!parent.has(key))
    {
        return;
    }
    Section s(parent.at(key), key);
    s.read("lo", range.lo);
    s.read("hi", range.hi);
    s.read("points", range.points);
    s.read("log", range.log_spaced);
    s.finish();
}

ordered_json range_json(const Range& r)
{
    return {{"lo", num(r.lo)}, {"hi", num(r.hi)}, {"points", r.points}, {"log", r.log_spaced}};
}

ordered_json canonical_json(const RunConfig& c)
{
    ordered_json j;
    auto const& p = c.params;
    j["params"] = {{"g", num(p.g)},
                   {"gamma_c", num(p.gamma_c)},
                   {"gamma_a", num(p.gamma_a)},
                   {"w0", num(p.w0)},
                   {"v0", num(p.v0)},
                   {"dv_over_v0", num(p.dv_over_v0)},
                   {"r", num(p.r)}};
    j["velocity"] = {{"shape", c.velocity.shape == VelocityShape::delta ? "delta" : "gaussian"},
                     {"nodes", c.velocity.nodes},
                     {"truncation_fwhm", num(c.velocity.truncation_fwhm)}};
    auto const& q = c.qts;
    j["qts"] = {{"trajectories", q.trajectories},
                {"duration_gamma", num(q.duration_gamma)},
                {"burn_in_gamma", num(q.burn_in_gamma)},
                {"sample_interval_gamma", num(q.sample_interval_gamma)},
                {"n_max", q.n_max},
                {"max_simultaneous_atoms", q.max_simultaneous_atoms},
                {"include_atomic_decay", q.include_atomic_decay},
                {"initial_photons", q.initial_photons},
                {"gamma_c_t_int_values", num_array(q.gamma_c_t_int_values)}};
    auto const& h = c.hbt;
    j["hbt"] = {{"bin_width_gamma", num(h.bin_width_gamma)},
                {"max_lag_gamma", num(h.max_lag_gamma)},
                {"deadtimes_gamma", num_array(h.deadtimes_gamma)},
                {"efficiency", {num(h.efficiency_1), num(h.efficiency_2)}}};
    j["alpha"] = {{"n_ex", num(c.alpha.n_ex)},
                  {"thetas", num_array(c.alpha.thetas)},
                  {"eta", c.alpha.eta ? num(*c.alpha.eta) : ordered_json(nullptr)}};
    auto const& s = c.scan;
    j["scan"] = {{"experiment", to_string(s.spec.tag)},
                 {"atoms", range_json(s.spec.atoms)},
                 {"speed", range_json(s.spec.speed)},
                 {"eta", num(s.correction.eta)},
                 {"correction", s.correction.enabled},
                 {"valley_atoms_min", num(s.valley.atoms_min)},
                 {"valley_atoms_max", num(s.valley.atoms_max)},
                 {"valley_points", s.valley.coarse_points},
                 {"valley_lobe", s.valley.lobe}};
    j["calibration"] = {{"raw_counts", c.calibration.raw_counts},
                        {"atoms_min", num(c.calibration.options.atoms_min)},
                        {"atoms_max", num(c.calibration.options.atoms_max)},
                        {"coarse_points", c.calibration.options.coarse_points}};
    j["seed"] = c.seed;
    return j;
}

}  // namespace

VelocityDistribution VelocitySettings::build(const MicrolaserParams& params) const
{
    if (shape == VelocityShape::delta || params.dv_over_v0 == 0)
    {
        return VelocityDistribution::delta(params.v0);
    }
    return VelocityDistribution::gaussian(
        params.v0, params.dv_over_v0 * params.v0, nodes, truncation_fwhm);
}

std::uint64_t RunConfig::hash() const
{
    return fnv1a64(canonical);
}

TrajectoryConfig RunConfig::trajectory_config() const
{
    TrajectoryConfig t;
    t.params = params;
    t.dist = distribution();
    t.n_max = qts.n_max;
    t.max_simultaneous_atoms = qts.max_simultaneous_atoms;
    t.duration = qts.duration_gamma / params.gamma_c;
    t.burn_in = qts.burn_in_gamma / params.gamma_c;
    t.sample_interval = qts.sample_interval_gamma / params.gamma_c;
    t.seed = seed;
    t.include_atomic_decay = qts.include_atomic_decay;
    t.initial_photons = qts.initial_photons;
    return t;
}

RunConfig parse_config(const std::string& json_text)
{
    ordered_json root;
    try
    {
        root = ordered_json::parse(json_text);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    Section top(root, "config");

    if (top.has("params") && top.has("dimensionless"))
    {
        throw InvalidArgument("config may give 'params' or 'dimensionless', not both");
    }
    if (top.has("params"))
    {
        Section s(top.at("params"), "params");
        auto& p = c.params;
        s.read("g", p.g);
        s.read("gamma_c", p.gamma_c);
        s.read("gamma_a", p.gamma_a);
        double hz = 0;
        if (s.has("g_over_2pi")) { s.read("g_over_2pi", hz); p.g = two_pi * hz; }
        if (s.has("gamma_c_over_2pi")) { s.read("gamma_c_over_2pi", hz); p.gamma_c = two_pi * hz; }
        if (s.has("gamma_a_over_2pi")) { s.read("gamma_a_over_2pi", hz); p.gamma_a = two_pi * hz; }
        s.read("w0", p.w0);
        s.read("v0", p.v0);
        s.read("dv_over_v0", p.dv_over_v0);
        s.read("r", p.r);
        if (s.has("mean_atom_number"))
        {
            if (s.has("r") && s.at("r") != 0)
            {
                throw InvalidArgument("params may give 'r' or 'mean_atom_number', not both");
            }
            double atoms = 0;
            s.read("mean_atom_number", atoms);
            p = p.with_mean_atom_number(atoms);
        }
        if (s.has("n_ex"))
        {
            double n_ex = 0;
            s.read("n_ex", n_ex);
            p.r = n_ex * p.gamma_c;
        }
        s.finish();
    }
    if (top.has("dimensionless"))
    {
        Section s(top.at("dimensionless"), "dimensionless");
        double n_ex = 0, theta = 0, tau = 0, dv = 0, gamma_c = 1, w0 = 1;
        s.read("n_ex", n_ex);
        s.read("theta", theta);
        s.read("gamma_c_t_int", tau);
        s.read("dv_over_v0", dv);
        s.read("gamma_c", gamma_c);
        s.read("w0", w0);
        s.finish();
        c.params = MicrolaserParams::from_dimensionless(n_ex, theta, tau, dv, gamma_c, w0);
    }
    if (top.has("velocity"))
    {
        Section s(top.at("velocity"), "velocity");
        std::string shape = "gaussian";
        s.read("shape", shape);
        if (shape == "delta")
        {
            c.velocity.shape = VelocityShape::delta;
        }
        else if (shape != "gaussian")
        {
            throw InvalidArgument("velocity.shape must be 'delta' or 'gaussian'");
        }
        s.read("nodes", c.velocity.nodes);
        s.read("truncation_fwhm", c.velocity.truncation_fwhm);
        s.finish();
    }
    top.read("seed", c.seed);
    top.read("threads", c.threads);
    if (top.has("qts"))
    {
        Section s(top.at("qts"), "qts");
        auto& q = c.qts;
        s.read("trajectories", q.trajectories);
        s.read("duration_gamma", q.duration_gamma);
        s.read("burn_in_gamma", q.burn_in_gamma);
        s.read("sample_interval_gamma", q.sample_interval_gamma);
        s.read("n_max", q.n_max);
        s.read("max_simultaneous_atoms", q.max_simultaneous_atoms);
        s.read("include_atomic_decay", q.include_atomic_decay);
        s.read("initial_photons", q.initial_photons);
        s.read("gamma_c_t_int_values", q.gamma_c_t_int_values);
        s.finish();
    }
    if (top.has("hbt"))
    {
        Section s(top.at("hbt"), "hbt");
        auto& h = c.hbt;
        s.read("bin_width_gamma", h.bin_width_gamma);
        s.read("max_lag_gamma", h.max_lag_gamma);
        s.read("deadtimes_gamma", h.deadtimes_gamma);
        if (s.has("efficiency"))
        {
            std::vector<double> eff;
            s.read("efficiency", eff);
            if (eff.size() != 2)
            {
                throw InvalidArgument("hbt.efficiency must hold two values");
            }
            h.efficiency_1 = eff[0];
            h.efficiency_2 = eff[1];
        }
        s.finish();
    }
    if (top.has("alpha"))
    {
        Section s(top.at("alpha"), "alpha");
        s.read("n_ex", c.alpha.n_ex);
        s.read("thetas", c.alpha.thetas);
        s.read_optional("eta", c.alpha.eta);
        s.finish();
    }
    if (top.has("scan"))
    {
        Section s(top.at("scan"), "scan");
        auto& sc = c.scan;
        if (s.has("experiment"))
        {
            std::string tag;
            s.read("experiment", tag);
            sc.spec.tag = parse_experiment_tag(tag);
        }
        read_range(s, "atoms", sc.spec.atoms);
        read_range(s, "speed", sc.spec.speed);
        s.read("eta", sc.correction.eta);
        s.read("correction", sc.correction.enabled);
        s.read("valley_atoms_min", sc.valley.atoms_min);
        s.read("valley_atoms_max", sc.valley.atoms_max);
        s.read("valley_points", sc.valley.coarse_points);
        s.read("valley_lobe", sc.valley.lobe);
        s.finish();
    }
    if (top.has("calibration"))
    {
        Section s(top.at("calibration"), "calibration");
        s.read("raw_counts", c.calibration.raw_counts);
        s.read("atoms_min", c.calibration.options.atoms_min);
        s.read("atoms_max", c.calibration.options.atoms_max);
        s.read("coarse_points", c.calibration.options.coarse_points);
        s.finish();
    }
    top.finish();

    c.params.validate();
    c.canonical = canonical_json(c).dump();
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    auto in = open_in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

//---------------------------------------------------------------------------//

void write_distribution_csv(const std::filesystem::path& path, const PhotonStatistics& stats)
{
    auto out = open_out(path);
    out << "n,p_n\n";
    for (std::size_t n = 0; n < stats.p.size(); ++n)
    {
        out << n << ',' << fmt(stats.p[n]) << '\n';
    }
}

void write_statistics_json(const std::filesystem::path& path,
                           const PhotonStatistics& stats,
                           const std::optional<OperatingPoint>& op,
                           double gamma_c)
{
    ordered_json j;
    j["n_mean"] = num(stats.n_mean);
    j["variance"] = num(stats.variance);
    j["mandel_q"] = num(stats.mandel_q);
    j["n_max"] = stats.n_max;
    if (gamma_c > 0)
    {
        j["output_flux"] = num(output_flux(stats, gamma_c));
    }
    if (op)
    {
        j["operating_point"] = {{"n0", num(op->branch.n0)},
                                {"restoring_rate", num(op->branch.restoring_rate)},
                                {"lobe", op->lobe},
                                {"stable_branches", op->stable_branches},
                                {"q_linearized", num(op->q_linearized)}};
    }
    write_json(path, j);
}

void write_alpha_model_json(const std::filesystem::path& path, const AlphaModel& model)
{
    ordered_json j;
    j["eta"] = num(model.eta);
    j["eta_err"] = num(model.eta_err);
    j["poly_coeffs"] = num_array(model.poly_coeffs);
    j["domain"] = {num(AlphaModel::domain_lo), num(AlphaModel::domain_hi)};
    j["dv_over_v0"] = num(model.dv_over_v0);
    j["n_ex"] = num(model.n_ex);
    j["points_used"] = model.points_used;
    j["reduced_chi2"] = num(model.reduced_chi2);
    write_json(path, j);
}

void write_alpha_points_csv(const std::filesystem::path& path, const std::vector<AlphaPoint>& points)
{
    auto out = open_out(path);
    out << "q_qmt,alpha,alpha_err\n";
    for (auto const& p : points)
    {
        out << fmt(p.q_qmt) << ',' << fmt(p.alpha) << ',' << fmt(p.alpha_err) << '\n';
    }
}

namespace {

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path,
                                                  std::size_t min_columns)
{
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty() || line[0] == '#')
        {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ','))
        {
            try
            {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            }
            catch (const std::exception&)
            {
                numeric = false;
                break;
            }
        }
        if (!numeric)
        {
            if (rows.empty())
            {
                continue;  // header
            }
            throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": not numeric");
        }
        if (row.size() < min_columns)
        {
            throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": too few columns");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<AlphaPoint> read_alpha_points_csv(const std::filesystem::path& path)
{
    std::vector<AlphaPoint> points;
    for (auto const& row : read_numeric_csv(path, 2))
    {
        points.push_back({row[0], row[1], row.size() > 2 ? row[2] : 0.0});
    }
    return points;
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& record)
{
    auto out = open_out(path);
    out << "# config_hash=" << hex64(record.config_hash) << " seed=" << record.seed
        << " gamma_c=" << fmt(record.gamma_c) << " duration=" << fmt(record.duration)
        << " burn_in=" << fmt(record.burn_in) << " atoms_injected=" << record.atoms_injected
        << " atoms_queued=" << record.atoms_queued << " emissions=" << record.emission_timestamps.size()
        << '\n';
    out << "t,n_mean,n2_mean\n";
    for (std::size_t i = 0; i < record.times.size(); ++i)
    {
        out << fmt(record.times[i]) << ',' << fmt(record.n_mean[i]) << ',' << fmt(record.n2_mean[i])
            << '\n';
    }
}

void write_ensemble_json(const std::filesystem::path& path,
                         const EnsembleStatistics& stats,
                         const std::vector<TrajectoryRecord>& records)
{
    ordered_json j;
    j["status"] = stats.status;
    j["n_mean"] = num(stats.n_mean);
    j["n_mean_err"] = num(stats.n_mean_err);
    j["variance"] = num(stats.variance);
    j["variance_err"] = num(stats.variance_err);
    j["mandel_q"] = num(stats.mandel_q);
    j["mandel_q_err"] = num(stats.mandel_q_err);
    j["emission_rate"] = num(stats.emission_rate);
    j["emission_rate_err"] = num(stats.emission_rate_err);
    j["blocks"] = stats.blocks;
    j["span"] = num(stats.span);
    auto t = ordered_json::array();
    for (auto const& r : records)
    {
        t.push_back({{"seed", r.seed},
                     {"atoms_injected", r.atoms_injected},
                     {"atoms_queued", r.atoms_queued},
                     {"atomic_decays", r.atomic_decays},
                     {"emissions", r.emission_timestamps.size()},
                     {"max_norm_error", num(r.max_norm_error)}});
    }
    j["trajectories"] = t;
    write_json(path, j);
}

void write_slope_json(const std::filesystem::path& path, const AlphaSlope& slope)
{
    ordered_json j;
    j["alpha"] = num(slope.alpha);
    j["alpha_err"] = num(slope.alpha_err);
    j["q_intercept"] = num(slope.q_intercept);
    j["q_intercept_err"] = num(slope.q_intercept_err);
    j["r_squared"] = num(slope.r_squared);
    j["reduced_chi2"] = num(slope.reduced_chi2);
    auto pts = ordered_json::array();
    for (auto const& p : slope.points)
    {
        pts.push_back({{"gamma_c_t_int", num(p.gamma_c_t_int)},
                       {"q", num(p.q)},
                       {"q_err", num(p.q_err)},
                       {"n_mean", num(p.n_mean)},
                       {"n_mean_err", num(p.n_mean_err)}});
    }
    j["points"] = pts;
    write_json(path, j);
}

void write_timestamps(const std::filesystem::path& path, const TimestampStream& stream)
{
    auto out = open_out(path);
    for (double t : stream.times)
    {
        out << fmt(t) << '\n';
    }
}

TimestampStream read_timestamps(const std::filesystem::path& path, std::optional<double> span)
{
    auto in = open_in(path);
    TimestampStream s;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty() || line[0] == '#')
        {
            continue;
        }
        try
        {
            s.times.push_back(std::stod(line));
        }
        catch (const std::exception&)
        {
            throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": not a number");
        }
    }
    s.span = span ? *span : (s.times.empty() ? 0.0 : s.times.back());
    s.validate();
    return s;
}

void write_correlation_csv(const std::filesystem::path& path, const CorrelationCurve& curve)
{
    auto out = open_out(path);
    out << "tau,g2,err,counts,expected\n";
    for (std::size_t k = 0; k < curve.size(); ++k)
    {
        out << fmt(curve.tau[k]) << ',' << fmt(curve.g2[k]) << ',' << fmt(curve.err[k]) << ','
            << fmt(curve.counts[k]) << ',' << fmt(curve.expected[k]) << '\n';
    }
}

namespace {

ordered_json g2_fit_json(const G2Fit& fit)
{
    return {{"g2_zero", num(fit.g2_zero)},
            {"tau", num(fit.tau)},
            {"tau_err", num(fit.tau_err)},
            {"q_over_n", num(fit.q_over_n)},
            {"q_over_n_err", num(fit.q_over_n_err)},
            {"q", num(fit.q)},
            {"q_err", num(fit.q_err)},
            {"covariance", {num(fit.covariance[0]), num(fit.covariance[1]),
                            num(fit.covariance[2]), num(fit.covariance[3])}},
            {"chi2", num(fit.chi2)},
            {"dof", fit.dof},
            {"tau_fixed", fit.tau_fixed}};
}

}  // namespace

void write_g2_json(const std::filesystem::path& path,
                   const G2Fit& fit,
                   const std::vector<std::pair<DeadtimePoint, G2Fit>>& sweep,
                   const std::optional<DeadtimeExtrapolation>& extrapolation)
{
    ordered_json j;
    j["fit"] = g2_fit_json(fit);
    auto s = ordered_json::array();
    for (auto const& [point, f] : sweep)
    {
        auto e = g2_fit_json(f);
        e["deadtime"] = num(point.deadtime);
        s.push_back(e);
    }
    j["deadtime_sweep"] = s;
    if (extrapolation)
    {
        j["deadtime_free"] = {{"g2_zero", num(extrapolation->g2_zero_free)},
                              {"err", num(extrapolation->err)},
                              {"linear", num(extrapolation->linear)},
                              {"quadratic", num(extrapolation->quadratic)},
                              {"reduced_chi2", num(extrapolation->reduced_chi2)}};
    }
    write_json(path, j);
}

void write_io_curve_csv(const std::filesystem::path& path, const IOCurve& curve)
{
    auto out = open_out(path);
    out << "N,n,branch\n";
    for (std::size_t i = 0; i < curve.atoms.size(); ++i)
    {
        out << fmt(curve.atoms[i]) << ',' << fmt(curve.photons[i]) << ',' << curve.branch[i] << '\n';
    }
}

void write_calibration_json(const std::filesystem::path& path, const CalibrationFit& fit)
{
    ordered_json j;
    j["scale_atoms"] = num(fit.scale_atoms);
    j["scale_photons"] = num(fit.scale_photons);
    j["residual"] = num(fit.residual);
    j["covariance"] = {num(fit.covariance[0]), num(fit.covariance[1]),
                       num(fit.covariance[2]), num(fit.covariance[3])};
    j["points"] = fit.points;
    j["jumps_in_range"] = fit.jumps_in_range;
    write_json(path, j);
}

std::vector<RawCountPoint> read_raw_counts_csv(const std::filesystem::path& path)
{
    std::vector<RawCountPoint> points;
    for (auto const& row : read_numeric_csv(path, 2))
    {
        points.push_back({row[0], row[1]});
    }
    return points;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows)
{
    auto out = open_out(path);
    out << "N,n,q_qmt,q0,lobe\n";
    for (auto const& r : rows)
    {
        out << fmt(r.atoms) << ',' << fmt(r.n_mean) << ',' << fmt(r.q_qmt) << ',' << fmt(r.q0)
            << ',' << r.lobe << '\n';
    }
}

void write_surface_csv(const std::filesystem::path& path, const std::vector<SurfaceRow>& rows)
{
    auto out = open_out(path);
    out << "v0,N,n,q_qmt,q0,lobe\n";
    for (auto const& r : rows)
    {
        out << fmt(r.v0) << ',' << fmt(r.atoms) << ',' << fmt(r.n_mean) << ',' << fmt(r.q_qmt)
            << ',' << fmt(r.q0) << ',' << r.lobe << '\n';
    }
}

void write_valley_csv(const std::filesystem::path& path, const std::vector<ValleyRow>& rows)
{
    auto out = open_out(path);
    out << "v0,N,n,q_qmt,q0,delta_theta\n";
    for (auto const& r : rows)
    {
        out << fmt(r.v0) << ',' << fmt(r.atoms) << ',' << fmt(r.n_mean) << ',' << fmt(r.q_qmt)
            << ',' << fmt(r.q0) << ',' << fmt(r.delta_theta) << '\n';
    }
}

void write_manifest(const std::filesystem::path& path, const Manifest& m)
{
    ordered_json j;
    j["command"] = m.command;
    j["experiment"] = m.experiment;
    j["config_hash"] = hex64(m.config_hash);
    j["seed"] = m.seed;
    j["threads"] = m.threads;
    j["version"] = version_string();
    j["modules"] = {{"theory-qmt", version_string()},
                    {"theory-extended", version_string()},
                    {"qts-engine", version_string()},
                    {"hbt-detection", version_string()},
                    {"calibration-io", version_string()},
                    {"cli-scan", version_string()}};
    j["wall_time_s"] = num(m.wall_time);
    j["files"] = m.files;
    auto notes = ordered_json::object();
    for (auto const& [k, v] : m.notes)
    {
        notes[k] = v;
    }
    j["notes"] = notes;
    write_json(path, j);
}

}  // namespace microlaser
