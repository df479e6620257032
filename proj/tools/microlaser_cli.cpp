// Command-line front end: one subcommand per module, CSV and JSON outputs
// plus a manifest in the output directory.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "microlaser/calibration.hpp"
#include "microlaser/error.hpp"
#include "microlaser/extended.hpp"
#include "microlaser/hbt.hpp"
#include "microlaser/io.hpp"
#include "microlaser/qmt.hpp"
#include "microlaser/qts.hpp"
#include "microlaser/scan.hpp"

namespace fs = std::filesystem;
using namespace microlaser;

namespace {

struct Common
{
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
};

struct HbtFlags
{
    std::optional<double> bin_width;
    std::optional<double> max_lag;
    std::vector<double> deadtimes;
    std::vector<double> efficiency;
    std::vector<std::string> inputs;
    std::optional<double> n_mean;
    std::optional<double> span;
};

class Run
{
  public:
    Run(const Common& common, std::string command)
        : common_(common), start_(std::chrono::steady_clock::now())
    {
        manifest_.command = std::move(command);
        config_ = common.config_path.empty() ? parse_config("{}") : load_config(common.config_path);
        if (common.seed)
        {
            config_.seed = *common.seed;
        }
        if (common.threads)
        {
            config_.threads = *common.threads;
        }
        manifest_.config_hash = config_.hash();
        manifest_.seed = config_.seed;
        manifest_.threads = config_.threads;
        out_ = common.out_dir;
        fs::create_directories(out_);
    }

    RunConfig& config() { return config_; }

    fs::path file(const std::string& name)
    {
        manifest_.files.push_back(name);
        return out_ / name;
    }

    void note(const std::string& key, const std::string& value)
    {
        manifest_.notes.emplace_back(key, value);
    }

    void set_experiment(const std::string& tag) { manifest_.experiment = tag; }

    void finish()
    {
        manifest_.wall_time
            = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_manifest(out_ / "manifest.json", manifest_);
    }

  private:
    const Common& common_;
    RunConfig config_;
    fs::path out_;
    Manifest manifest_;
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

//---------------------------------------------------------------------------//

void cmd_qmt(const Common& common)
{
    Run run(common, "qmt");
    auto const& cfg = run.config();
    auto const dist = cfg.distribution();
    auto const stats = steady_state_distribution(cfg.params, dist);
    std::optional<OperatingPoint> op;
    if (cfg.params.r > 0)
    {
        op = select_operating_branch(cfg.params, dist);
    }
    write_distribution_csv(run.file("distribution.csv"), stats);
    write_statistics_json(run.file("summary.json"), stats, op, cfg.params.gamma_c);

    auto const branches = fixed_point_branches(cfg.params, dist);
    std::ofstream out(run.file("branches.csv"));
    out << "n0,stable,restoring_rate\n";
    for (auto const& b : branches)
    {
        out << fmt(b.n0) << ',' << (b.stable ? 1 : 0) << ',' << fmt(b.restoring_rate) << '\n';
    }
    run.finish();
}

void cmd_alpha(const Common& common, const std::string& points_csv)
{
    Run run(common, "alpha");
    auto& cfg = run.config();
    auto const dist = cfg.distribution();
    double const dv = cfg.params.dv_over_v0;

    if (cfg.alpha.eta && points_csv.empty() && cfg.alpha.thetas.empty())
    {
        // evaluate the correction at the configured operating point
        auto const terms = alpha_terms(cfg.params, dist);
        double const a_exact = alpha_exact(cfg.params, dist, *cfg.alpha.eta);
        double const a_quad = alpha_quadratic(terms.q_qmt, *cfg.alpha.eta);
        double const tau = cfg.params.gamma_c_t_int();
        nlohmann::ordered_json j;
        j["n0"] = terms.n0;
        j["q_qmt"] = terms.q_qmt;
        j["bracket"] = terms.bracket;
        j["eta"] = *cfg.alpha.eta;
        j["alpha_exact"] = a_exact;
        j["alpha_quadratic"] = a_quad;
        j["gamma_c_t_int"] = tau;
        j["q0_exact"] = corrected_q(terms.q_qmt, a_exact, tau);
        j["q0_quadratic"] = corrected_q(terms.q_qmt, a_quad, tau);
        std::ofstream(run.file("alpha.json")) << j.dump(2) << '\n';
        run.finish();
        return;
    }

    std::vector<AlphaPoint> points;
    if (!points_csv.empty())
    {
        points = read_alpha_points_csv(points_csv);
    }
    else
    {
        if (cfg.alpha.thetas.empty() || cfg.qts.gamma_c_t_int_values.size() < 3)
        {
            throw InvalidArgument(
                "alpha needs alpha.thetas and at least 3 qts.gamma_c_t_int_values (or --points)");
        }
        EnsembleOptions opts{cfg.qts.trajectories, cfg.threads};
        std::size_t index = 0;
        for (double theta : cfg.alpha.thetas)
        {
            auto base = make_trajectory_config(cfg.alpha.n_ex, theta, cfg.qts.gamma_c_t_int_values.front(), dv,
                                               cfg.qts.duration_gamma, cfg.qts.burn_in_gamma,
                                               derive_seed(cfg.seed, index++));
            base.dist = cfg.velocity.build(base.params);
            base.max_simultaneous_atoms = cfg.qts.max_simultaneous_atoms;
            base.include_atomic_decay = cfg.qts.include_atomic_decay;
            base.n_max = cfg.qts.n_max;
            auto const slope = alpha_slope_scan(base, cfg.qts.gamma_c_t_int_values, opts);
            double const q = mandel_q_linearized(base.params, base.dist);
            points.push_back({q, slope.alpha, slope.alpha_err});
        }
        write_alpha_points_csv(run.file("alpha_points.csv"), points);
    }

    std::vector<double> dense;
    for (double th = 0.5; th <= 5.0 + 1e-12; th += 0.025)
    {
        dense.push_back(th);
    }
    auto const brackets = bracket_curve(cfg.alpha.n_ex, dense, dv);
    auto const model = fit_eta(points, brackets, dv, cfg.alpha.n_ex);
    write_alpha_model_json(run.file("alpha_model.json"), model);
    run.finish();
}

void cmd_qts(const Common& common)
{
    Run run(common, "qts");
    auto& cfg = run.config();
    auto const tcfg = cfg.trajectory_config();
    if (cfg.qts.gamma_c_t_int_values.size() >= 3)
    {
        auto const slope = alpha_slope_scan(tcfg, cfg.qts.gamma_c_t_int_values,
                                            {cfg.qts.trajectories, cfg.threads});
        write_slope_json(run.file("slope.json"), slope);
    }
    auto const records = run_ensemble(tcfg, cfg.qts.trajectories, cfg.threads);
    auto const stats = ensemble_statistics(records, tcfg.burn_in);
    write_ensemble_json(run.file("ensemble.json"), stats, records);
    for (std::size_t i = 0; i < records.size(); ++i)
    {
        write_trajectory_csv(run.file("trajectory_" + std::to_string(i) + ".csv"), records[i]);
        TimestampStream s;
        s.times = records[i].emission_timestamps;
        write_timestamps(run.file("timestamps_" + std::to_string(i) + ".txt"), s);
    }
    run.note("ensemble_size", std::to_string(cfg.qts.trajectories));
    run.finish();
}

void cmd_hbt(const Common& common, const HbtFlags& flags)
{
    Run run(common, "hbt");
    auto& cfg = run.config();
    double const gamma_c = cfg.params.gamma_c;

    std::vector<TimestampStream> sources;
    double n_mean = flags.n_mean.value_or(0.0);
    if (!flags.inputs.empty())
    {
        for (auto const& path : flags.inputs)
        {
            sources.push_back(read_timestamps(path, flags.span));
        }
    }
    else
    {
        auto const tcfg = cfg.trajectory_config();
        auto const records = run_ensemble(tcfg, cfg.qts.trajectories, cfg.threads);
        auto const stats = ensemble_statistics(records, tcfg.burn_in);
        if (!flags.n_mean)
        {
            n_mean = stats.n_mean;
        }
        for (auto const& r : records)
        {
            sources.push_back(stream_from_record(r));
        }
        write_ensemble_json(run.file("ensemble.json"), stats, records);
    }
    if (!(n_mean > 0))
    {
        throw InvalidArgument("hbt needs --n-mean when reading timestamps from files");
    }

    double const eff_1 = flags.efficiency.size() == 2 ? flags.efficiency[0] : cfg.hbt.efficiency_1;
    double const eff_2 = flags.efficiency.size() == 2 ? flags.efficiency[1] : cfg.hbt.efficiency_2;
    double const bin_width = flags.bin_width.value_or(cfg.hbt.bin_width_gamma / gamma_c);
    double const max_lag = flags.max_lag.value_or(cfg.hbt.max_lag_gamma / gamma_c);

    Rng rng(derive_seed(cfg.seed, 0x4b7));
    std::vector<TimestampStream> ch1;
    std::vector<TimestampStream> ch2;
    for (auto const& s : sources)
    {
        auto [a, b] = split_stream(s, eff_1, eff_2, rng);
        ch1.push_back(std::move(a));
        ch2.push_back(std::move(b));
    }
    auto const curve = correlate(ch1, ch2, bin_width, max_lag);
    auto const fit = fit_g2(curve, n_mean);
    write_correlation_csv(run.file("g2.csv"), curve);

    std::vector<double> deadtimes = flags.deadtimes;
    if (deadtimes.empty())
    {
        for (double d : cfg.hbt.deadtimes_gamma)
        {
            deadtimes.push_back(d / gamma_c);
        }
    }
    if (deadtimes.empty())
    {
        deadtimes = default_deadtime_grid(fit.tau);
    }

    std::vector<std::pair<DeadtimePoint, G2Fit>> sweep;
    std::vector<DeadtimePoint> points;
    for (double d : deadtimes)
    {
        std::vector<TimestampStream> d1;
        std::vector<TimestampStream> d2;
        for (std::size_t i = 0; i < ch1.size(); ++i)
        {
            d1.push_back(impose_deadtime(ch1[i], d));
            d2.push_back(impose_deadtime(ch2[i], d));
        }
        auto const f = fit_g2(correlate(d1, d2, bin_width, max_lag), n_mean, fit.tau);
        DeadtimePoint p{d, f.g2_zero, f.q_over_n_err};
        points.push_back(p);
        sweep.emplace_back(p, f);
    }
    std::optional<DeadtimeExtrapolation> extrapolation;
    if (points.size() >= 4)
    {
        extrapolation = extrapolate_deadtime_free(points);
    }
    write_g2_json(run.file("g2_fit.json"), fit, sweep, extrapolation);
    run.finish();
}

void cmd_calibrate(const Common& common, std::string raw_csv)
{
    Run run(common, "calibrate");
    auto& cfg = run.config();
    auto const dist = cfg.distribution();
    auto const grid = cfg.scan.spec.atoms.values();
    auto const curve = predict_io_curve(cfg.params, dist, grid);
    write_io_curve_csv(run.file("io_curve.csv"), curve);
    if (raw_csv.empty())
    {
        raw_csv = cfg.calibration.raw_counts;
    }
    if (!raw_csv.empty())
    {
        auto const raw = read_raw_counts_csv(raw_csv);
        auto const fit = fit_calibration(raw, cfg.params, dist, cfg.calibration.options);
        write_calibration_json(run.file("calibration.json"), fit);
    }
    std::string jumps;
    for (double j : curve.jumps)
    {
        jumps += (jumps.empty() ? "" : " ") + fmt(j);
    }
    run.note("jumps", jumps);
    run.finish();
}

void cmd_scan(const Common& common, const std::string& experiment)
{
    Run run(common, "scan");
    auto& cfg = run.config();
    if (!experiment.empty())
    {
        cfg.scan.spec.tag = parse_experiment_tag(experiment);
    }
    cfg.scan.spec.validate();
    auto const tag = cfg.scan.spec.tag;
    run.set_experiment(to_string(tag));
    auto const& spec = cfg.scan.spec;

    switch (tag)
    {
        case ExperimentTag::fig2a:
        case ExperimentTag::fig2b:
            throw InvalidArgument("fig2 experiments run through the 'qts' and 'alpha' subcommands");
        case ExperimentTag::fig3b:
        {
            auto const surface = q_surface(cfg.params, spec.speed.values(), spec.atoms.values(),
                                           cfg.scan.correction);
            write_surface_csv(run.file("surface.csv"), surface);
            std::vector<SurfaceRow> valley = surface_valley(surface);
            write_surface_csv(run.file("surface_valley.csv"), valley);
            break;
        }
        case ExperimentTag::fig4b:
        {
            auto const curve = predict_io_curve(cfg.params, cfg.distribution(), spec.atoms.values());
            write_io_curve_csv(run.file("io_curve.csv"), curve);
            break;
        }
        case ExperimentTag::fig5:
        {
            auto const rows = valley_scan(cfg.params, spec.speed.values(), cfg.scan.valley,
                                          cfg.scan.correction);
            write_valley_csv(run.file("valley.csv"), rows);
            break;
        }
        case ExperimentTag::fig3a:
        case ExperimentTag::custom:
        {
            auto const rows = q_vs_n_trace(cfg.params, cfg.distribution(), spec.atoms.values(),
                                           cfg.scan.correction);
            write_trace_csv(run.file("trace.csv"), rows);
            break;
        }
    }
    run.finish();
}

void add_common(CLI::App* app, Common& common)
{
    app->add_option("--config", common.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app->add_option("--out", common.out_dir, "output directory");
    app->add_option("--seed", common.seed, "override the configured seed");
    app->add_option("--threads", common.threads, "worker threads for trajectory ensembles");
}

int report(const std::string& code, const std::string& message, int status)
{
    nlohmann::ordered_json j;
    j["error"] = code;
    j["message"] = message;
    std::cerr << j.dump() << '\n';
    return status;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Microlaser photon-statistics toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());

    Common common;
    HbtFlags hbt;
    std::string points_csv;
    std::string raw_csv;
    std::string experiment;

    auto* qmt = app.add_subcommand("qmt", "steady-state photon statistics and fixed points");
    add_common(qmt, common);
    auto* alpha = app.add_subcommand("alpha", "fit or evaluate the cavity-damping correction");
    add_common(alpha, common);
    alpha->add_option("--points", points_csv, "CSV of (q_qmt, alpha[, alpha_err]) instead of running trajectories");
    auto* qts = app.add_subcommand("qts", "quantum-trajectory ensemble");
    add_common(qts, common);
    auto* hbt_cmd = app.add_subcommand("hbt", "simulated two-detector correlation measurement");
    add_common(hbt_cmd, common);
    hbt_cmd->add_option("--bin-width", hbt.bin_width, "histogram bin width (s)");
    hbt_cmd->add_option("--max-lag", hbt.max_lag, "largest delay (s)");
    hbt_cmd->add_option("--deadtime", hbt.deadtimes, "deadtimes to sweep (s)");
    hbt_cmd->add_option("--efficiency", hbt.efficiency, "detector efficiencies eff_1 eff_2")->expected(2);
    hbt_cmd->add_option("--input", hbt.inputs, "timestamp files, one time per line");
    hbt_cmd->add_option("--span", hbt.span, "acquisition span of the input files (s)");
    hbt_cmd->add_option("--n-mean", hbt.n_mean, "mean intracavity photon number for Q");
    auto* cal = app.add_subcommand("calibrate", "input-output curve and count-scale calibration");
    add_common(cal, common);
    cal->add_option("--raw", raw_csv, "CSV of (fluorescence_counts, output_counts)");
    auto* scan = app.add_subcommand("scan", "figure-style parameter scans");
    add_common(scan, common);
    scan->add_option("--experiment", experiment, "fig3a | fig3b | fig4b | fig5 | custom");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        if (e.get_exit_code() == 0)
        {
            return app.exit(e);
        }
        return report("usage", e.what(), 64);
    }

    try
    {
        if (*qmt)
            cmd_qmt(common);
        else if (*alpha)
            cmd_alpha(common, points_csv);
        else if (*qts)
            cmd_qts(common);
        else if (*hbt_cmd)
            cmd_hbt(common, hbt);
        else if (*cal)
            cmd_calibrate(common, raw_csv);
        else if (*scan)
            cmd_scan(common, experiment);
    }
    catch (const Error& e)
    {
        return report(e.code(), e.what(), 1);
    }
    catch (const std::exception& e)
    {
        return report("internal", e.what(), 2);
    }
    return 0;
}
