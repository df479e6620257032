#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "microlaser/calibration.hpp"
#include "microlaser/extended.hpp"
#include "microlaser/hbt.hpp"
#include "microlaser/params.hpp"
#include "microlaser/qmt.hpp"
#include "microlaser/qts.hpp"
#include "microlaser/scan.hpp"

namespace microlaser {

//! Library version string, also written into every manifest.
const char* version_string();

struct VelocitySettings
{
    VelocityShape shape = VelocityShape::gaussian;
    std::size_t nodes = VelocityDistribution::default_nodes;
    double truncation_fwhm = VelocityDistribution::default_truncation_fwhm;

    VelocityDistribution build(const MicrolaserParams& params) const;
};

struct QtsSettings
{
    std::size_t trajectories = 8;
    double duration_gamma = 1000;  //!< in units of 1 / gamma_c
    double burn_in_gamma = 20;
    double sample_interval_gamma = 0;  //!< 0 selects 0.1
    std::size_t n_max = 0;
    std::size_t max_simultaneous_atoms = 3;
    bool include_atomic_decay = false;
    std::size_t initial_photons = 0;
    std::vector<double> gamma_c_t_int_values;  //!< for slope scans
};

struct HbtSettings
{
    double bin_width_gamma = 0.05;  //!< in units of 1 / gamma_c
    double max_lag_gamma = 6;
    std::vector<double> deadtimes_gamma;  //!< empty selects the default grid
    double efficiency_1 = 0.5;
    double efficiency_2 = 0.5;
};

struct AlphaSettings
{
    double n_ex = 15;
    std::vector<double> thetas;
    std::optional<double> eta;  //!< set to skip fitting and evaluate the model
};

struct ScanSettings
{
    ScanSpec spec;
    CorrectionModel correction;
    ValleyOptions valley;
};

struct CalibrationSettings
{
    std::string raw_counts;  //!< CSV path (fluorescence_counts, output_counts)
    CalibrationOptions options;
};

/*!
 * A parsed run configuration. `canonical` is the normalised JSON text used
 * for the configuration hash.
 */
struct RunConfig
{
    MicrolaserParams params;
    VelocitySettings velocity;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    QtsSettings qts;
    HbtSettings hbt;
    AlphaSettings alpha;
    ScanSettings scan;
    CalibrationSettings calibration;
    std::string canonical;

    VelocityDistribution distribution() const { return velocity.build(params); }
    std::uint64_t hash() const;
    TrajectoryConfig trajectory_config() const;
};

//! Parse a JSON configuration. Unknown keys are rejected.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

//---------------------------------------------------------------------------//
// Writers and readers. All numbers are written with 17 significant digits.
//---------------------------------------------------------------------------//

void write_distribution_csv(const std::filesystem::path& path, const PhotonStatistics& stats);
void write_statistics_json(const std::filesystem::path& path,
                           const PhotonStatistics& stats,
                           const std::optional<OperatingPoint>& op = std::nullopt,
                           double gamma_c = 0);

void write_alpha_model_json(const std::filesystem::path& path, const AlphaModel& model);
void write_alpha_points_csv(const std::filesystem::path& path, const std::vector<AlphaPoint>& points);
std::vector<AlphaPoint> read_alpha_points_csv(const std::filesystem::path& path);

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& record);
void write_ensemble_json(const std::filesystem::path& path,
                         const EnsembleStatistics& stats,
                         const std::vector<TrajectoryRecord>& records);
void write_slope_json(const std::filesystem::path& path, const AlphaSlope& slope);

void write_timestamps(const std::filesystem::path& path, const TimestampStream& stream);
//! One time per line; `span` defaults to the last timestamp.
TimestampStream read_timestamps(const std::filesystem::path& path,
                                std::optional<double> span = std::nullopt);

void write_correlation_csv(const std::filesystem::path& path, const CorrelationCurve& curve);
void write_g2_json(const std::filesystem::path& path,
                   const G2Fit& fit,
                   const std::vector<std::pair<DeadtimePoint, G2Fit>>& sweep,
                   const std::optional<DeadtimeExtrapolation>& extrapolation);

void write_io_curve_csv(const std::filesystem::path& path, const IOCurve& curve);
void write_calibration_json(const std::filesystem::path& path, const CalibrationFit& fit);
std::vector<RawCountPoint> read_raw_counts_csv(const std::filesystem::path& path);

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows);
void write_surface_csv(const std::filesystem::path& path, const std::vector<SurfaceRow>& rows);
void write_valley_csv(const std::filesystem::path& path, const std::vector<ValleyRow>& rows);

struct Manifest
{
    std::string command;
    std::string experiment;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    double wall_time = 0;  //!< seconds; the only non-reproducible field
    std::vector<std::string> files;
    std::vector<std::pair<std::string, std::string>> notes;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

}  // namespace microlaser
