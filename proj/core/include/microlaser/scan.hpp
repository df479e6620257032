#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "microlaser/params.hpp"

namespace microlaser {

enum class ExperimentTag
{
    fig2a,
    fig2b,
    fig3a,
    fig3b,
    fig4b,
    fig5,
    custom
};

std::string to_string(ExperimentTag tag);
//! Throws InvalidArgument for an unknown name.
ExperimentTag parse_experiment_tag(const std::string& name);

struct Range
{
    double lo = 0;
    double hi = 0;
    std::size_t points = 2;
    bool log_spaced = false;

    void validate(const char* what) const;
    std::vector<double> values() const;
};

struct ScanSpec
{
    ExperimentTag tag = ExperimentTag::custom;
    Range atoms{10, 1300, 200};   //!< mean atom number <N>
    Range speed{500, 2000, 16};   //!< v0 (m/s)
    std::uint64_t seed = 0;
    std::string output_dir = ".";

    void validate() const;
};

struct CorrectionModel
{
    double eta = 1.84;
    bool enabled = true;  //!< false: Q0 = Q_QMT (gamma_c t_int -> 0 limit)
};

struct TraceRow
{
    double atoms = 0;
    double n_mean = 0;        //!< selected branch n0
    double q_qmt = 0;         //!< linearised QMT value
    double q0 = 0;            //!< q_qmt + eta q_qmt^2 gamma_c t_int
    int lobe = 0;
};

//! Q vs <n> along an <N> sweep at fixed speed, using the quadratic alpha.
std::vector<TraceRow> q_vs_n_trace(const MicrolaserParams& params_template,
                                   const VelocityDistribution& dist,
                                   std::span<const double> atoms_grid,
                                   const CorrectionModel& model = {});

struct SurfaceRow
{
    double v0 = 0;
    double atoms = 0;
    double n_mean = 0;
    double q_qmt = 0;
    double q0 = 0;
    int lobe = 0;
};

/*!
 * Q0 over (v0, <N>). The velocity width keeps params_template.dv_over_v0 at
 * each speed. Rows are ordered by v0, then <N>.
 */
std::vector<SurfaceRow> q_surface(const MicrolaserParams& params_template,
                                  std::span<const double> speeds,
                                  std::span<const double> atoms_grid,
                                  const CorrectionModel& model = {});

//! Minimum-Q0 row per speed of a q_surface table.
std::vector<SurfaceRow> surface_valley(std::span<const SurfaceRow> surface);

struct ValleyRow
{
    double v0 = 0;
    double atoms = 0;
    double n_mean = 0;
    double q_qmt = 0;
    double q0 = 0;
    double delta_theta = 0;
};

struct ValleyOptions
{
    double atoms_min = 10;
    double atoms_max = 3000;
    std::size_t coarse_points = 120;
    int lobe = 0;  //!< restrict to this Rabi lobe; negative for any
};

/*!
 * Per speed, the <N> minimising Q0: a log-spaced coarse grid brackets the
 * minimum, then golden-section search refines it to 1e-6 relative.
 */
std::vector<ValleyRow> valley_scan(const MicrolaserParams& params_template,
                                   std::span<const double> speeds,
                                   const ValleyOptions& options = {},
                                   const CorrectionModel& model = {});

struct Validity
{
    double delta_theta = 0;
    bool valid = false;
};

inline constexpr double validity_threshold = 0.05;

//! Rabi-angle step between neighbouring photon numbers,
//! g t_int / (2 sqrt(n + 1)); valid when below 0.05.
Validity validity_check(const MicrolaserParams& params, double n_mean);

}  // namespace microlaser
