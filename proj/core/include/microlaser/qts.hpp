#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "microlaser/numerics.hpp"
#include "microlaser/params.hpp"

namespace microlaser {

/*!
 * Configuration of one quantum-trajectory run.
 *
 * Times are absolute (s). `n_max == 0` selects a cutoff from the steady-state
 * theory; `sample_interval == 0` samples every 0.1 / gamma_c.
 */
struct TrajectoryConfig
{
    MicrolaserParams params;
    VelocityDistribution dist = VelocityDistribution::delta(1.0);
    std::size_t n_max = 0;
    std::size_t max_simultaneous_atoms = 3;
    double duration = 0;
    double burn_in = 0;
    double sample_interval = 0;
    std::uint64_t seed = 0;
    bool include_atomic_decay = false;
    std::size_t initial_photons = 0;
    bool record_emissions = true;

    void validate() const;
    std::size_t effective_n_max() const;
    double effective_sample_interval() const;
    //! Stable hash of every field except the seed.
    std::uint64_t hash() const;
};

//! Config with params.r, g and v0 set from dimensionless controls and a
//! distribution matching params.dv_over_v0.
TrajectoryConfig make_trajectory_config(double n_ex,
                                        double theta,
                                        double gamma_c_t_int,
                                        double dv_over_v0,
                                        double duration_gamma,
                                        double burn_in_gamma,
                                        std::uint64_t seed);

/*!
 * Time series and emission record of one stochastic wave-function
 * trajectory. Moments are of the normalised conditional state at each
 * sample time.
 */
struct TrajectoryRecord
{
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    double gamma_c = 0;
    double duration = 0;
    double burn_in = 0;
    std::vector<double> times;
    std::vector<double> n_mean;
    std::vector<double> n2_mean;
    std::vector<double> emission_timestamps;
    //! <|c_n|^2> averaged over samples at t >= burn_in
    std::vector<double> photon_distribution;
    std::uint64_t atoms_injected = 0;
    std::uint64_t atoms_queued = 0;
    std::uint64_t atomic_decays = 0;
    std::uint64_t truncation_hits = 0;
    double max_norm_error = 0;
};

double sample_velocity(const VelocityDistribution& dist, Rng& rng);

/*!
 * Run one trajectory: Poissonian injection of excited atoms at rate r, each
 * staying for its own t_int(v); exact no-jump evolution under the
 * Jaynes-Cummings Hamiltonian with the cavity-decay (and optionally atomic
 * decay) anti-Hermitian term; quantum jumps at the waiting times; projective
 * energy measurement of each atom as it leaves.
 *
 * Throws TruncationError if the top Fock level is populated above 1e-8.
 */
TrajectoryRecord run_trajectory(const TrajectoryConfig& config);

//! Trajectory i uses seed derive_seed(config.seed, i). Records are returned
//! in index order regardless of thread scheduling.
std::vector<TrajectoryRecord> run_ensemble(const TrajectoryConfig& config,
                                           std::size_t trajectories,
                                           std::size_t threads = 1);

struct EnsembleStatistics
{
    std::string status = "ok";  //!< "ok" or "degenerate" (vacuum)
    double n_mean = 0;
    double variance = 0;
    double mandel_q = 0;
    double n_mean_err = 0;
    double variance_err = 0;
    double mandel_q_err = 0;
    double emission_rate = 0;      //!< emissions per second after burn-in
    double emission_rate_err = 0;
    std::size_t blocks = 0;
    double span = 0;               //!< total post-burn-in time (s)
};

/*!
 * Time-and-ensemble average of <n> and <n^2> after `burn_in`, with
 * jackknife errors over blocks (whole trajectories, split further so that
 * there are at least 16 blocks).
 *
 * Throws InsufficientData if any record has less than 50 / gamma_c of
 * post-burn-in samples.
 */
EnsembleStatistics ensemble_statistics(std::span<const TrajectoryRecord> records,
                                       double burn_in);

struct SlopePoint
{
    double gamma_c_t_int = 0;
    double q = 0;
    double q_err = 0;
    double n_mean = 0;
    double n_mean_err = 0;
};

struct AlphaSlope
{
    double alpha = 0;
    double alpha_err = 0;
    double q_intercept = 0;
    double q_intercept_err = 0;
    double r_squared = 0;
    double reduced_chi2 = 0;
    std::vector<SlopePoint> points;
};

struct EnsembleOptions
{
    std::size_t trajectories = 8;
    std::size_t threads = 1;
};

//! Copy of `base` moved to a new gamma_c t_int with N_ex, Theta and
//! dv/v0 held fixed (v0 and g change inversely, r is unchanged).
TrajectoryConfig with_gamma_c_t_int(const TrajectoryConfig& base, double gamma_c_t_int);

//! Weighted straight-line fit Q = q_intercept + alpha * gamma_c t_int.
AlphaSlope fit_alpha_slope(std::span<const SlopePoint> points);

AlphaSlope alpha_slope_scan(const TrajectoryConfig& base,
                            std::span<const double> gamma_c_t_int_values,
                            const EnsembleOptions& options = {});

}  // namespace microlaser
