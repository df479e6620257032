#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "microlaser/params.hpp"

namespace microlaser {

/*!
 * Predicted mean photon number against mean atom number <N>, following the
 * selected operating branch.
 */
struct IOCurve
{
    std::vector<double> atoms;   //!< <N> grid
    std::vector<double> photons; //!< branch fixed point n0 at each <N>
    std::vector<int> branch;     //!< Rabi lobe of the selected branch
    std::vector<double> jumps;   //!< <N> where the selected branch switches
    MicrolaserParams params;

    void validate() const;
};

//! `atoms_grid` must be positive and ascending. Jump locations are refined by
//! bisection to 1e-6 relative between the grid points that bracket them.
IOCurve predict_io_curve(const MicrolaserParams& params_template,
                         const VelocityDistribution& dist,
                         std::span<const double> atoms_grid);

struct RawCountPoint
{
    double fluorescence = 0;  //!< atom-channel counts
    double output = 0;        //!< photon-channel counts
};

struct CalibrationFit
{
    double scale_atoms = 0;    //!< <N> per fluorescence count
    double scale_photons = 0;  //!< <n> per output count
    double residual = 0;       //!< sqrt of the weighted sum of squared count residuals
    double covariance[4] = {0, 0, 0, 0};  //!< (scale_atoms, scale_photons)
    std::size_t points = 0;
    std::size_t jumps_in_range = 0;
};

struct CalibrationOptions
{
    double atoms_min = 1;      //!< search range for the largest mapped <N>
    double atoms_max = 3000;
    std::size_t coarse_points = 600;
    double jump_window = 0.02;  //!< relative <N> window around a jump
    double jump_weight = 0.1;
};

/*!
 * Vertical least squares: minimise sum w_i (C_i - n0(a F_i) / b)^2 over the
 * atom scale a and photon scale b. Residuals are in output counts, so the
 * below-threshold corner (n0 = 0, b -> 0) is not a trivial minimum. 1 / b is
 * solved in closed form for each a;
 * a is searched as a * max(F) so the result is equivariant under rescaling
 * of the fluorescence counts.
 *
 * Throws NonIdentifiable if the data are degenerate or no predicted jump
 * falls inside the fitted atom range.
 */
CalibrationFit fit_calibration(std::span<const RawCountPoint> raw_points,
                               const MicrolaserParams& params_template,
                               const VelocityDistribution& dist,
                               const CalibrationOptions& options = {});

}  // namespace microlaser
