#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace microlaser {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/*!
 * Physical parameter set of a cavity-QED microlaser.
 *
 * All quantities are SI: rates in 1/s (angular frequency for g), lengths in
 * m, speeds in m/s. The interaction time of an atom crossing the Gaussian
 * mode at speed v is sqrt(pi) * w0 / v.
 */
struct MicrolaserParams
{
    double g = two_pi * 190e3;        //!< atom-cavity coupling (rad/s)
    double gamma_c = two_pi * 170e3;  //!< cavity energy decay rate (1/s)
    double gamma_a = two_pi * 50e3;   //!< atomic decay rate (1/s)
    double w0 = 41e-6;                //!< mode waist (m)
    double v0 = 780.0;                //!< most probable atomic speed (m/s)
    double dv_over_v0 = 0.3;          //!< fractional FWHM of the speed distribution
    double r = 0.0;                   //!< atom injection rate (atoms/s)

    //! Throws InvalidArgument when a rate or length is not strictly positive.
    void validate() const;

    double interaction_time(double speed) const;
    double interaction_time() const { return interaction_time(v0); }

    //! Injection rate in units of the cavity decay rate.
    double n_ex() const { return r / gamma_c; }
    //! Pump parameter sqrt(N_ex) * g * t_int(v0).
    double theta() const;
    //! Mean intracavity atom number, r * t_int(v0).
    double mean_atom_number() const { return r * interaction_time(); }
    double gamma_c_t_int() const { return gamma_c * interaction_time(); }

    MicrolaserParams with_mean_atom_number(double atoms) const;
    MicrolaserParams with_speed(double speed) const;

    //! Multiply every rate by `s` and divide every time by `s` (speeds scale
    //! by `s` so that t_int shrinks). Dimensionless quantities are unchanged.
    MicrolaserParams rescaled(double s) const;

    /*!
     * Build a parameter set from the dimensionless controls used by the
     * trajectory studies: N_ex, Theta and Gamma_c * t_int. gamma_c and w0 fix
     * the units; v0 follows from t_int and g from Theta.
     */
    static MicrolaserParams from_dimensionless(double n_ex,
                                               double theta,
                                               double gamma_c_t_int,
                                               double dv_over_v0,
                                               double gamma_c = 1.0,
                                               double w0 = 1.0);
};

enum class VelocityShape
{
    delta,
    gaussian
};

/*!
 * Distribution of atomic speeds.
 *
 * The Gaussian shape is centred at v0 with the given FWHM, truncated to
 * [lower, upper] and discretised with Gauss-Legendre nodes. Weights are
 * normalised to one. The delta shape has a single node at v0.
 */
class VelocityDistribution
{
  public:
    static constexpr std::size_t default_nodes = 33;
    static constexpr double default_truncation_fwhm = 3.0;

    static VelocityDistribution delta(double v0);
    static VelocityDistribution gaussian(double v0,
                                         double fwhm,
                                         std::size_t nodes = default_nodes,
                                         double truncation_fwhm
                                         = default_truncation_fwhm);
    static VelocityDistribution gaussian_bounded(double v0,
                                                 double fwhm,
                                                 double lower,
                                                 double upper,
                                                 std::size_t nodes
                                                 = default_nodes);
    //! Delta when dv_over_v0 == 0, Gaussian otherwise.
    static VelocityDistribution from_params(const MicrolaserParams& params,
                                            std::size_t nodes = default_nodes);

    VelocityShape shape() const { return shape_; }
    double v0() const { return v0_; }
    double fwhm() const { return fwhm_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    std::size_t node_count() const { return speeds_.size(); }
    std::span<const double> speeds() const { return speeds_; }
    std::span<const double> weights() const { return weights_; }

    //! Same distribution with every speed multiplied by `s`.
    VelocityDistribution rescaled(double s) const;

  private:
    VelocityDistribution() = default;

    VelocityShape shape_ = VelocityShape::delta;
    double v0_ = 0;
    double fwhm_ = 0;
    double lower_ = 0;
    double upper_ = 0;
    std::vector<double> speeds_;
    std::vector<double> weights_;
};

}  // namespace microlaser
