#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace microlaser {

struct QuadratureRule
{
    std::vector<double> nodes;    //!< abscissae on [-1, 1], ascending
    std::vector<double> weights;  //!< sum to 2
};

//! Gauss-Legendre rule with `n` nodes on [-1, 1].
QuadratureRule gauss_legendre(std::size_t n);

//---------------------------------------------------------------------------//
// Least squares
//---------------------------------------------------------------------------//

/*!
 * Result of a weighted linear least-squares fit.
 *
 * `covariance` is (X^T W X)^{-1}, i.e. it assumes the weights are inverse
 * variances. Multiply by `reduced_chi2()` for a residual-scaled estimate.
 */
struct LinearFit
{
    std::vector<double> coefficients;
    std::vector<double> covariance;  //!< row-major, size k*k
    double chi2 = 0;
    std::size_t dof = 0;
    double r_squared = 0;       //!< weighted coefficient of determination
    double condition = 0;       //!< |R_00 / R_kk| of the QR factor

    double variance(std::size_t i) const
    {
        return covariance[i * coefficients.size() + i];
    }
    double reduced_chi2() const
    {
        return dof > 0 ? chi2 / static_cast<double>(dof) : 0.0;
    }
};

/*!
 * Minimise sum_i w_i (y_i - sum_j X_ij beta_j)^2.
 *
 * `design` is row-major with `columns` entries per observation. Throws
 * FitError if the design is rank deficient.
 */
LinearFit weighted_least_squares(std::span<const double> design,
                                 std::size_t columns,
                                 std::span<const double> y,
                                 std::span<const double> weights);

//! Fit y = sum_{p=first..last} c_p x^p. Coefficients are ordered by power.
LinearFit fit_powers(std::span<const double> x,
                     std::span<const double> y,
                     std::span<const double> weights,
                     int first_power,
                     int last_power);

//! Evaluate sum_{p} c_p x^(first_power + p).
double evaluate_powers(std::span<const double> coefficients,
                       int first_power,
                       double x);

//---------------------------------------------------------------------------//
// Scalar minimisation
//---------------------------------------------------------------------------//

//! Golden-section search for a minimum of `f` on [a, b].
double golden_section_minimize(const std::function<double(double)>& f,
                               double a,
                               double b,
                               double tolerance,
                               int max_iterations = 200);

//---------------------------------------------------------------------------//
// Random numbers
//---------------------------------------------------------------------------//

//! SplitMix64 finaliser: a bijective mix of a 64-bit word.
std::uint64_t splitmix64(std::uint64_t x);

//! Independent stream seed for item `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/*!
 * Deterministic random source.
 *
 * Wraps mt19937_64 with hand-written transforms so that sequences do not
 * depend on the standard library's distribution implementations.
 */
class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    //! Uniform on the open interval (0, 1).
    double uniform()
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }
    double exponential(double rate) { return -std::log(uniform()) / rate; }
    double normal();

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0;
};

//---------------------------------------------------------------------------//
// Hashing
//---------------------------------------------------------------------------//

//! 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a64(std::span<const char> bytes);

}  // namespace microlaser
