#include "microlaser/numerics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>

#include "microlaser/error.hpp"

namespace microlaser {

QuadratureRule gauss_legendre(std::size_t n)
{
    if (n == 0)
    {
        throw InvalidArgument("quadrature needs at least one node");
    }
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    std::size_t const half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i)
    {
        // Tricomi initial guess followed by Newton on P_n
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75)
                            / (static_cast<double>(n) + 0.5));
        double dp = 0;
        for (int iter = 0; iter < 100; ++iter)
        {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k)
            {
                double const kk = static_cast<double>(k);
                double const p2 = ((2 * kk - 1) * x * p1 - (kk - 1) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            double const dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
            {
                break;
            }
        }
        double const w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
    {
        rule.nodes[n / 2] = 0.0;
    }
    return rule;
}

LinearFit weighted_least_squares(std::span<const double> design,
                                 std::size_t columns,
                                 std::span<const double> y,
                                 std::span<const double> weights)
{
    std::size_t const rows = y.size();
    if (columns == 0 || design.size() != rows * columns
        || weights.size() != rows)
    {
        throw InvalidArgument("least squares: inconsistent dimensions");
    }
    if (rows < columns)
    {
        throw FitError("least squares: fewer observations than parameters");
    }

    Eigen::MatrixXd a(rows, columns);
    Eigen::VectorXd b(rows);
    for (std::size_t i = 0; i < rows; ++i)
    {
        if (!(weights[i] >= 0) || !std::isfinite(weights[i]))
        {
            throw InvalidArgument("least squares: weights must be >= 0");
        }
        double const sw = std::sqrt(weights[i]);
        for (std::size_t j = 0; j < columns; ++j)
        {
            a(i, j) = sw * design[i * columns + j];
        }
        b(i) = sw * y[i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-13);
    if (qr.rank() < static_cast<Eigen::Index>(columns))
    {
        throw FitError("least squares: design matrix is rank deficient");
    }
    Eigen::VectorXd const beta = qr.solve(b);

    Eigen::MatrixXd const r = qr.matrixR()
                                  .topLeftCorner(columns, columns)
                                  .triangularView<Eigen::Upper>();
    Eigen::MatrixXd const rinv
        = r.triangularView<Eigen::Upper>().solve(
            Eigen::MatrixXd::Identity(columns, columns));
    Eigen::MatrixXd const cov_perm = rinv * rinv.transpose();
    Eigen::MatrixXd const cov = qr.colsPermutation() * cov_perm
                                * qr.colsPermutation().transpose();

    LinearFit fit;
    fit.coefficients.assign(beta.data(), beta.data() + columns);
    fit.covariance.resize(columns * columns);
    for (std::size_t i = 0; i < columns; ++i)
    {
        for (std::size_t j = 0; j < columns; ++j)
        {
            fit.covariance[i * columns + j] = cov(i, j);
        }
    }
    Eigen::VectorXd const resid = a * beta - b;
    fit.chi2 = resid.squaredNorm();
    fit.dof = rows - columns;
    fit.condition = std::abs(r(0, 0) / r(columns - 1, columns - 1));

    double wsum = 0;
    double wy = 0;
    for (std::size_t i = 0; i < rows; ++i)
    {
        wsum += weights[i];
        wy += weights[i] * y[i];
    }
    double const ybar = wsum > 0 ? wy / wsum : 0;
    double ss_tot = 0;
    for (std::size_t i = 0; i < rows; ++i)
    {
        ss_tot += weights[i] * (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r_squared = ss_tot > 0 ? 1.0 - fit.chi2 / ss_tot : 1.0;
    return fit;
}

LinearFit fit_powers(std::span<const double> x,
                     std::span<const double> y,
                     std::span<const double> weights,
                     int first_power,
                     int last_power)
{
    if (first_power < 0 || last_power < first_power)
    {
        throw InvalidArgument("fit_powers: invalid power range");
    }
    if (x.size() != y.size())
    {
        throw InvalidArgument("fit_powers: x and y differ in length");
    }
    std::size_t const cols = static_cast<std::size_t>(last_power - first_power + 1);
    std::vector<double> design(x.size() * cols);
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        double term = std::pow(x[i], first_power);
        for (std::size_t j = 0; j < cols; ++j)
        {
            design[i * cols + j] = term;
            term *= x[i];
        }
    }
    return weighted_least_squares(design, cols, y, weights);
}

double evaluate_powers(std::span<const double> coefficients,
                       int first_power,
                       double x)
{
    double acc = 0;
    for (std::size_t j = coefficients.size(); j-- > 0;)
    {
        acc = acc * x + coefficients[j];
    }
    return acc * std::pow(x, first_power);
}

double golden_section_minimize(const std::function<double(double)>& f,
                               double a,
                               double b,
                               double tolerance,
                               int max_iterations)
{
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < max_iterations && std::abs(b - a) > tolerance; ++i)
    {
        if (fc <= fd)
        {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        }
        else
        {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? c : d;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double Rng::normal()
{
    if (has_spare_)
    {
        has_spare_ = false;
        return spare_;
    }
    double const u1 = uniform();
    double const u2 = uniform();
    double const radius = std::sqrt(-2.0 * std::log(u1));
    double const angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t fnv1a64(std::span<const char> bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes)
    {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace microlaser
