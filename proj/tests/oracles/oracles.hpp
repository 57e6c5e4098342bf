#pragma once

// Brute-force reference computations for the test suite. Nothing in here
// calls into the library's numerical code: kernels, densities and linear
// algebra are re-derived with plain loops over std::vector.

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>; // row-major, rows[i][j]

// Theta layout: per output k, d betas then lambda_z then lambda_s; lambda_o last.
struct Theta {
    std::size_t d = 1;
    std::size_t m = 1;
    Vec v;

    double beta(std::size_t k, std::size_t l) const { return v[k * (d + 2) + l]; }
    double lz(std::size_t k) const { return v[k * (d + 2) + d]; }
    double ls(std::size_t k) const { return v[k * (d + 2) + d + 1]; }
    double lo() const { return v[m * (d + 2)]; }
};

double kernel(const Vec& a, const Vec& b, const Theta& t, std::size_t k, bool additive);

/// Full (N m) x (N m) covariance with one block per output, zeros elsewhere.
Mat dense_covariance(const Mat& x, const Theta& t, bool additive);

struct Elimination {
    double log_det = 0.0;
    Vec solution;
};

/// Gaussian elimination with partial pivoting; throws on a singular matrix.
Elimination solve(Mat a, Vec b);

/// -1/2 log|S| - 1/2 y'S^-1 y for an explicit S.
double gaussian_loglik(const Mat& sigma, const Vec& y);

/// Multi-output likelihood through the dense block-diagonal covariance; y
/// is the outputs stacked column after column.
double dense_loglik(const Mat& x, const Mat& y, const Theta& t, bool additive);

double gamma_log_pdf(double x, double shape, double rate);

struct PredictiveMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Single-output GP predictive at x_star in standardized units, with the
/// test-point noise 1/lambda_s + 1/lambda_o included.
PredictiveMoments dense_predict(const Mat& x, const Vec& y, const Theta& t, const Vec& x_star, bool additive);

struct QuadratureResult {
    Vec mean;          // E[theta_i]
    Vec variance;      // Var[theta_i]
    Vec log_mean;      // E[log theta_i]
    std::vector<std::pair<double, double>> log_bounds;
    std::size_t resolution = 0;
    double log_normalizer = 0.0; // log of the integral over log-space
};

struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor-grid trapezoid rule over u = log(theta) for 1 or 2 scalars.
/// `log_density_u` is the log density with respect to du. With
/// `check_coverage`, the largest density on the grid boundary must stay
/// below 1e-4 of the peak or CoverageError (widen the grid) is thrown.
QuadratureResult integrate_log_space(const std::function<double(const Vec& theta)>& log_density_u,
                                     const std::vector<std::pair<double, double>>& log_bounds, std::size_t resolution,
                                     bool check_coverage = true);

/// GP posterior moments of the `free` scalars with the rest held at `pinned`.
/// Priors are Gamma(shape, rate) on the free scalars; the log-space Jacobian
/// is included.
QuadratureResult quadrature_posterior(const Mat& x, const Mat& y, const Theta& pinned, const std::vector<std::size_t>& free,
                                      double prior_shape, double prior_rate, bool additive, std::size_t resolution,
                                      const std::vector<std::pair<double, double>>& log_bounds);

double ess(const Vec& log_weights);

/// Smallest gamma on a gamma_i + k * step scan whose ESS drops to `target`
/// or below; 1 if none does.
double gamma_scan_root(const Vec& log_weights, const Vec& log_likelihoods, double gamma_i, double target,
                       double step = 1e-4);

double torsion(const Vec& x);
double quadratic4(const Vec& x);
double highdim100(const Vec& x);

} // namespace oracle
