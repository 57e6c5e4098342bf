#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace oracle {

double kernel(const Vec& a, const Vec& b, const Theta& t, std::size_t k, bool additive)
{
    if (additive) {
        double s = 0.0;
        for (std::size_t l = 0; l < t.d; ++l) s += std::exp(-t.beta(k, l) * (a[l] - b[l]) * (a[l] - b[l]));
        return s / t.lz(k);
    }
    double e = 0.0;
    for (std::size_t l = 0; l < t.d; ++l) e += t.beta(k, l) * (a[l] - b[l]) * (a[l] - b[l]);
    return std::exp(-e) / t.lz(k);
}

Mat dense_covariance(const Mat& x, const Theta& t, bool additive)
{
    const std::size_t n = x.size();
    Mat s(n * t.m, Vec(n * t.m, 0.0));
    for (std::size_t k = 0; k < t.m; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double v = kernel(x[i], x[j], t, k, additive);
                if (i == j) v += 1.0 / t.ls(k) + 1.0 / t.lo();
                s[k * n + i][k * n + j] = v;
            }
    return s;
}

Elimination solve(Mat a, Vec b)
{
    const std::size_t n = a.size();
    Elimination out;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        if (a[p][c] == 0.0) throw std::runtime_error("singular matrix");
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        // Row swaps flip the determinant sign; only |det| matters for an SPD input.
        out.log_det += std::log(std::abs(a[c][c]));
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
            b[r] -= f * b[c];
        }
    }
    out.solution.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * out.solution[j];
        out.solution[i] = s / a[i][i];
    }
    return out;
}

double gaussian_loglik(const Mat& sigma, const Vec& y)
{
    const Elimination e = solve(sigma, y);
    double quad = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) quad += y[i] * e.solution[i];
    return -0.5 * e.log_det - 0.5 * quad;
}

double dense_loglik(const Mat& x, const Mat& y, const Theta& t, bool additive)
{
    Vec stacked;
    for (std::size_t k = 0; k < t.m; ++k)
        for (const auto& row : y) stacked.push_back(row[k]);
    return gaussian_loglik(dense_covariance(x, t, additive), stacked);
}

double gamma_log_pdf(double x, double shape, double rate)
{
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

PredictiveMoments dense_predict(const Mat& x, const Vec& y, const Theta& t, const Vec& x_star, bool additive)
{
    const std::size_t n = x.size();
    Mat s(n, Vec(n));
    Vec ks(n);
    for (std::size_t i = 0; i < n; ++i) {
        ks[i] = kernel(x[i], x_star, t, 0, additive);
        for (std::size_t j = 0; j < n; ++j)
            s[i][j] = kernel(x[i], x[j], t, 0, additive) + (i == j ? 1.0 / t.ls(0) + 1.0 / t.lo() : 0.0);
    }
    const Vec alpha = solve(s, y).solution;
    const Vec v = solve(s, ks).solution;
    PredictiveMoments p;
    double reduction = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p.mean += ks[i] * alpha[i];
        reduction += ks[i] * v[i];
    }
    p.variance = kernel(x_star, x_star, t, 0, additive) - reduction + 1.0 / t.ls(0) + 1.0 / t.lo();
    return p;
}

QuadratureResult integrate_log_space(const std::function<double(const Vec& theta)>& log_density_u,
                                     const std::vector<std::pair<double, double>>& log_bounds, std::size_t resolution,
                                     bool check_coverage)
{
    const std::size_t dim = log_bounds.size();
    if (dim < 1 || dim > 2) throw std::invalid_argument("quadrature supports 1 or 2 free scalars");
    if (resolution < 3) throw std::invalid_argument("resolution too small");

    std::vector<Vec> nodes(dim, Vec(resolution));
    Vec h(dim);
    for (std::size_t a = 0; a < dim; ++a) {
        h[a] = (log_bounds[a].second - log_bounds[a].first) / static_cast<double>(resolution - 1);
        for (std::size_t i = 0; i < resolution; ++i) nodes[a][i] = log_bounds[a].first + h[a] * static_cast<double>(i);
    }
    const std::size_t n1 = dim == 2 ? resolution : 1;
    Mat logd(resolution, Vec(n1));
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < resolution; ++i)
        for (std::size_t j = 0; j < n1; ++j) {
            Vec theta{std::exp(nodes[0][i])};
            if (dim == 2) theta.push_back(std::exp(nodes[1][j]));
            logd[i][j] = log_density_u(theta);
            peak = std::max(peak, logd[i][j]);
        }
    if (!std::isfinite(peak)) throw std::runtime_error("density vanishes on the whole grid");

    if (check_coverage) {
        double edge = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < resolution; ++i)
            for (std::size_t j = 0; j < n1; ++j) {
                const bool boundary = i == 0 || i + 1 == resolution || (dim == 2 && (j == 0 || j + 1 == n1));
                if (boundary) edge = std::max(edge, logd[i][j]);
            }
        if (edge - peak > std::log(1e-4)) throw CoverageError("posterior mass reaches the grid boundary; widen the grid");
    }

    auto weight = [&](std::size_t i) { return (i == 0 || i + 1 == resolution) ? 0.5 : 1.0; };
    double z = 0.0;
    Vec m1(dim, 0.0), m2(dim, 0.0), lm(dim, 0.0);
    for (std::size_t i = 0; i < resolution; ++i)
        for (std::size_t j = 0; j < n1; ++j) {
            double w = weight(i) * h[0] * std::exp(logd[i][j] - peak);
            if (dim == 2) w *= weight(j) * h[1];
            z += w;
            const double u[2] = {nodes[0][i], dim == 2 ? nodes[1][j] : 0.0};
            for (std::size_t a = 0; a < dim; ++a) {
                const double th = std::exp(u[a]);
                m1[a] += w * th;
                m2[a] += w * th * th;
                lm[a] += w * u[a];
            }
        }
    QuadratureResult r;
    r.log_bounds = log_bounds;
    r.resolution = resolution;
    r.log_normalizer = peak + std::log(z);
    for (std::size_t a = 0; a < dim; ++a) {
        r.mean.push_back(m1[a] / z);
        r.variance.push_back(m2[a] / z - (m1[a] / z) * (m1[a] / z));
        r.log_mean.push_back(lm[a] / z);
    }
    return r;
}

QuadratureResult quadrature_posterior(const Mat& x, const Mat& y, const Theta& pinned, const std::vector<std::size_t>& free,
                                      double prior_shape, double prior_rate, bool additive, std::size_t resolution,
                                      const std::vector<std::pair<double, double>>& log_bounds)
{
    if (free.size() != log_bounds.size()) throw std::invalid_argument("one bound pair per free scalar");
    if (x.size() > 10) throw std::invalid_argument("quadrature oracle is limited to N <= 10");
    auto logd = [&](const Vec& th) {
        Theta t = pinned;
        double lp = 0.0;
        for (std::size_t a = 0; a < free.size(); ++a) {
            t.v[free[a]] = th[a];
            lp += gamma_log_pdf(th[a], prior_shape, prior_rate) + std::log(th[a]);
        }
        return dense_loglik(x, y, t, additive) + lp;
    };
    return integrate_log_space(logd, log_bounds, resolution, true);
}

double ess(const Vec& log_weights)
{
    const double mx = *std::max_element(log_weights.begin(), log_weights.end());
    double s = 0.0, s2 = 0.0;
    for (double lw : log_weights) {
        const double w = std::exp(lw - mx);
        s += w;
        s2 += w * w;
    }
    return s * s / s2;
}

double gamma_scan_root(const Vec& log_weights, const Vec& log_likelihoods, double gamma_i, double target, double step)
{
    for (std::size_t k = 1;; ++k) {
        const double g = std::min(1.0, gamma_i + step * static_cast<double>(k));
        Vec lw(log_weights.size());
        for (std::size_t j = 0; j < lw.size(); ++j) lw[j] = log_weights[j] + (g - gamma_i) * log_likelihoods[j];
        if (ess(lw) <= target) return g;
        if (g >= 1.0) return 1.0;
    }
}

double torsion(const Vec& x)
{
    const double pi = std::numbers::pi;
    const double grav = 386.09;
    // d1..d3, L1..L3, G1..G3, shaft densities (ignored), D1..D2, t1..t2, rho1..rho2
    double k[3], jm[2];
    for (int i = 0; i < 3; ++i) {
        const double d = x[i], len = x[3 + i], g = x[6 + i];
        k[i] = pi * g * d / (32.0 * len);
    }
    for (int j = 0; j < 2; ++j) {
        const double dd = x[12 + j], t = x[14 + j], rho = x[16 + j];
        const double mass = pi * t * rho * dd / (4.0 * grav);
        const double radius = dd / 2.0;
        jm[j] = 0.5 * mass * radius * radius;
    }
    const double b = -((k[0] + k[1]) / jm[0] + (k[1] + k[2]) / jm[1]);
    const double c = (k[0] * k[1] + k[1] * k[2] + k[2] * k[0]) / (jm[0] * jm[1]);
    const double root = (-b + std::sqrt(b * b - 4.0 * c)) / 2.0;
    return std::sqrt(root) / (2.0 * pi);
}

double quadratic4(const Vec& x)
{
    const double a[4][4] = {{1, 0.5, 0.5, 0.5}, {0.5, 2, 0.5, 0.5}, {0.5, 0.5, 3, 0.5}, {0.5, 0.5, 0.5, 4}};
    const double b[4] = {1, -1, 1, -1};
    double y = 0.5;
    for (int i = 0; i < 4; ++i) {
        y += b[i] * x[i];
        for (int j = 0; j < 4; ++j) y += x[i] * a[i][j] * x[j];
    }
    return y;
}

double highdim100(const Vec& x)
{
    double y = 0.0;
    for (int l = 1; l <= 50; ++l) y += std::sin(x[2 * l - 2]) * x[2 * l - 1];
    for (int l = 1; l <= 100; ++l) y += l * x[l - 1] / 100.0;
    return y;
}

} // namespace oracle
