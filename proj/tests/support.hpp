#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include "gptemper/data.hpp"
#include "gptemper/inference.hpp"
#include "gptemper/rng.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

namespace testing {

inline oracle::Mat to_mat(const Eigen::MatrixXd& m)
{
    oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
    return out;
}

inline oracle::Theta to_theta(const gptemper::HyperParams& p)
{
    return {p.input_dim(), p.output_dim(), oracle::Vec(p.values().begin(), p.values().end())};
}

inline std::vector<std::string> names(const std::string& prefix, std::size_t n)
{
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i + 1));
    return v;
}

inline gptemper::Dataset random_dataset(std::size_t n, std::size_t d, std::size_t m, gptemper::Rng& rng)
{
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Eigen::MatrixXd y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gptemper::uniform01(rng);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = gptemper::standard_normal(rng);
    return gptemper::Dataset::from_raw(x, y, names("x", d), names("y", m));
}

inline gptemper::HyperParams random_params(std::size_t d, std::size_t m, gptemper::Rng& rng)
{
    gptemper::HyperParams p(d, m);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(2.0 * gptemper::uniform01(rng) - 1.0);
    return p;
}

// One input, five points, a sine sampled with a little fixed noise.
inline gptemper::Dataset pinned_problem()
{
    const double noise[5] = {0.03, -0.05, 0.02, 0.04, -0.01};
    Eigen::MatrixXd x(5, 1), y(5, 1);
    for (int i = 0; i < 5; ++i) {
        x(i, 0) = 0.1 + 0.2 * i;
        y(i, 0) = std::sin(2.0 * std::numbers::pi * x(i, 0)) + noise[i];
    }
    return gptemper::Dataset::from_raw(x, y, {"x"}, {"y"});
}

// Layout for d = 1, m = 1 is [beta, lambda_z, lambda_s, lambda_o]; beta and
// lambda_s are sampled, lambda_z = 1 and lambda_o = 100 are held fixed.
inline constexpr std::size_t kPinnedBeta = 0;
inline constexpr std::size_t kPinnedLambdaS = 2;

inline gptemper::RunConfig pinned_config()
{
    gptemper::RunConfig c;
    c.free_mask = {true, false, true, false};
    c.start = std::vector<double>{1.0, 1.0, 1.0, 100.0};
    return c;
}

inline oracle::QuadratureResult pinned_quadrature(const gptemper::Dataset& ds, std::size_t resolution = 400)
{
    const oracle::Theta pinned{1, 1, {1.0, 1.0, 1.0, 100.0}};
    const double lo = std::log(1e-5), hi = std::log(1e3);
    return oracle::quadrature_posterior(to_mat(ds.inputs()), to_mat(ds.outputs()), pinned, {kPinnedBeta, kPinnedLambdaS},
                                        1.1, 1.1, false, resolution, {{lo, hi}, {lo, hi}});
}

inline double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("gptemper_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) { std::ofstream(p) << content; }

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace testing
