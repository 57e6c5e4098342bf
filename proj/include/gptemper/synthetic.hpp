#pragma once

#include "gptemper/data.hpp"
#include "gptemper/mcmc.hpp"
#include "gptemper/predict.hpp"
#include "gptemper/rng.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gptemper {

/// 3 sin(x1) x2 + cos(x3) sin(x4) + sin(x5) sin(x6) + sin(x7) + sin(x8) + 7 x9 + 6 x10
double scalability_fn(std::span<const double> x);

/// Highest natural frequency of a three-shaft, two-disk torsion system.
/// Input order: d1..d3, L1..L3, G1..G3, shaft densities 1..3 (unused by the
/// formulas), D1 D2, t1 t2, rho1 rho2. Stiffness and disk mass use d and D
/// to the first power, as the formulas are written.
double torsion_fn(std::span<const double> x);

/// x'Ax + b'x + c with A = diag(1,2,3,4) + 0.5 off-diagonal, b = (1,-1,1,-1), c = 0.5.
double quadratic4_fn(std::span<const double> x);

/// sum_{l=1}^{50} sin(x_{2l-1}) x_{2l} + sum_{l=1}^{100} l x_l / 100
double highdim100_fn(std::span<const double> x);

inline constexpr double kGravityInch = 386.09;

struct SyntheticProblem {
    std::string name;
    std::size_t d = 0;
    std::size_t m = 1;
    std::function<std::vector<double>(std::span<const double>)> evaluator;
    std::vector<std::pair<double, double>> input_box;
    double noise_sd = 0.0;
};

/// "scalability", "torsion", "quadratic4" or "highdim100". Throws DomainError otherwise.
SyntheticProblem make_problem(const std::string& name);
std::vector<std::string> problem_names();

/// n points, one per stratum in every dimension, scaled into `box`.
Eigen::MatrixXd latin_hypercube(std::size_t n, const std::vector<std::pair<double, double>>& box, Rng& rng);

struct SyntheticData {
    Dataset train;
    HoldOut test;
};

/// Latin-hypercube designs for train and test, evaluated through the
/// problem; Gaussian noise of noise_sd is added to the training outputs.
SyntheticData generate(const SyntheticProblem& problem, std::size_t train_n, std::size_t test_n, std::uint64_t seed);

struct EngineReport {
    Engine engine = Engine::mcmc;
    EngineResult result;
    std::vector<double> final_rmse; // empty without test data
};

struct BenchmarkReport {
    std::string problem;
    std::size_t train_n = 0;
    std::size_t test_n = 0;
    std::uint64_t seed = 0;
    std::vector<EngineReport> engines;
};

/// Trains every engine in turn on the same data and collects traces and final RMSE.
BenchmarkReport run_benchmark(const SyntheticProblem& problem, std::size_t train_n, std::size_t test_n,
                              const std::vector<Engine>& engines, RunConfig config, std::uint64_t seed);

} // namespace gptemper
