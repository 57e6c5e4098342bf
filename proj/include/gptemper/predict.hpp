#pragma once

#include "gptemper/data.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace gptemper {

struct Provenance {
    std::string engine;
    std::uint64_t seed = 0;
    std::string schedule;
};

/// Weighted hyperparameter samples used for model-averaged prediction.
struct PosteriorEnsemble {
    std::vector<HyperParams> samples;
    std::vector<double> weights;
    Provenance provenance;

    std::size_t size() const { return samples.size(); }
    /// Non-empty, matching lengths, weights sum to 1.
    void validate() const;
    /// Weighted mean of every scalar.
    std::vector<double> mean() const;
};

/// Mean and variance in original output units, one row per test point.
struct Prediction {
    Eigen::MatrixXd mean;
    Eigen::MatrixXd variance;
};

/// Held-out data for RMSE: inputs normalized with the training transform,
/// outputs in original units.
struct HoldOut {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd outputs;

    static HoldOut from(const Dataset& test);
    bool empty() const { return inputs.rows() == 0; }
};

/// Bayesian model average over the ensemble. Per sample and output the GP
/// predictive is computed from the Cholesky factor of the training block;
/// the mixture variance follows the law of total variance. `workers` > 1
/// spreads samples over OpenMP threads; the result is bitwise identical to
/// predict_serial.
Prediction predict(const Dataset& train, const PosteriorEnsemble& ensemble, const Eigen::MatrixXd& test_inputs,
                   KernelForm form, double jitter, int workers = 1);

Prediction predict_serial(const Dataset& train, const PosteriorEnsemble& ensemble,
                          const Eigen::MatrixXd& test_inputs, KernelForm form, double jitter);

/// Mixture mean only, skipping the variance solves. Used for RMSE traces.
Eigen::MatrixXd predict_mean(const Dataset& train, const PosteriorEnsemble& ensemble,
                             const Eigen::MatrixXd& test_inputs, KernelForm form, double jitter, int workers = 1);

/// Per-output root mean squared error. Throws DomainError on a shape mismatch.
Eigen::VectorXd rmse(const Prediction& prediction, const Eigen::MatrixXd& test_outputs);
Eigen::VectorXd rmse(const Eigen::MatrixXd& predicted_mean, const Eigen::MatrixXd& test_outputs);

} // namespace gptemper
