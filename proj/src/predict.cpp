#include "gptemper/predict.hpp"

#include "gptemper/errors.hpp"
#include "gptemper/kernel.hpp"

#include <omp.h>

#include <cmath>
#include <exception>

namespace gptemper {

namespace {

// Predictive mean and variance of one hyperparameter sample, standardized units.
struct SamplePrediction {
    Eigen::MatrixXd mean;
    Eigen::MatrixXd variance;
};

SamplePrediction predict_one(const Dataset& train, const SquaredDistanceCache& distances, const HyperParams& theta,
                             const Eigen::MatrixXd& test_inputs, KernelForm form, double jitter, bool with_variance)
{
    const Eigen::Index n_test = test_inputs.rows();
    const auto m = static_cast<Eigen::Index>(train.output_dim());
    SamplePrediction out{Eigen::MatrixXd(n_test, m), Eigen::MatrixXd(with_variance ? n_test : 0, m)};
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        Eigen::MatrixXd cov;
        distances.fill_covariance(theta.beta(ku), theta.lambda_z(ku), theta.lambda_s(ku), theta.lambda_o(), form, cov);
        const Factorization f = factorize(cov, jitter, [&] { return describe(theta.values()); });
        const auto L = f.llt.matrixL();
        const Eigen::VectorXd alpha = L.transpose().solve(L.solve(train.outputs().col(k)));
        const Eigen::MatrixXd cross = cross_covariance(test_inputs, train.inputs(), theta.beta(ku), theta.lambda_z(ku), form);
        out.mean.col(k) = cross * alpha;
        if (!with_variance) continue;
        const Eigen::MatrixXd v = L.solve(cross.transpose());
        // k(x, x) of the kernel term alone.
        const double prior_var =
            (form == KernelForm::exponentiated_sum ? 1.0 : static_cast<double>(train.input_dim())) / theta.lambda_z(ku);
        const double noise = 1.0 / theta.lambda_s(ku) + 1.0 / theta.lambda_o();
        out.variance.col(k) =
            (prior_var - v.colwise().squaredNorm().transpose().array()).max(0.0) + noise;
    }
    return out;
}

Prediction combine(const Dataset& train, const PosteriorEnsemble& ensemble, const std::vector<SamplePrediction>& parts,
                   Eigen::Index n_test, bool with_variance)
{
    const auto m = static_cast<Eigen::Index>(train.output_dim());
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n_test, m);
    for (std::size_t s = 0; s < parts.size(); ++s) mean += ensemble.weights[s] * parts[s].mean;
    if (!with_variance) return Prediction{train.denormalize_outputs(mean), Eigen::MatrixXd(0, m)};
    Eigen::MatrixXd var = Eigen::MatrixXd::Zero(n_test, m);
    for (std::size_t s = 0; s < parts.size(); ++s)
        var.array() += ensemble.weights[s] * (parts[s].variance.array() + (parts[s].mean - mean).array().square());

    Prediction p;
    p.mean = train.denormalize_outputs(mean);
    p.variance.resize(n_test, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const double scale = train.output_transforms()[static_cast<std::size_t>(k)].scale;
        p.variance.col(k) = var.col(k) * scale * scale;
    }
    return p;
}

void check_inputs(const Dataset& train, const PosteriorEnsemble& ensemble, const Eigen::MatrixXd& test_inputs)
{
    ensemble.validate();
    if (static_cast<std::size_t>(test_inputs.cols()) != train.input_dim())
        throw SchemaError("test inputs have " + std::to_string(test_inputs.cols()) + " columns, model expects " +
                          std::to_string(train.input_dim()));
    for (const auto& s : ensemble.samples)
        if (s.input_dim() != train.input_dim() || s.output_dim() != train.output_dim())
            throw SchemaError("ensemble sample shape does not match the training data");
}

} // namespace

void PosteriorEnsemble::validate() const
{
    if (samples.empty()) throw DomainError("empty posterior ensemble");
    if (weights.size() != samples.size()) throw DomainError("ensemble weight count does not match sample count");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("ensemble weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("ensemble weights must sum to 1");
}

std::vector<double> PosteriorEnsemble::mean() const
{
    validate();
    std::vector<double> mu(samples.front().size(), 0.0);
    for (std::size_t s = 0; s < samples.size(); ++s)
        for (std::size_t i = 0; i < mu.size(); ++i) mu[i] += weights[s] * samples[s][i];
    return mu;
}

HoldOut HoldOut::from(const Dataset& test) { return HoldOut{test.inputs(), test.raw_outputs()}; }

namespace {

Prediction run_predict(const Dataset& train, const PosteriorEnsemble& ensemble, const Eigen::MatrixXd& test_inputs,
                       KernelForm form, double jitter, int workers, bool with_variance)
{
    check_inputs(train, ensemble, test_inputs);
    const SquaredDistanceCache distances(train.inputs());
    const std::size_t n = ensemble.size();
    std::vector<SamplePrediction> parts(n);
    if (workers <= 1) {
        for (std::size_t s = 0; s < n; ++s)
            parts[s] = predict_one(train, distances, ensemble.samples[s], test_inputs, form, jitter, with_variance);
        return combine(train, ensemble, parts, test_inputs.rows(), with_variance);
    }
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(workers) schedule(static)
    for (std::int64_t s = 0; s < count; ++s) {
        const auto su = static_cast<std::size_t>(s);
        try {
            parts[su] = predict_one(train, distances, ensemble.samples[su], test_inputs, form, jitter, with_variance);
        } catch (...) {
            errors[su] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    // Reduced in sample order after the parallel section, hence identical to the serial path.
    return combine(train, ensemble, parts, test_inputs.rows(), with_variance);
}

} // namespace

Prediction predict(const Dataset& train, const PosteriorEnsemble& ensemble, const Eigen::MatrixXd& test_inputs,
                   KernelForm form, double jitter, int workers)
{
    return run_predict(train, ensemble, test_inputs, form, jitter, workers, true);
}

Prediction predict_serial(const Dataset& train, const PosteriorEnsemble& ensemble,
                          const Eigen::MatrixXd& test_inputs, KernelForm form, double jitter)
{
    return run_predict(train, ensemble, test_inputs, form, jitter, 1, true);
}

Eigen::MatrixXd predict_mean(const Dataset& train, const PosteriorEnsemble& ensemble,
                             const Eigen::MatrixXd& test_inputs, KernelForm form, double jitter, int workers)
{
    return run_predict(train, ensemble, test_inputs, form, jitter, workers, false).mean;
}

Eigen::VectorXd rmse(const Prediction& prediction, const Eigen::MatrixXd& test_outputs)
{
    return rmse(prediction.mean, test_outputs);
}

Eigen::VectorXd rmse(const Eigen::MatrixXd& predicted_mean, const Eigen::MatrixXd& test_outputs)
{
    if (predicted_mean.rows() != test_outputs.rows() || predicted_mean.cols() != test_outputs.cols())
        throw DomainError("rmse: prediction shape does not match test outputs");
    if (test_outputs.rows() == 0) throw DomainError("rmse: no test points");
    return (predicted_mean - test_outputs).array().square().colwise().mean().sqrt().transpose();
}

} // namespace gptemper
