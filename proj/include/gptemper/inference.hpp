#pragma once

#include "gptemper/data.hpp"
#include "gptemper/kernel.hpp"
#include "gptemper/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace gptemper {

struct GammaPrior {
    double shape = 1.1;
    double rate = 1.1;

    /// -inf outside the support (x <= 0).
    double log_density(double x) const;
    double mean() const { return shape / rate; }
};

/// Independent Gamma prior on every scalar hyperparameter.
struct PriorSpec {
    std::vector<GammaPrior> scalars;

    /// Gamma(shape, rate = shape) on each scalar, i.e. prior mean 1 in
    /// normalized data space.
    static PriorSpec weakly_informative(std::size_t count, double shape = 1.1);

    std::size_t size() const { return scalars.size(); }
};

/// tempered_log_target = gamma * log_likelihood + log_prior. The prior is
/// never tempered, so gamma = 0 leaves a proper density.
struct LogDensity {
    double log_likelihood = 0.0;
    double log_prior = 0.0;
    double gamma = 1.0;
    double tempered_log_target = 0.0;

    static LogDensity make(double log_likelihood, double log_prior, double gamma);
};

double log_prior(std::span<const double> theta, const PriorSpec& priors);
double log_prior(const HyperParams& params, const PriorSpec& priors);

/// -1/2 log|S| - 1/2 y' S^-1 y for one factorized block; the 2*pi constant is dropped.
double gaussian_log_likelihood(const Eigen::LLT<Eigen::MatrixXd>& llt, double log_det, const Eigen::VectorXd& y);

/// Sum over outputs of the per-block Gaussian log-likelihood.
double log_likelihood(const Dataset& dataset, const HyperParams& params, KernelForm form, double jitter);

LogDensity tempered_log_target(const Dataset& dataset, const HyperParams& params, double gamma,
                               const PriorSpec& priors, KernelForm form, double jitter);

/// What the Metropolis stepper needs from a target: the likelihood split
/// into independent blocks, which blocks each scalar touches, and an
/// independent per-scalar prior. Implementations must be safe to call
/// concurrently.
class LogTarget {
public:
    virtual ~LogTarget() = default;

    virtual std::size_t dimension() const = 0;
    virtual std::size_t block_count() const = 0;
    virtual std::span<const std::size_t> blocks_touched(std::size_t scalar) const = 0;

    /// One covariance factorization per call for GP targets. May throw NotPositiveDefinite.
    virtual double block_log_likelihood(std::size_t block, std::span<const double> theta) const = 0;
    virtual double log_prior(std::span<const double> theta) const = 0;
    virtual double draw_prior(std::size_t scalar, Rng& rng) const = 0;
    virtual double prior_mean(std::size_t scalar) const = 0;
};

/// The GP hyperparameter posterior; one likelihood block per output.
class GpTarget final : public LogTarget {
public:
    GpTarget(const Dataset& dataset, PriorSpec priors, KernelForm form, double jitter);

    std::size_t dimension() const override { return layout_.size(); }
    std::size_t block_count() const override { return layout_.m; }
    std::span<const std::size_t> blocks_touched(std::size_t scalar) const override { return touched_[scalar]; }
    double block_log_likelihood(std::size_t block, std::span<const double> theta) const override;
    double log_prior(std::span<const double> theta) const override;
    double draw_prior(std::size_t scalar, Rng& rng) const override;
    double prior_mean(std::size_t scalar) const override { return priors_.scalars[scalar].mean(); }

    const ParamLayout& layout() const { return layout_; }
    const PriorSpec& priors() const { return priors_; }

private:
    ParamLayout layout_;
    PriorSpec priors_;
    KernelForm form_;
    double jitter_;
    SquaredDistanceCache distances_;
    std::vector<Eigen::VectorXd> columns_;
    std::vector<std::vector<std::size_t>> touched_;
};

} // namespace gptemper
