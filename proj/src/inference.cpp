#include "gptemper/inference.hpp"

#include "gptemper/errors.hpp"

#include <cmath>
#include <limits>

namespace gptemper {

double GammaPrior::log_density(double x) const
{
    if (!(x > 0.0) || !std::isfinite(x)) return -std::numeric_limits<double>::infinity();
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

PriorSpec PriorSpec::weakly_informative(std::size_t count, double shape)
{
    if (!(shape > 0.0)) throw DomainError("prior shape must be positive");
    return PriorSpec{std::vector<GammaPrior>(count, GammaPrior{shape, shape})};
}

LogDensity LogDensity::make(double log_likelihood, double log_prior, double gamma)
{
    LogDensity ld{log_likelihood, log_prior, gamma, 0.0};
    // Avoid 0 * -inf at the prior end of the bridge.
    ld.tempered_log_target = gamma == 0.0 ? log_prior : gamma * log_likelihood + log_prior;
    return ld;
}

double log_prior(std::span<const double> theta, const PriorSpec& priors)
{
    if (theta.size() != priors.size()) throw DomainError("prior count does not match hyperparameter count");
    double lp = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double term = priors.scalars[i].log_density(theta[i]);
        if (term == -std::numeric_limits<double>::infinity()) return term;
        lp += term;
    }
    return lp;
}

double log_prior(const HyperParams& params, const PriorSpec& priors) { return log_prior(params.values(), priors); }

double gaussian_log_likelihood(const Eigen::LLT<Eigen::MatrixXd>& llt, double log_det, const Eigen::VectorXd& y)
{
    const Eigen::VectorXd z = llt.matrixL().solve(y);
    return -0.5 * log_det - 0.5 * z.squaredNorm();
}

double log_likelihood(const Dataset& dataset, const HyperParams& params, KernelForm form, double jitter)
{
    if (!params.valid()) throw DomainError("hyperparameters must be positive and finite");
    double ll = 0.0;
    for (std::size_t k = 0; k < dataset.output_dim(); ++k) {
        const CovarianceBlock block = build_block(dataset, k, params, form, jitter);
        const Eigen::VectorXd y = dataset.outputs().col(static_cast<Eigen::Index>(k));
        const Eigen::VectorXd z =
            block.cholesky.triangularView<Eigen::Lower>().solve(y);
        ll += -0.5 * block.log_det - 0.5 * z.squaredNorm();
    }
    return ll;
}

LogDensity tempered_log_target(const Dataset& dataset, const HyperParams& params, double gamma,
                               const PriorSpec& priors, KernelForm form, double jitter)
{
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0, 1]");
    const double lp = log_prior(params, priors);
    if (lp == -std::numeric_limits<double>::infinity()) return LogDensity::make(0.0, lp, gamma);
    return LogDensity::make(log_likelihood(dataset, params, form, jitter), lp, gamma);
}

GpTarget::GpTarget(const Dataset& dataset, PriorSpec priors, KernelForm form, double jitter)
    : layout_{dataset.input_dim(), dataset.output_dim()},
      priors_(std::move(priors)),
      form_(form),
      jitter_(jitter),
      distances_(dataset.inputs())
{
    if (priors_.size() != layout_.size())
        throw DomainError("prior count " + std::to_string(priors_.size()) + " does not match " +
                          std::to_string(layout_.size()) + " hyperparameters");
    for (std::size_t k = 0; k < layout_.m; ++k) columns_.emplace_back(dataset.outputs().col(static_cast<Eigen::Index>(k)));
    touched_.resize(layout_.size());
    for (std::size_t i = 0; i < layout_.size(); ++i) {
        if (auto k = layout_.owner(i)) {
            touched_[i] = {*k};
        } else {
            for (std::size_t k2 = 0; k2 < layout_.m; ++k2) touched_[i].push_back(k2);
        }
    }
}

double GpTarget::block_log_likelihood(std::size_t block, std::span<const double> theta) const
{
    const std::size_t base = layout_.beta(block, 0);
    Eigen::MatrixXd cov;
    distances_.fill_covariance(theta.subspan(base, layout_.d), theta[layout_.lambda_z(block)],
                               theta[layout_.lambda_s(block)], theta[layout_.lambda_o()], form_, cov);
    const Factorization f = factorize(cov, jitter_, [&] { return describe(theta); });
    return gaussian_log_likelihood(f.llt, f.log_det, columns_[block]);
}

double GpTarget::log_prior(std::span<const double> theta) const { return gptemper::log_prior(theta, priors_); }

double GpTarget::draw_prior(std::size_t scalar, Rng& rng) const
{
    const GammaPrior& p = priors_.scalars[scalar];
    std::gamma_distribution<double> dist(p.shape, 1.0 / p.rate);
    // Guard against a zero draw from the far left tail.
    return std::max(dist(rng), std::numeric_limits<double>::min());
}

} // namespace gptemper
