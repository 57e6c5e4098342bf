#pragma once

// Hand-written log targets injected into the samplers by the tests.

#include "gptemper/inference.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace testing {

// One positive scalar with density N(mu, sd^2) truncated to theta > 0,
// plus an optional number of extra scalars with the same density.
class GaussianTarget final : public gptemper::LogTarget {
public:
    GaussianTarget(double mu, double sd, std::size_t dim = 1) : mu_(mu), sd_(sd), dim_(dim), touched_(dim)
    {
        for (std::size_t i = 0; i < dim; ++i) touched_[i] = i;
    }

    std::size_t dimension() const override { return dim_; }
    std::size_t block_count() const override { return dim_; }
    std::span<const std::size_t> blocks_touched(std::size_t i) const override { return {&touched_[i], 1}; }
    double block_log_likelihood(std::size_t b, std::span<const double> theta) const override
    {
        const double z = (theta[b] - mu_) / sd_;
        return -0.5 * z * z;
    }
    double log_prior(std::span<const double> theta) const override
    {
        for (double t : theta)
            if (!(t > 0.0)) return -std::numeric_limits<double>::infinity();
        return 0.0;
    }
    double draw_prior(std::size_t, gptemper::Rng& rng) const override { return mu_ + sd_ * std::abs(gptemper::standard_normal(rng)); }
    double prior_mean(std::size_t) const override { return mu_; }

    double cdf(double x) const { return 0.5 * std::erfc(-(x - mu_) / (sd_ * std::numbers::sqrt2)); }

private:
    double mu_, sd_;
    std::size_t dim_;
    std::vector<std::size_t> touched_;
};

// Constant likelihood and a prior flat in log(theta), so every log-space
// proposal has acceptance probability exactly 1.
class LogFlatTarget final : public gptemper::LogTarget {
public:
    explicit LogFlatTarget(std::size_t dim = 2, double loglik = -3.0) : dim_(dim), loglik_(loglik), all_(1, 0) {}

    std::size_t dimension() const override { return dim_; }
    std::size_t block_count() const override { return 1; }
    std::span<const std::size_t> blocks_touched(std::size_t) const override { return all_; }
    double block_log_likelihood(std::size_t, std::span<const double>) const override { return loglik_; }
    double log_prior(std::span<const double> theta) const override
    {
        double s = 0.0;
        for (double t : theta) s -= std::log(t);
        return s;
    }
    double draw_prior(std::size_t, gptemper::Rng& rng) const override { return std::exp(gptemper::uniform01(rng)); }
    double prior_mean(std::size_t) const override { return 1.0; }

private:
    std::size_t dim_;
    double loglik_;
    std::vector<std::size_t> all_;
};

} // namespace testing
