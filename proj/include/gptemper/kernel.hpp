#pragma once

#include "gptemper/data.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gptemper {

/// Kernel term only, without the diagonal noise precisions.
double kernel_term(std::span<const double> xi, std::span<const double> xj, std::span<const double> beta,
                   double lambda_z, KernelForm form);

/// One covariance entry. When `same_point` is set the diagonal noise
/// 1/lambda_s + 1/lambda_o is added. Throws DomainError on a non-positive
/// hyperparameter.
double cov_entry(std::span<const double> xi, std::span<const double> xj, std::span<const double> beta,
                 double lambda_z, double lambda_s, double lambda_o, bool same_point, KernelForm form);

struct CovarianceBlock {
    Eigen::MatrixXd matrix;   // without jitter
    Eigen::MatrixXd cholesky; // lower factor of matrix + jitter_used * I
    double log_det = 0.0;
    double jitter_used = 0.0;
};

struct Factorization {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double log_det = 0.0;
    double jitter_used = 0.0;
};

/// Cholesky with geometric jitter escalation: first unjittered, then
/// base_jitter, 10x base_jitter, ... up to 1e-4 * mean(diagonal).
/// Throws NotPositiveDefinite naming `context` when every attempt fails;
/// the context is only built on failure.
Factorization factorize(const Eigen::MatrixXd& matrix, double base_jitter,
                        const std::function<std::string()>& context);

inline Factorization factorize(const Eigen::MatrixXd& matrix, double base_jitter, const std::string& context)
{
    return factorize(matrix, base_jitter, [&] { return context; });
}

/// Reference assembly of the N x N covariance for output k through cov_entry.
CovarianceBlock build_block(const Dataset& dataset, std::size_t k, const HyperParams& params, KernelForm form,
                            double jitter);

/// Cross covariance (rows: `a`, cols: `b`) of the noise-free kernel term.
Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::span<const double> beta,
                                 double lambda_z, KernelForm form);

/// Precomputed per-dimension squared differences of a fixed input set, so
/// that repeated covariance assembly for new hyperparameters is a weighted
/// sum followed by one elementwise exp.
class SquaredDistanceCache {
public:
    explicit SquaredDistanceCache(const Eigen::MatrixXd& inputs);

    std::size_t size() const { return n_; }
    std::size_t dims() const { return per_dim_.size(); }

    /// Same values as build_block(...).matrix up to floating-point rounding.
    void fill_covariance(std::span<const double> beta, double lambda_z, double lambda_s, double lambda_o,
                         KernelForm form, Eigen::MatrixXd& out) const;

private:
    std::size_t n_ = 0;
    std::vector<Eigen::MatrixXd> per_dim_;
};

std::string describe(std::span<const double> theta);

} // namespace gptemper
