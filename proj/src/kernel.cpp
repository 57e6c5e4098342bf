#include "gptemper/kernel.hpp"

#include "gptemper/errors.hpp"

#include <cmath>
#include <sstream>

namespace gptemper {

namespace {

void require_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive and finite");
}

} // namespace

double kernel_term(std::span<const double> xi, std::span<const double> xj, std::span<const double> beta,
                   double lambda_z, KernelForm form)
{
    if (xi.size() != beta.size() || xj.size() != beta.size()) throw DomainError("input length does not match beta");
    require_positive(lambda_z, "lambda_z");
    if (form == KernelForm::exponentiated_sum) {
        double s = 0.0;
        for (std::size_t l = 0; l < beta.size(); ++l) {
            require_positive(beta[l], "beta");
            const double dx = xi[l] - xj[l];
            s += beta[l] * dx * dx;
        }
        return std::exp(-s) / lambda_z;
    }
    double s = 0.0;
    for (std::size_t l = 0; l < beta.size(); ++l) {
        require_positive(beta[l], "beta");
        const double dx = xi[l] - xj[l];
        s += std::exp(-beta[l] * dx * dx);
    }
    return s / lambda_z;
}

double cov_entry(std::span<const double> xi, std::span<const double> xj, std::span<const double> beta,
                 double lambda_z, double lambda_s, double lambda_o, bool same_point, KernelForm form)
{
    require_positive(lambda_s, "lambda_s");
    require_positive(lambda_o, "lambda_o");
    double v = kernel_term(xi, xj, beta, lambda_z, form);
    if (same_point) v += 1.0 / lambda_s + 1.0 / lambda_o;
    return v;
}

Factorization factorize(const Eigen::MatrixXd& matrix, double base_jitter,
                        const std::function<std::string()>& context)
{
    Factorization f;
    const Eigen::Index n = matrix.rows();
    const double cap = 1e-4 * matrix.diagonal().mean();

    auto attempt = [&](double jitter) {
        if (jitter == 0.0) {
            f.llt.compute(matrix);
        } else {
            Eigen::MatrixXd jittered = matrix;
            jittered.diagonal().array() += jitter;
            f.llt.compute(jittered);
        }
        if (f.llt.info() != Eigen::Success) return false;
        const auto diag = f.llt.matrixLLT().diagonal();
        if (!diag.allFinite() || (diag.array() <= 0.0).any()) return false;
        f.log_det = 2.0 * diag.array().log().sum();
        f.jitter_used = jitter;
        return true;
    };

    if (n > 0 && attempt(0.0)) return f;
    for (double jitter = base_jitter; jitter <= cap; jitter *= 10.0)
        if (attempt(jitter)) return f;
    throw NotPositiveDefinite("covariance not positive definite after jitter up to " + std::to_string(cap) +
                              " at theta = " + context());
}

CovarianceBlock build_block(const Dataset& dataset, std::size_t k, const HyperParams& params, KernelForm form,
                            double jitter)
{
    if (k >= dataset.output_dim()) throw DomainError("output index out of range");
    if (params.input_dim() != dataset.input_dim() || params.output_dim() != dataset.output_dim())
        throw DomainError("hyperparameter shape does not match dataset");
    const auto n = static_cast<Eigen::Index>(dataset.size());
    const Eigen::MatrixXd& x = dataset.inputs();
    // Row-major copy so each point is a contiguous span.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = x;
    const auto d = static_cast<std::size_t>(x.cols());
    auto point = [&](Eigen::Index i) { return std::span<const double>(rows.data() + i * rows.cols(), d); };

    CovarianceBlock block;
    block.matrix.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = cov_entry(point(i), point(j), params.beta(k), params.lambda_z(k), params.lambda_s(k),
                                       params.lambda_o(), i == j, form);
            block.matrix(i, j) = v;
            block.matrix(j, i) = v;
        }
    }
    Factorization f = factorize(block.matrix, jitter, [&] { return describe(params.values()); });
    block.cholesky = f.llt.matrixL();
    block.log_det = f.log_det;
    block.jitter_used = f.jitter_used;
    return block;
}

Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::span<const double> beta,
                                 double lambda_z, KernelForm form)
{
    if (a.cols() != b.cols() || static_cast<std::size_t>(a.cols()) != beta.size())
        throw DomainError("cross_covariance: dimension mismatch");
    require_positive(lambda_z, "lambda_z");
    for (double v : beta) require_positive(v, "beta");
    Eigen::MatrixXd out(a.rows(), b.rows());
    if (form == KernelForm::exponentiated_sum) {
        out.setZero();
        for (Eigen::Index l = 0; l < a.cols(); ++l) {
            for (Eigen::Index j = 0; j < b.rows(); ++j)
                out.col(j).array() += beta[l] * (a.col(l).array() - b(j, l)).square();
        }
        out = (-out.array()).exp() / lambda_z;
    } else {
        out.setZero();
        for (Eigen::Index l = 0; l < a.cols(); ++l) {
            for (Eigen::Index j = 0; j < b.rows(); ++j)
                out.col(j).array() += (-beta[l] * (a.col(l).array() - b(j, l)).square()).exp();
        }
        out /= lambda_z;
    }
    return out;
}

SquaredDistanceCache::SquaredDistanceCache(const Eigen::MatrixXd& inputs)
    : n_(static_cast<std::size_t>(inputs.rows()))
{
    const Eigen::Index n = inputs.rows();
    per_dim_.reserve(static_cast<std::size_t>(inputs.cols()));
    for (Eigen::Index l = 0; l < inputs.cols(); ++l) {
        Eigen::MatrixXd dist(n, n);
        for (Eigen::Index j = 0; j < n; ++j) dist.col(j) = (inputs.col(l).array() - inputs(j, l)).square();
        per_dim_.push_back(std::move(dist));
    }
}

void SquaredDistanceCache::fill_covariance(std::span<const double> beta, double lambda_z, double lambda_s,
                                           double lambda_o, KernelForm form, Eigen::MatrixXd& out) const
{
    if (beta.size() != per_dim_.size()) throw DomainError("beta length does not match cached inputs");
    require_positive(lambda_z, "lambda_z");
    require_positive(lambda_s, "lambda_s");
    require_positive(lambda_o, "lambda_o");
    for (double v : beta) require_positive(v, "beta");
    const auto n = static_cast<Eigen::Index>(n_);
    out.resize(n, n);
    // Lower triangle column by column, then mirrored: halves the exp calls.
    for (Eigen::Index j = 0; j < n; ++j) {
        auto col = out.col(j).tail(n - j);
        if (form == KernelForm::exponentiated_sum) {
            col = beta[0] * per_dim_[0].col(j).tail(n - j);
            for (std::size_t l = 1; l < per_dim_.size(); ++l) col += beta[l] * per_dim_[l].col(j).tail(n - j);
            col = (-col.array()).exp() / lambda_z;
        } else {
            col = (-beta[0] * per_dim_[0].col(j).tail(n - j).array()).exp();
            for (std::size_t l = 1; l < per_dim_.size(); ++l)
                col.array() += (-beta[l] * per_dim_[l].col(j).tail(n - j).array()).exp();
            col /= lambda_z;
        }
    }
    for (Eigen::Index j = 0; j + 1 < n; ++j) out.row(j).tail(n - j - 1) = out.col(j).tail(n - j - 1).transpose();
    out.diagonal().array() += 1.0 / lambda_s + 1.0 / lambda_o;
}

std::string describe(std::span<const double> theta)
{
    std::ostringstream os;
    os.precision(6);
    os << '[';
    for (std::size_t i = 0; i < theta.size(); ++i) os << (i ? ", " : "") << theta[i];
    os << ']';
    return os.str();
}

} // namespace gptemper
