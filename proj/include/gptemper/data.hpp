#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gptemper {

// normalized = (raw - shift) / scale
struct ColumnTransform {
    double shift = 0.0;
    double scale = 1.0;

    double forward(double raw) const { return (raw - shift) / scale; }
    double inverse(double normalized) const { return normalized * scale + shift; }
};

/// Training or test data. Inputs are stored min-max normalized to [0, 1]
/// (relative to the training split) and outputs standardized to zero mean
/// and unit variance, so every GP in this library is zero-mean.
class Dataset {
public:
    Dataset() = default;

    /// Computes the transforms from the data itself. Requires N >= 2 and
    /// no constant columns.
    static Dataset from_raw(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                            std::vector<std::string> input_names, std::vector<std::string> output_names);

    /// Applies the transforms of `reference` (used for held-out splits). Any N, including 0.
    static Dataset with_transform(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                                  const Dataset& reference);

    /// Rebuilds a dataset from already normalized values, e.g. when loading a model file.
    static Dataset from_normalized(Eigen::MatrixXd inputs, Eigen::MatrixXd outputs,
                                   std::vector<std::string> input_names, std::vector<std::string> output_names,
                                   std::vector<ColumnTransform> input_transforms,
                                   std::vector<ColumnTransform> output_transforms);

    std::size_t size() const { return static_cast<std::size_t>(inputs_.rows()); }
    std::size_t input_dim() const { return static_cast<std::size_t>(inputs_.cols()); }
    std::size_t output_dim() const { return static_cast<std::size_t>(outputs_.cols()); }

    const Eigen::MatrixXd& inputs() const { return inputs_; }
    const Eigen::MatrixXd& outputs() const { return outputs_; }
    const std::vector<std::string>& input_names() const { return input_names_; }
    const std::vector<std::string>& output_names() const { return output_names_; }
    const std::vector<ColumnTransform>& input_transforms() const { return input_transforms_; }
    const std::vector<ColumnTransform>& output_transforms() const { return output_transforms_; }

    Eigen::MatrixXd normalize_inputs(const Eigen::MatrixXd& raw) const;
    Eigen::MatrixXd denormalize_inputs(const Eigen::MatrixXd& normalized) const;
    Eigen::MatrixXd standardize_outputs(const Eigen::MatrixXd& raw) const;
    Eigen::MatrixXd denormalize_outputs(const Eigen::MatrixXd& standardized) const;

    Eigen::MatrixXd raw_inputs() const { return denormalize_inputs(inputs_); }
    Eigen::MatrixXd raw_outputs() const { return denormalize_outputs(outputs_); }

private:
    Eigen::MatrixXd inputs_;
    Eigen::MatrixXd outputs_;
    std::vector<std::string> input_names_;
    std::vector<std::string> output_names_;
    std::vector<ColumnTransform> input_transforms_;
    std::vector<ColumnTransform> output_transforms_;
};

struct TrainTestSplit {
    Dataset train;
    Dataset test;
};

/// Reads a comma-separated file with a header row. Columns named in
/// `output_columns` become outputs, every other column an input. The split
/// is a seeded uniform draw without replacement; transforms are fitted on
/// the training rows only.
TrainTestSplit load_dataset(const std::filesystem::path& path, const std::vector<std::string>& output_columns,
                            double test_fraction, std::uint64_t seed = 0);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

constexpr std::size_t hyperparam_count(std::size_t d, std::size_t m) { return m * (d + 2) + 1; }

/// Index arithmetic for the flat hyperparameter vector
/// [beta(1) lambda_z(1) lambda_s(1) ... beta(m) lambda_z(m) lambda_s(m) lambda_o].
struct ParamLayout {
    std::size_t d = 1;
    std::size_t m = 1;

    std::size_t size() const { return hyperparam_count(d, m); }
    std::size_t stride() const { return d + 2; }
    std::size_t beta(std::size_t k, std::size_t l) const { return k * stride() + l; }
    std::size_t lambda_z(std::size_t k) const { return k * stride() + d; }
    std::size_t lambda_s(std::size_t k) const { return k * stride() + d + 1; }
    std::size_t lambda_o() const { return m * stride(); }

    /// Output owning scalar i, or nullopt for the shared lambda_o.
    std::optional<std::size_t> owner(std::size_t i) const;
    std::vector<std::string> field_names() const;

    bool operator==(const ParamLayout&) const = default;
};

class HyperParams {
public:
    HyperParams() = default;
    HyperParams(std::size_t d, std::size_t m, double fill = 1.0);
    HyperParams(std::size_t d, std::size_t m, std::vector<double> values);

    const ParamLayout& layout() const { return layout_; }
    std::size_t input_dim() const { return layout_.d; }
    std::size_t output_dim() const { return layout_.m; }
    std::size_t size() const { return values_.size(); }

    std::span<const double> beta(std::size_t k) const
    {
        return std::span<const double>(values_).subspan(layout_.beta(k, 0), layout_.d);
    }
    double lambda_z(std::size_t k) const { return values_[layout_.lambda_z(k)]; }
    double lambda_s(std::size_t k) const { return values_[layout_.lambda_s(k)]; }
    double lambda_o() const { return values_[layout_.lambda_o()]; }

    double& beta(std::size_t k, std::size_t l) { return values_[layout_.beta(k, l)]; }
    double& lambda_z(std::size_t k) { return values_[layout_.lambda_z(k)]; }
    double& lambda_s(std::size_t k) { return values_[layout_.lambda_s(k)]; }
    double& lambda_o() { return values_[layout_.lambda_o()]; }

    std::span<const double> values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// All entries finite and strictly positive.
    bool valid() const;

    bool operator==(const HyperParams&) const = default;

private:
    ParamLayout layout_;
    std::vector<double> values_;
};

enum class Engine { mcmc, asmc };

enum class KernelForm {
    exponentiated_sum, // (1/lz) exp(-sum_l b_l dx_l^2), standard ARD
    additive_sum,      // (1/lz) sum_l exp(-b_l dx_l^2)
};

struct GridSchedule {
    std::size_t count = 10;
    std::vector<double> values; // explicit ascending grid; overrides count when non-empty
};

struct AdaptiveSchedule {
    double ess_reduction = 0.9;
};

using ScheduleSpec = std::variant<GridSchedule, AdaptiveSchedule>;

/// Defaults follow the workstation tier: 60 particles, a 10-point grid,
/// one sweep per temperature, gamma0 = 1e-3, and a 5800-sweep chain of
/// which 1000 are initialization.
struct RunConfig {
    Engine engine = Engine::asmc;
    std::size_t particles = 60;
    std::size_t steps_per_gamma = 1;
    ScheduleSpec schedule = GridSchedule{};
    double gamma0 = 1e-3;
    std::size_t mcmc_total_steps = 5800;
    std::size_t mcmc_init_steps = 1000;
    std::size_t tune_interval = 50;
    std::uint64_t seed = 0;
    int workers = 1;
    KernelForm kernel_form = KernelForm::exponentiated_sum;
    double jitter = 1e-10;
    double initial_width = 0.5;
    // MCMC trace row spacing in sweeps.
    std::size_t trace_interval = 50;

    // Scalars outside the mask are never proposed (empty mask: all free).
    std::vector<bool> free_mask;
    // Starting point for the chain and the values of pinned scalars.
    std::optional<std::vector<double>> start;

    /// Throws DomainError on inconsistent settings.
    void validate() const;
};

std::string to_string(Engine engine);
std::string to_string(KernelForm form);
Engine parse_engine(const std::string& name);
KernelForm parse_kernel_form(const std::string& name);

} // namespace gptemper
