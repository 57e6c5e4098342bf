#include "gptemper/data.hpp"

#include "gptemper/errors.hpp"
#include "gptemper/rng.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace gptemper {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what)
{
    if (!m.allFinite()) throw DataError(std::string("non-finite entry in ") + what);
}

void check_names(const std::vector<std::string>& names, Eigen::Index cols, const char* what)
{
    if (static_cast<Eigen::Index>(names.size()) != cols)
        throw DataError(std::string(what) + " name count does not match column count");
}

Eigen::MatrixXd apply(const Eigen::MatrixXd& m, const std::vector<ColumnTransform>& t, bool forward)
{
    if (static_cast<std::size_t>(m.cols()) != t.size())
        throw SchemaError("column count " + std::to_string(m.cols()) + " does not match transform count " +
                          std::to_string(t.size()));
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            out(r, c) = forward ? t[c].forward(m(r, c)) : t[c].inverse(m(r, c));
    return out;
}

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

} // namespace

Dataset Dataset::from_raw(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                          std::vector<std::string> input_names, std::vector<std::string> output_names)
{
    if (inputs.rows() != outputs.rows()) throw DataError("input and output row counts differ");
    if (inputs.rows() < 2)
        throw DataError("insufficient data: need at least 2 training rows, got " + std::to_string(inputs.rows()));
    if (inputs.cols() < 1 || outputs.cols() < 1) throw DataError("need at least one input and one output column");
    require_finite(inputs, "inputs");
    require_finite(outputs, "outputs");
    check_names(input_names, inputs.cols(), "input");
    check_names(output_names, outputs.cols(), "output");

    Dataset ds;
    ds.input_names_ = std::move(input_names);
    ds.output_names_ = std::move(output_names);
    for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
        const double lo = inputs.col(c).minCoeff();
        const double hi = inputs.col(c).maxCoeff();
        if (!(hi > lo)) throw DataError("degenerate input column '" + ds.input_names_[c] + "': zero range");
        ds.input_transforms_.push_back({lo, hi - lo});
    }
    for (Eigen::Index c = 0; c < outputs.cols(); ++c) {
        const double mean = outputs.col(c).mean();
        const double var = (outputs.col(c).array() - mean).square().mean();
        if (!(var > 0.0)) throw DataError("degenerate output column '" + ds.output_names_[c] + "': zero variance");
        ds.output_transforms_.push_back({mean, std::sqrt(var)});
    }
    ds.inputs_ = apply(inputs, ds.input_transforms_, true);
    ds.outputs_ = apply(outputs, ds.output_transforms_, true);
    return ds;
}

Dataset Dataset::with_transform(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                                const Dataset& reference)
{
    if (inputs.rows() != outputs.rows()) throw DataError("input and output row counts differ");
    require_finite(inputs, "inputs");
    require_finite(outputs, "outputs");
    Dataset ds;
    ds.input_names_ = reference.input_names_;
    ds.output_names_ = reference.output_names_;
    ds.input_transforms_ = reference.input_transforms_;
    ds.output_transforms_ = reference.output_transforms_;
    ds.inputs_ = apply(inputs, ds.input_transforms_, true);
    ds.outputs_ = apply(outputs, ds.output_transforms_, true);
    return ds;
}

Dataset Dataset::from_normalized(Eigen::MatrixXd inputs, Eigen::MatrixXd outputs,
                                 std::vector<std::string> input_names, std::vector<std::string> output_names,
                                 std::vector<ColumnTransform> input_transforms,
                                 std::vector<ColumnTransform> output_transforms)
{
    if (inputs.rows() != outputs.rows()) throw DataError("input and output row counts differ");
    check_names(input_names, inputs.cols(), "input");
    check_names(output_names, outputs.cols(), "output");
    if (input_transforms.size() != input_names.size() || output_transforms.size() != output_names.size())
        throw SchemaError("transform count does not match column count");
    require_finite(inputs, "inputs");
    require_finite(outputs, "outputs");
    Dataset ds;
    ds.inputs_ = std::move(inputs);
    ds.outputs_ = std::move(outputs);
    ds.input_names_ = std::move(input_names);
    ds.output_names_ = std::move(output_names);
    ds.input_transforms_ = std::move(input_transforms);
    ds.output_transforms_ = std::move(output_transforms);
    return ds;
}

Eigen::MatrixXd Dataset::normalize_inputs(const Eigen::MatrixXd& raw) const { return apply(raw, input_transforms_, true); }

Eigen::MatrixXd Dataset::denormalize_inputs(const Eigen::MatrixXd& normalized) const
{
    return apply(normalized, input_transforms_, false);
}

Eigen::MatrixXd Dataset::standardize_outputs(const Eigen::MatrixXd& raw) const
{
    return apply(raw, output_transforms_, true);
}

Eigen::MatrixXd Dataset::denormalize_outputs(const Eigen::MatrixXd& standardized) const
{
    return apply(standardized, output_transforms_, false);
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (table.header.empty()) {
            if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
                cells.front() = trim(cells.front().substr(3));
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size())
            throw DataError("row " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                            " cells, got " + std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string& cell = cells[c];
            char* end = nullptr;
            errno = 0;
            const double v = cell.empty() ? 0.0 : std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v))
                throw DataError("parse error at row " + std::to_string(line_no) + ", column '" + table.header[c] +
                                "': '" + cell + "' is not a finite number");
            row.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

TrainTestSplit load_dataset(const std::filesystem::path& path, const std::vector<std::string>& output_columns,
                            double test_fraction, std::uint64_t seed)
{
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw DomainError("test_fraction must lie in [0, 1)");
    if (output_columns.empty()) throw DataError("no output columns given");
    const CsvTable table = read_csv(path);

    std::vector<std::size_t> out_idx;
    for (const auto& name : output_columns) {
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it == table.header.end()) throw DataError("missing column '" + name + "' in '" + path.string() + "'");
        out_idx.push_back(static_cast<std::size_t>(it - table.header.begin()));
    }
    std::vector<std::size_t> in_idx;
    std::vector<std::string> in_names;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (std::find(out_idx.begin(), out_idx.end(), c) != out_idx.end()) continue;
        in_idx.push_back(c);
        in_names.push_back(table.header[c]);
    }
    if (in_idx.empty()) throw DataError("no input columns left after removing outputs");

    const std::size_t n = table.rows.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    if (n_test > 0) {
        Rng rng = make_stream(seed, StreamTag::split);
        std::shuffle(order.begin(), order.end(), rng);
    }
    std::vector<std::size_t> test_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    if (train_rows.size() < 2)
        throw DataError("insufficient data: " + std::to_string(train_rows.size()) + " training rows after split");

    auto gather = [&](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < cols.size(); ++c) m(r, c) = table.rows[rows[r]][cols[c]];
        return m;
    };

    TrainTestSplit split;
    split.train = Dataset::from_raw(gather(train_rows, in_idx), gather(train_rows, out_idx), in_names, output_columns);
    split.test = Dataset::with_transform(gather(test_rows, in_idx), gather(test_rows, out_idx), split.train);
    return split;
}

std::optional<std::size_t> ParamLayout::owner(std::size_t i) const
{
    if (i >= m * stride()) return std::nullopt;
    return i / stride();
}

std::vector<std::string> ParamLayout::field_names() const
{
    std::vector<std::string> names;
    names.reserve(size());
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t l = 0; l < d; ++l)
            names.push_back("beta[" + std::to_string(k + 1) + "][" + std::to_string(l + 1) + "]");
        names.push_back("lambda_z[" + std::to_string(k + 1) + "]");
        names.push_back("lambda_s[" + std::to_string(k + 1) + "]");
    }
    names.emplace_back("lambda_o");
    return names;
}

HyperParams::HyperParams(std::size_t d, std::size_t m, double fill)
    : layout_{d, m}, values_(hyperparam_count(d, m), fill)
{
    if (d < 1 || m < 1) throw DomainError("hyperparameters need d >= 1 and m >= 1");
}

HyperParams::HyperParams(std::size_t d, std::size_t m, std::vector<double> values)
    : layout_{d, m}, values_(std::move(values))
{
    if (d < 1 || m < 1) throw DomainError("hyperparameters need d >= 1 and m >= 1");
    if (values_.size() != hyperparam_count(d, m))
        throw DomainError("expected " + std::to_string(hyperparam_count(d, m)) + " hyperparameters, got " +
                          std::to_string(values_.size()));
}

bool HyperParams::valid() const
{
    return !values_.empty() && std::all_of(values_.begin(), values_.end(), [](double v) {
        return std::isfinite(v) && v > 0.0;
    });
}

void RunConfig::validate() const
{
    if (particles < 1) throw DomainError("particles must be positive");
    if (steps_per_gamma < 1) throw DomainError("steps_per_gamma must be positive");
    if (!(gamma0 > 0.0 && gamma0 < 1.0)) throw DomainError("gamma0 must lie in (0, 1)");
    if (mcmc_total_steps < 1 || mcmc_init_steps < 1) throw DomainError("MCMC step counts must be positive");
    if (mcmc_init_steps >= mcmc_total_steps) throw DomainError("mcmc_init_steps must be below mcmc_total_steps");
    if (tune_interval < 1) throw DomainError("tune_interval must be positive");
    if (workers < 1) throw DomainError("workers must be positive");
    if (!(jitter > 0.0)) throw DomainError("jitter must be positive");
    if (!(initial_width > 0.0)) throw DomainError("initial_width must be positive");
    if (trace_interval < 1) throw DomainError("trace_interval must be positive");
    if (const auto* grid = std::get_if<GridSchedule>(&schedule)) {
        if (grid->values.empty()) {
            if (grid->count < 2) throw DomainError("grid count must be at least 2");
        } else {
            if (grid->values.size() < 2) throw DomainError("explicit grid needs at least 2 entries");
            if (!(grid->values.front() > 0.0)) throw DomainError("grid must start above 0");
            if (grid->values.back() != 1.0) throw DomainError("grid must end at exactly 1");
            for (std::size_t i = 1; i < grid->values.size(); ++i)
                if (!(grid->values[i] > grid->values[i - 1])) throw DomainError("grid must be strictly ascending");
        }
    } else {
        const double r = std::get<AdaptiveSchedule>(schedule).ess_reduction;
        if (!(r > 0.0 && r < 1.0)) throw DomainError("ess_reduction must lie in (0, 1)");
    }
}

std::string to_string(Engine engine) { return engine == Engine::mcmc ? "mcmc" : "asmc"; }

std::string to_string(KernelForm form)
{
    return form == KernelForm::exponentiated_sum ? "exponentiated-sum" : "additive-sum";
}

Engine parse_engine(const std::string& name)
{
    if (name == "mcmc") return Engine::mcmc;
    if (name == "asmc") return Engine::asmc;
    throw DomainError("unknown engine '" + name + "'");
}

KernelForm parse_kernel_form(const std::string& name)
{
    if (name == "exponentiated-sum" || name == "exp-sum") return KernelForm::exponentiated_sum;
    if (name == "additive-sum" || name == "additive") return KernelForm::additive_sum;
    throw DomainError("unknown kernel form '" + name + "'");
}

} // namespace gptemper
