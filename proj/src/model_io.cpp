#include "gptemper/model_io.hpp"

#include "gptemper/errors.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

namespace gptemper {

using nlohmann::json;

json config_to_json(const RunConfig& config)
{
    json j;
    j["engine"] = to_string(config.engine);
    j["particles"] = config.particles;
    j["steps_per_gamma"] = config.steps_per_gamma;
    if (const auto* grid = std::get_if<GridSchedule>(&config.schedule)) {
        j["schedule"] = {{"mode", "grid"}, {"count", grid->count}, {"values", grid->values}};
    } else {
        j["schedule"] = {{"mode", "adaptive"},
                         {"ess_reduction", std::get<AdaptiveSchedule>(config.schedule).ess_reduction}};
    }
    j["gamma0"] = config.gamma0;
    j["mcmc_total_steps"] = config.mcmc_total_steps;
    j["mcmc_init_steps"] = config.mcmc_init_steps;
    j["tune_interval"] = config.tune_interval;
    j["seed"] = config.seed;
    j["workers"] = config.workers;
    j["kernel_form"] = to_string(config.kernel_form);
    j["jitter"] = config.jitter;
    j["initial_width"] = config.initial_width;
    j["trace_interval"] = config.trace_interval;
    return j;
}

std::string config_hash(const json& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : config.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, std::size_t cols)
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != cols) throw SchemaError("model matrix row has the wrong length");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
    return m;
}

json transforms_to_json(const std::vector<ColumnTransform>& t)
{
    json a = json::array();
    for (const auto& c : t) a.push_back({{"shift", c.shift}, {"scale", c.scale}});
    return a;
}

std::vector<ColumnTransform> transforms_from_json(const json& j)
{
    std::vector<ColumnTransform> t;
    for (const auto& c : j) t.push_back({c.at("shift").get<double>(), c.at("scale").get<double>()});
    return t;
}

} // namespace

json model_to_json(const Model& model)
{
    const auto& ds = model.train;
    const ParamLayout layout{ds.input_dim(), ds.output_dim()};
    json j;
    j["format"] = kModelFormat;
    j["version"] = kVersion;
    j["provenance"] = {{"engine", model.ensemble.provenance.engine},
                       {"seed", model.ensemble.provenance.seed},
                       {"schedule", model.ensemble.provenance.schedule},
                       {"config_hash", config_hash(model.config)}};
    j["config"] = model.config;
    j["kernel_form"] = to_string(model.kernel_form);
    j["jitter"] = model.jitter;
    json priors = json::array();
    for (const auto& p : model.priors.scalars) priors.push_back({{"family", "gamma"}, {"shape", p.shape}, {"rate", p.rate}});
    j["priors"] = priors;
    j["dataset"] = {{"input_names", ds.input_names()},
                    {"output_names", ds.output_names()},
                    {"input_transforms", transforms_to_json(ds.input_transforms())},
                    {"output_transforms", transforms_to_json(ds.output_transforms())},
                    {"inputs", matrix_to_json(ds.inputs())},
                    {"outputs", matrix_to_json(ds.outputs())}};
    j["field_names"] = layout.field_names();
    json samples = json::array();
    for (const auto& s : model.ensemble.samples) samples.push_back(std::vector<double>(s.values().begin(), s.values().end()));
    j["samples"] = samples;
    j["weights"] = model.ensemble.weights;
    return j;
}

Model model_from_json(const json& j)
{
    try {
        if (j.at("format").get<std::string>() != kModelFormat) throw SchemaError("not a gptemper model file");
        Model model;
        const json& ds = j.at("dataset");
        auto in_names = ds.at("input_names").get<std::vector<std::string>>();
        auto out_names = ds.at("output_names").get<std::vector<std::string>>();
        const std::size_t d = in_names.size();
        const std::size_t m = out_names.size();
        model.train = Dataset::from_normalized(matrix_from_json(ds.at("inputs"), d), matrix_from_json(ds.at("outputs"), m),
                                               std::move(in_names), std::move(out_names),
                                               transforms_from_json(ds.at("input_transforms")),
                                               transforms_from_json(ds.at("output_transforms")));
        model.kernel_form = parse_kernel_form(j.at("kernel_form").get<std::string>());
        model.jitter = j.at("jitter").get<double>();
        model.config = j.value("config", json::object());
        for (const auto& p : j.at("priors")) model.priors.scalars.push_back({p.at("shape").get<double>(), p.at("rate").get<double>()});
        for (const auto& s : j.at("samples")) model.ensemble.samples.emplace_back(d, m, s.get<std::vector<double>>());
        model.ensemble.weights = j.at("weights").get<std::vector<double>>();
        const json& prov = j.at("provenance");
        model.ensemble.provenance = {prov.at("engine").get<std::string>(), prov.at("seed").get<std::uint64_t>(),
                                     prov.at("schedule").get<std::string>()};
        model.ensemble.validate();
        return model;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed model file: ") + e.what());
    } catch (const DomainError& e) {
        throw SchemaError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const Model& model, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << model_to_json(model).dump(1) << '\n';
}

Model load_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open model '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
    }
    return model_from_json(j);
}

} // namespace gptemper
