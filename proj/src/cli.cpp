#include "gptemper/cli.hpp"

#include "gptemper/errors.hpp"
#include "gptemper/mcmc.hpp"
#include "gptemper/model_io.hpp"
#include "gptemper/smc.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

namespace gptemper {

using nlohmann::json;

namespace {

struct EngineOptions {
    std::string engine = "asmc";
    std::size_t particles = 60;
    std::size_t grid = 10;
    std::vector<double> grid_values;
    double ess_reduction = 0.0;
    std::size_t steps_per_gamma = 1;
    double gamma0 = 1e-3;
    std::size_t steps = 5800;
    std::size_t init_steps = 1000;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string kernel = "exponentiated-sum";
    double jitter = 1e-10;
    std::size_t trace_every = 50;

    RunConfig to_config() const
    {
        RunConfig c;
        c.engine = parse_engine(engine);
        c.particles = particles;
        if (ess_reduction > 0.0)
            c.schedule = AdaptiveSchedule{ess_reduction};
        else
            c.schedule = GridSchedule{grid, grid_values};
        c.steps_per_gamma = steps_per_gamma;
        c.gamma0 = gamma0;
        c.mcmc_total_steps = steps;
        c.mcmc_init_steps = init_steps;
        c.seed = seed;
        c.workers = workers;
        c.kernel_form = parse_kernel_form(kernel);
        c.jitter = jitter;
        c.trace_interval = trace_every;
        c.validate();
        return c;
    }
};

int default_workers()
{
    if (const char* env = std::getenv("GPTEMPER_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void add_engine_options(CLI::App* app, EngineOptions& o, bool with_engine)
{
    if (with_engine)
        app->add_option("--engine", o.engine, "Sampler: mcmc or asmc")->check(CLI::IsMember({"mcmc", "asmc"}));
    app->add_option("--particles", o.particles, "ASMC particle count")->check(CLI::PositiveNumber);
    app->add_option("--grid", o.grid, "Number of uniformly spaced temperatures in [gamma0, 1]")->check(CLI::Range(2, 1000000));
    app->add_option("--grid-values", o.grid_values, "Explicit ascending temperature grid ending at 1")->delimiter(',');
    app->add_option("--ess-reduction", o.ess_reduction, "Adaptive schedule: target ESS ratio per step in (0,1)");
    app->add_option("--steps-per-gamma", o.steps_per_gamma, "Metropolis sweeps per temperature")->check(CLI::PositiveNumber);
    app->add_option("--gamma0", o.gamma0, "First temperature");
    app->add_option("--steps", o.steps, "MCMC total sweeps")->check(CLI::PositiveNumber);
    app->add_option("--init-steps", o.init_steps, "MCMC initialization sweeps")->check(CLI::PositiveNumber);
    app->add_option("--seed", o.seed, "Random seed");
    app->add_option("--workers", o.workers, "Worker threads (default: $GPTEMPER_WORKERS or hardware threads)")
        ->check(CLI::PositiveNumber);
    app->add_option("--kernel", o.kernel, "exponentiated-sum or additive-sum")
        ->check(CLI::IsMember({"exponentiated-sum", "additive-sum"}));
    app->add_option("--jitter", o.jitter, "Base Cholesky jitter")->check(CLI::PositiveNumber);
    app->add_option("--trace-every", o.trace_every, "MCMC trace row spacing in sweeps")->check(CLI::PositiveNumber);
}

Eigen::MatrixXd columns_by_name(const CsvTable& table, const std::vector<std::string>& names)
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t c = 0; c < names.size(); ++c) {
        const auto it = std::find(table.header.begin(), table.header.end(), names[c]);
        if (it == table.header.end()) throw SchemaError("input file lacks model column '" + names[c] + "'");
        const auto idx = static_cast<std::size_t>(it - table.header.begin());
        for (std::size_t r = 0; r < table.rows.size(); ++r)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = table.rows[r][idx];
    }
    return m;
}

double mean_of(const std::vector<double>& v)
{
    return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::optional<double> time_to(const Trace& t, double target)
{
    for (const auto& row : t.rows)
        if (!row.rmse.empty() && mean_of(row.rmse) <= target) return row.wall_time_s;
    return std::nullopt;
}

json optional_json(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

int cmd_train(const RunConfig& config, const std::string& data, const std::vector<std::string>& outputs,
              double test_fraction, const std::string& model_path, const std::string& trace_path, std::ostream& out)
{
    const TrainTestSplit split = load_dataset(data, outputs, test_fraction, config.seed);
    const PriorSpec priors = PriorSpec::weakly_informative(hyperparam_count(split.train.input_dim(), split.train.output_dim()));
    const HoldOut test = HoldOut::from(split.test);
    const HoldOut* test_ptr = test.empty() ? nullptr : &test;
    const EngineResult result = config.engine == Engine::mcmc ? run_mcmc(split.train, config, priors, test_ptr)
                                                              : run_asmc(split.train, config, priors, test_ptr);

    Model model{split.train, result.ensemble, priors, config.kernel_form, config.jitter, config_to_json(config)};
    save_model(model, model_path);
    write_trace_csv(result.trace, trace_path);
    out << "engine=" << to_string(config.engine) << " hyperparameters=" << hyperparam_count(split.train.input_dim(), split.train.output_dim())
        << " samples=" << result.ensemble.size() << " factorizations_per_worker=" << result.factorizations_per_worker
        << " wall_time_s=" << result.wall_time_s << '\n';
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input_path, const std::string& output_path, int workers)
{
    const Model model = load_model(model_path);
    const CsvTable table = read_csv(input_path);
    const auto& in_names = model.train.input_names();
    const auto& out_names = model.train.output_names();

    std::ofstream out(output_path);
    if (!out) throw Error("cannot write '" + output_path + "'");
    for (std::size_t k = 0; k < out_names.size(); ++k) out << (k ? "," : "") << out_names[k] << "_mean," << out_names[k] << "_var";
    out << '\n';
    if (table.header.empty()) return 0;

    for (const auto& h : table.header) {
        const bool known = std::find(in_names.begin(), in_names.end(), h) != in_names.end() ||
                           std::find(out_names.begin(), out_names.end(), h) != out_names.end();
        if (!known)
            throw SchemaError("input file column '" + h + "' is not one of the model's " + std::to_string(in_names.size()) +
                              " inputs");
    }
    const Eigen::MatrixXd raw = columns_by_name(table, in_names);
    if (raw.rows() == 0) return 0;
    const Prediction p = predict(model.train, model.ensemble, model.train.normalize_inputs(raw), model.kernel_form,
                                 model.jitter, workers);
    out << std::setprecision(17);
    for (Eigen::Index r = 0; r < p.mean.rows(); ++r) {
        for (Eigen::Index k = 0; k < p.mean.cols(); ++k) out << (k ? "," : "") << p.mean(r, k) << ',' << p.variance(r, k);
        out << '\n';
    }
    return 0;
}

int cmd_benchmark(const RunConfig& config, const SyntheticProblem& problem, std::size_t train_n, std::size_t test_n,
                  const std::vector<Engine>& engines, const std::string& out_dir, std::ostream& out)
{
    const BenchmarkReport report = run_benchmark(problem, train_n, test_n, engines, config, config.seed);

    std::filesystem::create_directories(out_dir);
    for (const auto& er : report.engines)
        write_trace_csv(er.result.trace, std::filesystem::path(out_dir) / ("trace_" + to_string(er.engine) + ".csv"));
    const json summary = benchmark_summary(report, config);
    std::ofstream(std::filesystem::path(out_dir) / "summary.json") << summary.dump(2) << '\n';

    out << std::left << std::setw(8) << "engine" << std::setw(14) << "wall_time_s" << std::setw(18) << "fact/worker"
        << std::setw(16) << "fact/total" << "rmse\n";
    for (const auto& er : report.engines) {
        out << std::setw(8) << to_string(er.engine) << std::setw(14) << er.result.wall_time_s << std::setw(18)
            << er.result.factorizations_per_worker << std::setw(16) << er.result.factorizations_total;
        for (double r : er.final_rmse) out << r << ' ';
        out << '\n';
    }
    return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, const std::string& merged_path,
                const std::string& verdict_path, std::optional<double> target, std::ostream& out)
{
    const Trace a = read_trace_csv(std::filesystem::path(a_path));
    const Trace b = read_trace_csv(std::filesystem::path(b_path));
    const json verdict = compare_verdict(a, b, target);
    {
        std::ofstream merged(merged_path);
        if (!merged) throw Error("cannot write '" + merged_path + "'");
        write_aligned(a, b, merged);
    }
    std::ofstream(verdict_path) << verdict.dump(2) << '\n';
    out << verdict.dump() << '\n';
    return 0;
}

} // namespace

json compare_verdict(const Trace& a, const Trace& b, std::optional<double> target_rmse)
{
    if (a.rows.empty() || b.rows.empty()) throw SchemaError("cannot compare an empty trace");
    const auto& last_a = a.rows.back();
    const auto& last_b = b.rows.back();
    json v;
    v["factorization_ratio"] = last_b.factorizations == 0
                                   ? json(nullptr)
                                   : json(static_cast<double>(last_a.factorizations) /
                                          static_cast<double>(last_b.factorizations));
    if (last_a.rmse.empty() || last_b.rmse.empty()) {
        v["rmse_ratio"] = nullptr;
        v["time_to_target_rmse"] = nullptr;
        return v;
    }
    const double ra = mean_of(last_a.rmse);
    const double rb = mean_of(last_b.rmse);
    v["rmse_ratio"] = ra / rb;
    const double target = target_rmse.value_or(std::max(ra, rb));
    v["time_to_target_rmse"] = {{"target", target}, {"a", optional_json(time_to(a, target))}, {"b", optional_json(time_to(b, target))}};
    return v;
}

void write_aligned(const Trace& a, const Trace& b, std::ostream& out)
{
    out << "wall_time_s,source,a_step_or_gamma,a_factorizations";
    for (std::size_t k = 0; k < a.rmse_columns; ++k) out << ",a_rmse_" << k + 1;
    out << ",b_step_or_gamma,b_factorizations";
    for (std::size_t k = 0; k < b.rmse_columns; ++k) out << ",b_rmse_" << k + 1;
    out << '\n' << std::setprecision(17);

    auto emit = [&](const Trace& t, const TraceRow* row) {
        if (!row) {
            out << ",,";
            for (std::size_t k = 0; k < t.rmse_columns; ++k) out << ',';
            return;
        }
        out << ',' << row->step_or_gamma << ',' << row->factorizations;
        for (std::size_t k = 0; k < t.rmse_columns; ++k) {
            out << ',';
            if (k < row->rmse.size()) out << row->rmse[k];
        }
    };

    std::size_t ia = 0, ib = 0;
    const TraceRow* cur_a = nullptr;
    const TraceRow* cur_b = nullptr;
    while (ia < a.rows.size() || ib < b.rows.size()) {
        const bool take_a =
            ib >= b.rows.size() || (ia < a.rows.size() && a.rows[ia].wall_time_s <= b.rows[ib].wall_time_s);
        double t = 0.0;
        const char* source = nullptr;
        if (take_a) {
            cur_a = &a.rows[ia++];
            t = cur_a->wall_time_s;
            source = "a";
        } else {
            cur_b = &b.rows[ib++];
            t = cur_b->wall_time_s;
            source = "b";
        }
        out << t << ',' << source;
        emit(a, cur_a);
        emit(b, cur_b);
        out << '\n';
    }
}

json benchmark_summary(const BenchmarkReport& report, const RunConfig& config)
{
    json s;
    s["version"] = kVersion;
    s["problem"] = report.problem;
    s["train_n"] = report.train_n;
    s["test_n"] = report.test_n;
    s["seed"] = report.seed;
    s["config"] = config_to_json(config);
    s["config_hash"] = config_hash(s["config"]);
    json engines = json::array();
    const EngineReport* mcmc = nullptr;
    const EngineReport* asmc = nullptr;
    for (const auto& er : report.engines) {
        json e;
        e["engine"] = to_string(er.engine);
        e["wall_time_s"] = er.result.wall_time_s;
        e["factorizations_total"] = er.result.factorizations_total;
        e["factorizations_per_worker"] = er.result.factorizations_per_worker;
        e["samples"] = er.result.ensemble.size();
        if (!er.final_rmse.empty()) e["final_rmse"] = er.final_rmse;
        if (er.engine == Engine::asmc) e["gammas"] = er.result.gammas;
        engines.push_back(e);
        (er.engine == Engine::mcmc ? mcmc : asmc) = &er;
    }
    s["engines"] = engines;
    if (mcmc && asmc) s["verdict"] = compare_verdict(asmc->result.trace, mcmc->result.trace);
    return s;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Fully Bayesian GP hyperparameter training with MCMC and tempered SMC", "gptemper"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    EngineOptions opts;
    opts.workers = default_workers();

    auto* train = app.add_subcommand("train", "Train a GP and write the posterior ensemble");
    std::string data, model_path = "model.json", trace_path = "trace.csv";
    std::vector<std::string> outputs;
    double test_fraction = 0.0;
    train->add_option("--data", data, "Training CSV with a header row")->required();
    train->add_option("--outputs", outputs, "Output column names")->required()->delimiter(',');
    train->add_option("--test-fraction", test_fraction, "Held-out fraction for the RMSE trace")->check(CLI::Range(0.0, 0.999999));
    train->add_option("--model", model_path, "Model JSON to write");
    train->add_option("--trace", trace_path, "Trace CSV to write");
    add_engine_options(train, opts, true);

    auto* pred = app.add_subcommand("predict", "Predict with a trained model");
    std::string pred_model, pred_input, pred_output = "predictions.csv";
    pred->add_option("--model", pred_model, "Model JSON")->required();
    pred->add_option("--input", pred_input, "CSV with the model's input columns")->required();
    pred->add_option("--output", pred_output, "Predictions CSV to write");
    pred->add_option("--workers", opts.workers, "Worker threads")->check(CLI::PositiveNumber);

    auto* bench = app.add_subcommand("benchmark", "Run engines on a synthetic problem");
    std::string problem, out_dir = ".";
    std::size_t train_n = 200, test_n = 500;
    std::vector<std::string> engines{"mcmc", "asmc"};
    double noise_sd = 0.0;
    bench->add_option("--problem", problem, "scalability, torsion, quadratic4 or highdim100")->required();
    bench->add_option("--train-n", train_n, "Training points");
    bench->add_option("--test-n", test_n, "Test points (0 disables RMSE)");
    bench->add_option("--engines", engines, "Engines to run")->delimiter(',');
    bench->add_option("--noise-sd", noise_sd, "Gaussian noise added to training outputs");
    bench->add_option("--out-dir", out_dir, "Directory for traces and summary.json");
    add_engine_options(bench, opts, false);

    auto* cmp = app.add_subcommand("compare", "Compare two trace files");
    std::string trace_a, trace_b, merged = "compare.csv", verdict = "verdict.json";
    std::optional<double> target;
    cmp->add_option("--a", trace_a, "First trace CSV")->required();
    cmp->add_option("--b", trace_b, "Second trace CSV")->required();
    cmp->add_option("--out", merged, "Aligned CSV to write");
    cmp->add_option("--verdict", verdict, "Verdict JSON to write");
    cmp->add_option("--target-rmse", target, "RMSE level for time-to-target");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n' << "run with --help for usage\n";
        return 2;
    }

    // Settings that parse but are inconsistent are usage errors too.
    RunConfig config;
    SyntheticProblem problem_def;
    std::vector<Engine> engine_list;
    try {
        if (*train || *bench) config = opts.to_config();
        if (*bench) {
            problem_def = make_problem(problem);
            problem_def.noise_sd = noise_sd;
            for (const auto& e : engines) engine_list.push_back(parse_engine(e));
            if (engine_list.empty()) throw DomainError("no engines given");
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*train) return cmd_train(config, data, outputs, test_fraction, model_path, trace_path, out);
        if (*pred) return cmd_predict(pred_model, pred_input, pred_output, opts.workers);
        if (*bench) return cmd_benchmark(config, problem_def, train_n, test_n, engine_list, out_dir, out);
        if (*cmp) return cmd_compare(trace_a, trace_b, merged, verdict, target, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace gptemper
