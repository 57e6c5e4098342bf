#include "gptemper/synthetic.hpp"

#include "gptemper/errors.hpp"
#include "gptemper/smc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace gptemper {

namespace {

void require_length(std::span<const double> x, std::size_t n, const char* name)
{
    if (x.size() != n)
        throw DomainError(std::string(name) + " expects " + std::to_string(n) + " inputs, got " +
                          std::to_string(x.size()));
}

std::vector<std::pair<double, double>> uniform_box(std::size_t d, double lo, double hi)
{
    return std::vector<std::pair<double, double>>(d, {lo, hi});
}

template <double (*F)(std::span<const double>)>
std::vector<double> scalar(std::span<const double> x)
{
    return {F(x)};
}

} // namespace

double scalability_fn(std::span<const double> x)
{
    require_length(x, 10, "scalability_fn");
    using std::cos;
    using std::sin;
    return 3.0 * sin(x[0]) * x[1] + cos(x[2]) * sin(x[3]) + sin(x[4]) * sin(x[5]) + sin(x[6]) + sin(x[7]) +
           7.0 * x[8] + 6.0 * x[9];
}

double torsion_fn(std::span<const double> x)
{
    require_length(x, 18, "torsion_fn");
    for (double v : x)
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("torsion_fn inputs must be positive");
    constexpr double pi = std::numbers::pi;
    const double* shaft_d = &x[0];
    const double* shaft_len = &x[3];
    const double* shaft_g = &x[6];
    const double* disk_d = &x[12];
    const double* disk_t = &x[14];
    const double* disk_rho = &x[16];

    double stiffness[3];
    for (int i = 0; i < 3; ++i) stiffness[i] = pi * shaft_g[i] * shaft_d[i] / (32.0 * shaft_len[i]);
    double inertia[2];
    for (int j = 0; j < 2; ++j) {
        const double mass = pi * disk_t[j] * disk_rho[j] * disk_d[j] / (4.0 * kGravityInch);
        inertia[j] = 0.5 * mass * (disk_d[j] / 2.0) * (disk_d[j] / 2.0);
    }
    const double& k1 = stiffness[0];
    const double& k2 = stiffness[1];
    const double& k3 = stiffness[2];
    const double a = 1.0;
    const double b = -((k1 + k2) / inertia[0] + (k2 + k3) / inertia[1]);
    const double c = (k1 * k2 + k2 * k3 + k3 * k1) / (inertia[0] * inertia[1]);
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) throw DomainError("torsion_fn: complex eigenvalue");
    return std::sqrt((-b + std::sqrt(disc)) / (2.0 * a)) / (2.0 * pi);
}

double quadratic4_fn(std::span<const double> x)
{
    require_length(x, 4, "quadratic4_fn");
    static constexpr double b[4] = {1.0, -1.0, 1.0, -1.0};
    double y = 0.5;
    for (std::size_t i = 0; i < 4; ++i) {
        y += b[i] * x[i];
        for (std::size_t j = 0; j < 4; ++j) {
            const double a = i == j ? static_cast<double>(i + 1) : 0.5;
            y += x[i] * a * x[j];
        }
    }
    return y;
}

double highdim100_fn(std::span<const double> x)
{
    require_length(x, 100, "highdim100_fn");
    double y = 0.0;
    for (std::size_t l = 0; l < 50; ++l) y += std::sin(x[2 * l]) * x[2 * l + 1];
    for (std::size_t l = 0; l < 100; ++l) y += static_cast<double>(l + 1) * x[l] / 100.0;
    return y;
}

std::vector<std::string> problem_names() { return {"scalability", "torsion", "quadratic4", "highdim100"}; }

SyntheticProblem make_problem(const std::string& name)
{
    SyntheticProblem p;
    p.name = name;
    if (name == "scalability") {
        p.d = 10;
        p.evaluator = scalar<scalability_fn>;
        p.input_box = uniform_box(10, 0.0, 1.0);
    } else if (name == "torsion") {
        p.d = 18;
        p.evaluator = scalar<torsion_fn>;
        p.input_box = {{1.0, 3.0},     {1.0, 3.0},     {1.0, 3.0},     // shaft diameters [in]
                       {10.0, 30.0},   {10.0, 30.0},   {10.0, 30.0},   // shaft lengths [in]
                       {1.1e7, 1.3e7}, {1.1e7, 1.3e7}, {1.1e7, 1.3e7}, // shear modulus [psi]
                       {0.27, 0.29},   {0.27, 0.29},   {0.27, 0.29},   // shaft weight density [lb/in^3]
                       {10.0, 14.0},   {10.0, 14.0},                   // disk diameters [in]
                       {2.0, 4.0},     {2.0, 4.0},                     // disk thickness [in]
                       {0.27, 0.29},   {0.27, 0.29}};                  // disk weight density [lb/in^3]
    } else if (name == "quadratic4") {
        p.d = 4;
        p.evaluator = scalar<quadratic4_fn>;
        p.input_box = uniform_box(4, -1.0, 1.0);
    } else if (name == "highdim100") {
        p.d = 100;
        p.evaluator = scalar<highdim100_fn>;
        p.input_box = uniform_box(100, -1.0, 1.0);
    } else {
        throw DomainError("unknown problem '" + name + "'");
    }
    return p;
}

Eigen::MatrixXd latin_hypercube(std::size_t n, const std::vector<std::pair<double, double>>& box, Rng& rng)
{
    const std::size_t d = box.size();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<std::size_t> strata(n);
    for (std::size_t l = 0; l < d; ++l) {
        const auto [lo, hi] = box[l];
        if (!(hi > lo)) throw DomainError("input box needs lo < hi");
        std::iota(strata.begin(), strata.end(), 0);
        std::shuffle(strata.begin(), strata.end(), rng);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (static_cast<double>(strata[i]) + uniform01(rng)) / static_cast<double>(n);
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = lo + (hi - lo) * u;
        }
    }
    return x;
}

SyntheticData generate(const SyntheticProblem& problem, std::size_t train_n, std::size_t test_n, std::uint64_t seed)
{
    Rng design = make_stream(seed, StreamTag::design);
    Rng noise = make_stream(seed, StreamTag::noise);
    auto evaluate = [&](const Eigen::MatrixXd& x, bool noisy) {
        Eigen::MatrixXd y(x.rows(), static_cast<Eigen::Index>(problem.m));
        std::vector<double> row(problem.d);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (std::size_t l = 0; l < problem.d; ++l) row[l] = x(i, static_cast<Eigen::Index>(l));
            const auto out = problem.evaluator(row);
            for (std::size_t k = 0; k < problem.m; ++k) {
                double v = out[k];
                if (noisy && problem.noise_sd > 0.0) v += problem.noise_sd * standard_normal(noise);
                y(i, static_cast<Eigen::Index>(k)) = v;
            }
        }
        return y;
    };

    const Eigen::MatrixXd x_train = latin_hypercube(train_n, problem.input_box, design);
    const Eigen::MatrixXd x_test = latin_hypercube(test_n, problem.input_box, design);
    std::vector<std::string> in_names, out_names;
    for (std::size_t l = 0; l < problem.d; ++l) in_names.push_back("x" + std::to_string(l + 1));
    for (std::size_t k = 0; k < problem.m; ++k) out_names.push_back("y" + std::to_string(k + 1));

    SyntheticData data;
    data.train = Dataset::from_raw(x_train, evaluate(x_train, true), in_names, out_names);
    data.test.inputs = data.train.normalize_inputs(x_test);
    data.test.outputs = evaluate(x_test, false);
    return data;
}

BenchmarkReport run_benchmark(const SyntheticProblem& problem, std::size_t train_n, std::size_t test_n,
                              const std::vector<Engine>& engines, RunConfig config, std::uint64_t seed)
{
    const SyntheticData data = generate(problem, train_n, test_n, seed);
    const PriorSpec priors = PriorSpec::weakly_informative(hyperparam_count(problem.d, problem.m));
    const HoldOut* test = data.test.empty() ? nullptr : &data.test;
    config.seed = seed;

    BenchmarkReport report{problem.name, train_n, test_n, seed, {}};
    for (const Engine engine : engines) {
        config.engine = engine;
        EngineReport er;
        er.engine = engine;
        er.result = engine == Engine::mcmc ? run_mcmc(data.train, config, priors, test)
                                           : run_asmc(data.train, config, priors, test);
        if (test) {
            const Eigen::VectorXd r = rmse(predict_mean(data.train, er.result.ensemble, test->inputs, config.kernel_form,
                                                        config.jitter, config.workers),
                                           test->outputs);
            er.final_rmse.assign(r.data(), r.data() + r.size());
        }
        report.engines.push_back(std::move(er));
    }
    return report;
}

} // namespace gptemper
