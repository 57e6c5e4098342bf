#include "gptemper/smc.hpp"

#include "gptemper/errors.hpp"
#include "stopwatch.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>

namespace gptemper {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Runs body(j) for j in [0, n) on `workers` threads with a static schedule
// and rethrows the first exception (lowest index) after the loop.
template <typename Body>
void parallel_for(std::size_t n, int workers, Body&& body)
{
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(workers) schedule(static)
    for (std::int64_t j = 0; j < count; ++j) {
        try {
            body(static_cast<std::size_t>(j));
        } catch (...) {
            errors[static_cast<std::size_t>(j)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double log_sum_exp(std::span<const double> v)
{
    const double mx = *std::max_element(v.begin(), v.end());
    if (mx == kNegInf) throw DegeneratePopulation("every particle weight is zero");
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

std::vector<double> incremented(std::span<const Particle> population, double delta_gamma)
{
    std::vector<double> lw(population.size());
    for (std::size_t j = 0; j < population.size(); ++j) {
        const double ll = population[j].chain.log_target.log_likelihood;
        lw[j] = population[j].log_weight + (delta_gamma == 0.0 ? 0.0 : delta_gamma * ll);
    }
    return lw;
}

} // namespace

TemperSchedule TemperSchedule::from_config(const RunConfig& config)
{
    TemperSchedule s;
    if (const auto* grid = std::get_if<GridSchedule>(&config.schedule)) {
        s.mode = Mode::grid;
        if (!grid->values.empty()) {
            s.grid = grid->values;
        } else {
            const std::size_t g = grid->count;
            s.grid.resize(g);
            for (std::size_t i = 0; i < g; ++i)
                s.grid[i] = config.gamma0 + (1.0 - config.gamma0) * static_cast<double>(i) / static_cast<double>(g - 1);
            s.grid.back() = 1.0;
        }
    } else {
        s.mode = Mode::adaptive;
        s.ess_reduction = std::get<AdaptiveSchedule>(config.schedule).ess_reduction;
        s.grid = {config.gamma0};
    }
    return s;
}

double TemperSchedule::first() const { return grid.front(); }

std::string TemperSchedule::summary() const
{
    std::ostringstream os;
    if (mode == Mode::grid)
        os << "grid(" << grid.size() << ",gamma0=" << grid.front() << ")";
    else
        os << "adaptive(ess_reduction=" << ess_reduction << ",gamma0=" << grid.front() << ")";
    return os.str();
}

double ess(std::span<const double> log_weights)
{
    if (log_weights.empty()) throw DegeneratePopulation("empty population");
    const double mx = *std::max_element(log_weights.begin(), log_weights.end());
    if (mx == kNegInf) throw DegeneratePopulation("every particle weight is zero");
    // (sum w)^2 / sum w^2 on weights scaled by the largest one; identical to
    // 1 / sum w^2 after normalization, and exact for equal or one-hot weights.
    double sum = 0.0, sum_sq = 0.0;
    for (double lw : log_weights) {
        const double w = std::exp(lw - mx);
        sum += w;
        sum_sq += w * w;
    }
    return sum * sum / sum_sq;
}

std::vector<double> log_weights(std::span<const Particle> population)
{
    std::vector<double> lw(population.size());
    for (std::size_t j = 0; j < population.size(); ++j) lw[j] = population[j].log_weight;
    return lw;
}

std::vector<double> normalized_weights(std::span<const Particle> population)
{
    std::vector<double> w = log_weights(population);
    const double lse = log_sum_exp(w);
    for (double& x : w) x = std::exp(x - lse);
    return w;
}

double ess_after_increment(std::span<const Particle> population, double delta_gamma)
{
    return ess(incremented(population, delta_gamma));
}

double reweight(std::span<Particle> population, double gamma_from, double gamma_to)
{
    if (gamma_to < gamma_from) throw DomainError("reweight requires gamma_to >= gamma_from");
    std::vector<double> lw = incremented(population, gamma_to - gamma_from);
    const double lse = log_sum_exp(lw);
    for (std::size_t j = 0; j < population.size(); ++j) population[j].log_weight = lw[j] - lse;
    return ess(log_weights(population));
}

double next_gamma_adaptive(std::span<const Particle> population, double gamma_i, double ess_reduction)
{
    if (!(gamma_i < 1.0)) throw DomainError("next_gamma_adaptive: gamma already at 1");
    if (!(ess_reduction > 0.0 && ess_reduction < 1.0)) throw DomainError("ess_reduction must lie in (0, 1)");
    const double current = ess(log_weights(population));
    const double target = ess_reduction * current;
    auto g = [&](double gamma) { return ess_after_increment(population, gamma - gamma_i) - target; };

    double g_hi = g(1.0);
    if (g_hi >= 0.0) return 1.0;
    double lo = gamma_i;
    double hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        if (hi - lo < 1e-6 && std::abs(g_hi) <= 1e-6 * current) break;
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const double g_mid = g(mid);
        if (g_mid >= 0.0) {
            lo = mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
    return hi;
}

std::vector<std::size_t> systematic_offspring(std::span<const double> weights, double u)
{
    const std::size_t n = weights.size();
    std::vector<std::size_t> parents(n);
    double cumulative = weights.empty() ? 0.0 : weights[0];
    std::size_t i = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double position = (u + static_cast<double>(j)) / static_cast<double>(n);
        while (position >= cumulative && i + 1 < n) cumulative += weights[++i];
        parents[j] = i;
    }
    return parents;
}

std::vector<Particle> resample(std::span<const Particle> population, std::uint64_t seed, std::uint64_t stage)
{
    const std::vector<double> w = normalized_weights(population);
    Rng rng = make_stream(seed, StreamTag::resample, stage);
    const auto parents = systematic_offspring(w, uniform01(rng));
    const double equal = -std::log(static_cast<double>(population.size()));
    std::vector<Particle> next;
    next.reserve(population.size());
    for (std::size_t j = 0; j < parents.size(); ++j) {
        Particle p = population[parents[j]];
        p.log_weight = equal;
        p.chain.rng = make_stream(seed, StreamTag::particle, stage, j);
        next.push_back(std::move(p));
    }
    return next;
}

void advance_population(std::span<Particle> population, const LogTarget& target, double gamma, std::size_t sweeps,
                        std::span<const std::size_t> free, int workers)
{
    parallel_for(population.size(), std::max(workers, 1), [&](std::size_t j) {
        for (std::size_t s = 0; s < sweeps; ++s) metropolis_step(population[j].chain, target, gamma, free);
    });
}

void advance_population_serial(std::span<Particle> population, const LogTarget& target, double gamma,
                               std::size_t sweeps, std::span<const std::size_t> free)
{
    for (auto& p : population)
        for (std::size_t s = 0; s < sweeps; ++s) metropolis_step(p.chain, target, gamma, free);
}

std::uint64_t per_worker_max(std::span<const std::uint64_t> slot_counts, int workers)
{
    const std::size_t n = slot_counts.size();
    const auto w = static_cast<std::size_t>(std::max(workers, 1));
    const std::size_t chunk = (n + w - 1) / w;
    std::uint64_t best = 0;
    for (std::size_t start = 0; start < n; start += chunk) {
        const std::size_t end = std::min(n, start + chunk);
        best = std::max(best, std::accumulate(slot_counts.begin() + static_cast<std::ptrdiff_t>(start),
                                              slot_counts.begin() + static_cast<std::ptrdiff_t>(end),
                                              std::uint64_t{0}));
    }
    return best;
}

SmcRun run_smc(const LogTarget& target, const RunConfig& config,
               const std::function<void(const StageInfo&, std::span<const Particle>)>& on_stage)
{
    config.validate();
    const TemperSchedule schedule = TemperSchedule::from_config(config);
    const auto free = free_indices(config, target.dimension());
    const std::vector<double> base = starting_point(config, target);
    const std::size_t n = config.particles;

    SmcRun run;
    run.population.resize(n);
    run.slot_factorizations.assign(n, 0);
    auto& pop = run.population;

    parallel_for(n, config.workers, [&](std::size_t j) {
        Rng rng = make_stream(config.seed, StreamTag::particle_init, j);
        std::vector<double> theta = base;
        for (const std::size_t i : free) theta[i] = target.draw_prior(i, rng);
        pop[j].chain = init_chain(target, std::move(theta), 0.0, config.initial_width, std::move(rng));
        pop[j].log_weight = -std::log(static_cast<double>(n));
        run.slot_factorizations[j] += pop[j].chain.factorizations;
    });

    auto advance = [&](double gamma, std::size_t sweeps) {
        std::vector<std::uint64_t> before(n);
        for (std::size_t j = 0; j < n; ++j) before[j] = pop[j].chain.factorizations;
        advance_population(pop, target, gamma, sweeps, free, config.workers);
        for (std::size_t j = 0; j < n; ++j) {
            run.slot_factorizations[j] += pop[j].chain.factorizations - before[j];
            tune_widths(pop[j].chain);
        }
    };

    auto move_to = [&](double from, double to, std::uint64_t stage, bool forced) {
        const double ess_from = ess(log_weights(pop));
        const double ess_to = reweight(pop, from, to);
        run.steps.push_back({from, to, ess_from, ess_to, forced});
        pop = resample(pop, config.seed, stage);
        for (auto& p : pop) set_gamma(p.chain, to);
        run.gammas.push_back(to);
        return ess_to;
    };

    double gamma = schedule.first();
    std::uint64_t stage = 0;
    double stage_ess = move_to(0.0, gamma, stage, false);
    advance(gamma, 1);

    std::size_t grid_index = 0;
    for (;;) {
        advance(gamma, config.steps_per_gamma);
        if (on_stage) {
            StageInfo info{gamma, stage_ess, per_worker_max(run.slot_factorizations, config.workers),
                           std::accumulate(run.slot_factorizations.begin(), run.slot_factorizations.end(),
                                           std::uint64_t{0})};
            on_stage(info, pop);
        }
        if (gamma >= 1.0) break;

        double next = 1.0;
        bool forced = false;
        if (schedule.mode == TemperSchedule::Mode::grid) {
            next = schedule.grid[++grid_index];
        } else {
            next = next_gamma_adaptive(pop, gamma, schedule.ess_reduction);
            forced = next == 1.0 && ess_after_increment(pop, 1.0 - gamma) >=
                                        schedule.ess_reduction * ess(log_weights(pop));
        }
        stage_ess = move_to(gamma, next, ++stage, forced);
        gamma = next;
    }
    run.sweeps_per_particle = pop.front().chain.step_index;
    return run;
}

EngineResult run_asmc(const Dataset& dataset, const RunConfig& config, const PriorSpec& priors, const HoldOut* test)
{
    config.validate();
    const GpTarget target(dataset, priors, config.kernel_form, config.jitter);
    const std::size_t d = dataset.input_dim();
    const std::size_t m = dataset.output_dim();
    const bool with_rmse = test != nullptr && !test->empty();

    auto to_ensemble = [&](std::span<const Particle> pop) {
        PosteriorEnsemble e;
        e.samples.reserve(pop.size());
        for (const auto& p : pop) e.samples.emplace_back(d, m, p.chain.theta);
        e.weights = normalized_weights(pop);
        return e;
    };

    EngineResult result;
    result.trace.rmse_columns = with_rmse ? m : 0;
    detail::Stopwatch clock;

    auto on_stage = [&](const StageInfo& info, std::span<const Particle> pop) {
        TraceRow row;
        row.wall_time_s = clock.seconds();
        row.step_or_gamma = info.gamma;
        row.ess = info.ess;
        double mean = 0.0;
        for (const auto& p : pop) mean += p.chain.log_target.tempered_log_target;
        row.log_target_mean = mean / static_cast<double>(pop.size());
        row.factorizations = info.factorizations_per_worker;
        if (with_rmse) {
            clock.pause();
            const Eigen::VectorXd r = rmse(predict_mean(dataset, to_ensemble(pop), test->inputs, config.kernel_form,
                                                        config.jitter, config.workers),
                                           test->outputs);
            row.rmse.assign(r.data(), r.data() + r.size());
            clock.resume();
        }
        result.trace.rows.push_back(std::move(row));
    };

    SmcRun run = run_smc(target, config, on_stage);
    result.wall_time_s = clock.seconds();
    result.ensemble = to_ensemble(run.population);
    result.ensemble.provenance = {"asmc", config.seed,
                                  TemperSchedule::from_config(config).summary() +
                                      ",particles=" + std::to_string(config.particles) +
                                      ",steps_per_gamma=" + std::to_string(config.steps_per_gamma)};
    result.factorizations_total =
        std::accumulate(run.slot_factorizations.begin(), run.slot_factorizations.end(), std::uint64_t{0});
    result.factorizations_per_worker = per_worker_max(run.slot_factorizations, config.workers);
    result.steps = std::move(run.steps);
    result.gammas = std::move(run.gammas);
    return result;
}

} // namespace gptemper
