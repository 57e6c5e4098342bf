#include "gptemper/mcmc.hpp"

#include "gptemper/errors.hpp"
#include "stopwatch.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace gptemper {

namespace {

double sum_blocks(const std::vector<double>& blocks)
{
    double s = 0.0;
    for (double b : blocks) s += b;
    return s;
}

} // namespace

ChainState init_chain(const LogTarget& target, std::vector<double> theta, double gamma, double width, Rng rng)
{
    if (theta.size() != target.dimension()) throw DomainError("starting point has the wrong dimension");
    if (!(width > 0.0)) throw DomainError("proposal width must be positive");
    ChainState state;
    state.theta = std::move(theta);
    state.rng = std::move(rng);
    const std::size_t dim = target.dimension();
    state.widths.assign(dim, width);
    state.accept_counts.assign(dim, 0);
    state.propose_counts.assign(dim, 0);
    const double lp = target.log_prior(state.theta);
    if (lp == -std::numeric_limits<double>::infinity())
        throw DomainError("starting point lies outside the prior support: " + describe(state.theta));
    state.block_loglik.resize(target.block_count());
    for (std::size_t b = 0; b < target.block_count(); ++b) {
        state.block_loglik[b] = target.block_log_likelihood(b, state.theta);
        ++state.factorizations;
    }
    state.log_target = LogDensity::make(sum_blocks(state.block_loglik), lp, gamma);
    return state;
}

void set_gamma(ChainState& state, double gamma)
{
    state.log_target = LogDensity::make(state.log_target.log_likelihood, state.log_target.log_prior, gamma);
}

void metropolis_step(ChainState& state, const LogTarget& target, double gamma, std::span<const std::size_t> free)
{
    if (state.log_target.gamma != gamma) set_gamma(state, gamma);
    std::vector<double> proposed_blocks = state.block_loglik;
    for (const std::size_t i : free) {
        const double current = state.theta[i];
        const double eps = standard_normal(state.rng);
        const double u = uniform01(state.rng);
        const double proposal = current * std::exp(state.widths[i] * eps);
        ++state.propose_counts[i];

        state.theta[i] = proposal;
        bool ok = proposal > 0.0 && std::isfinite(proposal);
        if (ok) {
            for (const std::size_t b : target.blocks_touched(i)) {
                ++state.factorizations;
                try {
                    proposed_blocks[b] = target.block_log_likelihood(b, state.theta);
                } catch (const NotPositiveDefinite&) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) {
            const LogDensity next =
                LogDensity::make(sum_blocks(proposed_blocks), target.log_prior(state.theta), gamma);
            const double log_alpha = next.tempered_log_target - state.log_target.tempered_log_target +
                                     std::log(proposal) - std::log(current);
            if (std::isfinite(next.tempered_log_target) && std::log(u) < log_alpha) {
                state.log_target = next;
                for (const std::size_t b : target.blocks_touched(i)) state.block_loglik[b] = proposed_blocks[b];
                ++state.accept_counts[i];
                continue;
            }
        }
        // Rejected: restore theta and the scratch copy of the touched blocks.
        state.theta[i] = current;
        for (const std::size_t b : target.blocks_touched(i)) proposed_blocks[b] = state.block_loglik[b];
    }
    ++state.step_index;
}

void tune_widths(ChainState& state, double target_low, double target_high)
{
    for (std::size_t i = 0; i < state.widths.size(); ++i) {
        if (state.propose_counts[i] == 0) continue;
        const double ratio =
            static_cast<double>(state.accept_counts[i]) / static_cast<double>(state.propose_counts[i]);
        if (ratio > target_high)
            state.widths[i] *= 2.0;
        else if (ratio < target_low)
            state.widths[i] *= 0.5;
        state.accept_counts[i] = 0;
        state.propose_counts[i] = 0;
    }
}

std::vector<std::size_t> free_indices(const RunConfig& config, std::size_t dimension)
{
    if (!config.free_mask.empty() && config.free_mask.size() != dimension)
        throw DomainError("free mask length does not match hyperparameter count");
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < dimension; ++i)
        if (config.free_mask.empty() || config.free_mask[i]) free.push_back(i);
    if (free.empty()) throw DomainError("no free hyperparameters to sample");
    return free;
}

std::vector<double> starting_point(const RunConfig& config, const LogTarget& target)
{
    if (config.start) {
        if (config.start->size() != target.dimension()) throw DomainError("start vector has the wrong dimension");
        return *config.start;
    }
    std::vector<double> theta(target.dimension());
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = target.prior_mean(i);
    return theta;
}

std::vector<std::vector<double>> run_chain(const LogTarget& target, const RunConfig& config,
                                           const std::function<void(const ChainProgress&, const ChainState&)>& on_sweep,
                                           ChainState* final_state)
{
    config.validate();
    const auto free = free_indices(config, target.dimension());
    ChainState state = init_chain(target, starting_point(config, target), 1.0, config.initial_width,
                                  make_stream(config.seed, StreamTag::chain));

    std::vector<std::vector<double>> samples;
    samples.reserve(config.mcmc_total_steps - config.mcmc_init_steps);
    for (std::size_t t = 0; t < config.mcmc_total_steps; ++t) {
        metropolis_step(state, target, 1.0, free);
        const bool initializing = t < config.mcmc_init_steps;
        if (initializing) {
            if ((t + 1) % config.tune_interval == 0) tune_widths(state);
            if (t + 1 == config.mcmc_init_steps) {
                std::fill(state.accept_counts.begin(), state.accept_counts.end(), 0);
                std::fill(state.propose_counts.begin(), state.propose_counts.end(), 0);
            }
        } else {
            samples.push_back(state.theta);
        }
        if (on_sweep) on_sweep(ChainProgress{t + 1, initializing}, state);
    }
    if (final_state) *final_state = std::move(state);
    return samples;
}

EngineResult run_mcmc(const Dataset& dataset, const RunConfig& config, const PriorSpec& priors, const HoldOut* test)
{
    config.validate();
    const GpTarget target(dataset, priors, config.kernel_form, config.jitter);
    const std::size_t d = dataset.input_dim();
    const std::size_t m = dataset.output_dim();
    const bool with_rmse = test != nullptr && !test->empty();

    EngineResult result;
    result.trace.rmse_columns = with_rmse ? m : 0;
    detail::Stopwatch clock;

    auto on_sweep = [&](const ChainProgress& progress, const ChainState& state) {
        if (progress.sweep % config.trace_interval != 0 && progress.sweep != config.mcmc_total_steps) return;
        TraceRow row;
        row.wall_time_s = clock.seconds();
        row.step_or_gamma = static_cast<double>(progress.sweep);
        row.log_target_mean = state.log_target.tempered_log_target;
        row.factorizations = state.factorizations;
        if (with_rmse) {
            clock.pause();
            PosteriorEnsemble single;
            single.samples.emplace_back(d, m, state.theta);
            single.weights = {1.0};
            const Eigen::VectorXd r =
                rmse(predict_mean(dataset, single, test->inputs, config.kernel_form, config.jitter), test->outputs);
            row.rmse.assign(r.data(), r.data() + r.size());
            clock.resume();
        }
        result.trace.rows.push_back(std::move(row));
    };

    ChainState final_state;
    auto samples = run_chain(target, config, on_sweep, &final_state);
    result.wall_time_s = clock.seconds();
    result.factorizations_total = final_state.factorizations;
    result.factorizations_per_worker = final_state.factorizations;

    const double w = 1.0 / static_cast<double>(samples.size());
    result.ensemble.samples.reserve(samples.size());
    for (auto& s : samples) result.ensemble.samples.emplace_back(d, m, std::move(s));
    result.ensemble.weights.assign(result.ensemble.samples.size(), w);
    result.ensemble.provenance = {"mcmc", config.seed,
                                  "steps=" + std::to_string(config.mcmc_total_steps) +
                                      ",init=" + std::to_string(config.mcmc_init_steps)};
    return result;
}

} // namespace gptemper
