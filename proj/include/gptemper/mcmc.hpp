#pragma once

#include "gptemper/data.hpp"
#include "gptemper/inference.hpp"
#include "gptemper/predict.hpp"
#include "gptemper/rng.hpp"
#include "gptemper/trace.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gptemper {

/// One random-walk Metropolis chain. Proposals act on log(theta); the
/// per-block log-likelihoods are cached so a proposal for a scalar only
/// refactorizes the blocks that scalar touches.
struct ChainState {
    std::vector<double> theta;
    LogDensity log_target;
    std::vector<double> block_loglik;
    std::vector<double> widths;
    std::vector<std::uint64_t> accept_counts;
    std::vector<std::uint64_t> propose_counts;
    std::uint64_t step_index = 0;
    std::uint64_t factorizations = 0;
    Rng rng;
};

/// Evaluates every block at `theta` (block_count factorizations). Throws
/// if the starting point cannot be factorized.
ChainState init_chain(const LogTarget& target, std::vector<double> theta, double gamma, double width, Rng rng);

/// Re-tempers the cached log-likelihood at a new gamma. No factorizations.
void set_gamma(ChainState& state, double gamma);

/// One component-wise sweep over `free` at temperature gamma.
void metropolis_step(ChainState& state, const LogTarget& target, double gamma, std::span<const std::size_t> free);

/// Doubles widths whose acceptance ratio exceeds `target_high`, halves
/// those below `target_low`, then resets the counters. Components that
/// were never proposed keep their width.
void tune_widths(ChainState& state, double target_low = 0.2, double target_high = 0.5);

/// Indices proposed by the samplers under config.free_mask.
std::vector<std::size_t> free_indices(const RunConfig& config, std::size_t dimension);

/// Starting theta: config.start if given, otherwise the prior means.
std::vector<double> starting_point(const RunConfig& config, const LogTarget& target);

struct TemperStep {
    double gamma_from = 0.0;
    double gamma_to = 0.0;
    double ess_from = 0.0;
    double ess_to = 0.0;
    bool forced_terminal = false; // adaptive mode jumped to 1 because no root existed
};

struct EngineResult {
    PosteriorEnsemble ensemble;
    Trace trace;
    std::uint64_t factorizations_total = 0;
    std::uint64_t factorizations_per_worker = 0;
    double wall_time_s = 0.0;
    std::vector<TemperStep> steps; // ASMC only
    std::vector<double> gammas;    // ASMC only
};

struct ChainProgress {
    std::size_t sweep = 0; // completed sweeps
    bool initializing = false;
};

/// Two-phase chain on any target: mcmc_init_steps tuning sweeps (tuned
/// every tune_interval, discarded), then frozen-width sweeps whose states
/// are all retained. `on_sweep` runs after every sweep.
std::vector<std::vector<double>> run_chain(const LogTarget& target, const RunConfig& config,
                                           const std::function<void(const ChainProgress&, const ChainState&)>& on_sweep,
                                           ChainState* final_state = nullptr);

/// GP baseline: run_chain on the GP posterior at gamma = 1 with a trace row
/// every trace_interval sweeps (RMSE of the current state when `test` is given).
EngineResult run_mcmc(const Dataset& dataset, const RunConfig& config, const PriorSpec& priors,
                      const HoldOut* test = nullptr);

} // namespace gptemper
