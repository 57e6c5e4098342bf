#pragma once

#include "gptemper/mcmc.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gptemper {

struct Particle {
    ChainState chain;
    double log_weight = 0.0;
};

/// Either a fixed ascending grid ending at exactly 1 or ESS-driven selection.
struct TemperSchedule {
    enum class Mode { grid, adaptive };

    Mode mode = Mode::grid;
    std::vector<double> grid;
    double ess_reduction = 0.9;

    /// Uniform grid of `count` points on [gamma0, 1] unless explicit values are given.
    static TemperSchedule from_config(const RunConfig& config);
    double first() const;
    std::string summary() const;
};

/// 1 / sum w_j^2 over the normalized weights. Throws DegeneratePopulation
/// when every log-weight is -inf.
double ess(std::span<const double> log_weights);

std::vector<double> log_weights(std::span<const Particle> population);
std::vector<double> normalized_weights(std::span<const Particle> population);

/// ESS the population would have after moving from the current weights by
/// delta_gamma * log_likelihood. Uses the cached likelihoods only.
double ess_after_increment(std::span<const Particle> population, double delta_gamma);

/// log_weight += (gamma_to - gamma_from) * log_likelihood, then normalize.
/// Returns the resulting ESS. No factorizations.
double reweight(std::span<Particle> population, double gamma_from, double gamma_to);

/// Largest step keeping ESS(gamma) >= ess_reduction * ESS(gamma_i), found
/// by bisection on (gamma_i, 1]. Returns 1 when even gamma = 1 keeps the
/// ESS above target.
double next_gamma_adaptive(std::span<const Particle> population, double gamma_i, double ess_reduction);

/// Parent index for each of `weights.size()` offspring slots, given a single
/// uniform draw u in [0, 1).
std::vector<std::size_t> systematic_offspring(std::span<const double> weights, double u);

/// Systematic resampling. Offspring carry equal weights and fresh RNG
/// substreams keyed by (seed, stage, slot).
std::vector<Particle> resample(std::span<const Particle> population, std::uint64_t seed, std::uint64_t stage);

/// Runs `sweeps` Metropolis sweeps on every particle, spread over
/// `workers` OpenMP threads. Each particle only touches its own state.
void advance_population(std::span<Particle> population, const LogTarget& target, double gamma, std::size_t sweeps,
                        std::span<const std::size_t> free, int workers);

/// Serial reference for advance_population; results are bitwise identical.
void advance_population_serial(std::span<Particle> population, const LogTarget& target, double gamma,
                               std::size_t sweeps, std::span<const std::size_t> free);

/// Largest per-worker share of the per-slot counts under a contiguous
/// static partition of slots onto `workers`.
std::uint64_t per_worker_max(std::span<const std::uint64_t> slot_counts, int workers);

struct StageInfo {
    double gamma = 0.0;
    double ess = 0.0;             // after reweighting into gamma, before resampling
    std::uint64_t factorizations_per_worker = 0;
    std::uint64_t factorizations_total = 0;
};

struct SmcRun {
    std::vector<Particle> population;
    std::vector<TemperStep> steps;
    std::vector<double> gammas;
    std::vector<std::uint64_t> slot_factorizations;
    std::uint64_t sweeps_per_particle = 0;
};

/// Tempered SMC on any target: prior draws, reweight to gamma0 and
/// resample, one tuning sweep, then per temperature: steps_per_gamma
/// sweeps, width tuning, next gamma, reweight, resample. Ends after the
/// sweeps at gamma = 1.
SmcRun run_smc(const LogTarget& target, const RunConfig& config,
               const std::function<void(const StageInfo&, std::span<const Particle>)>& on_stage = {});

/// ASMC on the GP posterior with a trace row per temperature.
EngineResult run_asmc(const Dataset& dataset, const RunConfig& config, const PriorSpec& priors,
                      const HoldOut* test = nullptr);

} // namespace gptemper
