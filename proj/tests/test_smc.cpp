#include "gptemper/errors.hpp"
#include "gptemper/smc.hpp"
#include "support.hpp"
#include "targets.hpp"

#include "doctest.h"

#include <cmath>
#include <limits>
#include <numeric>

using namespace gptemper;

namespace {

std::vector<Particle> with_loglik(const std::vector<double>& ll, const std::vector<double>& lw = {})
{
    std::vector<Particle> pop(ll.size());
    for (std::size_t j = 0; j < ll.size(); ++j) {
        pop[j].chain.log_target = LogDensity::make(ll[j], 0.0, 0.0);
        pop[j].chain.theta = {static_cast<double>(j)};
        pop[j].log_weight = lw.empty() ? -std::log(static_cast<double>(ll.size())) : lw[j];
    }
    return pop;
}

std::vector<double> logs(const std::vector<double>& w)
{
    std::vector<double> out;
    for (double x : w) out.push_back(std::log(x));
    return out;
}

} // namespace

TEST_CASE("ess examples")
{
    CHECK(ess(std::vector<double>(7, -2.0)) == doctest::Approx(7.0).epsilon(1e-14));
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(ess(std::vector<double>{0.0, -inf, -inf}) == 1.0);
    CHECK(ess(logs({0.5, 0.25, 0.25})) == doctest::Approx(8.0 / 3.0));
    CHECK_THROWS_AS(ess(std::vector<double>{-inf, -inf}), DegeneratePopulation);
}

TEST_CASE("reweight")
{
    SUBCASE("zero increment leaves the weights")
    {
        auto pop = with_loglik({-1.0, -3.0}, logs({0.3, 0.7}));
        reweight(pop, 0.4, 0.4);
        CHECK(std::exp(pop[0].log_weight) == doctest::Approx(0.3));
    }
    SUBCASE("equal likelihoods leave the weights")
    {
        auto pop = with_loglik({-2.0, -2.0, -2.0}, logs({0.2, 0.3, 0.5}));
        reweight(pop, 0.0, 0.8);
        CHECK(std::exp(pop[2].log_weight) == doctest::Approx(0.5));
    }
    SUBCASE("two particles with ll (0, -2) over half a unit of gamma")
    {
        auto pop = with_loglik({0.0, -2.0});
        const double e = std::exp(-1.0);
        const double ess_after = reweight(pop, 0.0, 0.5);
        CHECK(std::exp(pop[0].log_weight) == doctest::Approx(1.0 / (1.0 + e)));
        CHECK(std::exp(pop[1].log_weight) == doctest::Approx(e / (1.0 + e)));
        double total = 0.0;
        for (const auto& p : pop) total += std::exp(p.log_weight);
        CHECK(std::abs(total - 1.0) <= 1e-12);
        CHECK(ess_after >= 1.0);
        CHECK(ess_after <= 2.0);
    }
}

TEST_CASE("systematic offspring")
{
    const auto equal = systematic_offspring(std::vector<double>(5, 0.2), 0.37);
    CHECK(equal == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(systematic_offspring(std::vector<double>{1.0, 0.0, 0.0}, 0.9) == std::vector<std::size_t>{0, 0, 0});

    std::vector<double> mean(3, 0.0);
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) {
        Rng rng = make_stream(static_cast<std::uint64_t>(r), StreamTag::resample);
        for (std::size_t p : systematic_offspring(std::vector<double>{0.5, 0.3, 0.2}, uniform01(rng))) mean[p] += 1.0;
    }
    const double expected[3] = {1.5, 0.9, 0.6};
    for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] / reps - expected[i]) <= 0.02 * expected[i]);
}

TEST_CASE("resample equalizes weights and gives fresh streams")
{
    auto pop = with_loglik({-1, -2, -3, -4}, logs({0.4, 0.3, 0.2, 0.1}));
    const auto next = resample(pop, 5, 2);
    REQUIRE(next.size() == 4);
    for (const auto& p : next) CHECK(p.log_weight == doctest::Approx(-std::log(4.0)));
    CHECK(ess(log_weights(next)) == doctest::Approx(4.0));
    CHECK(next[0].chain.rng != next[1].chain.rng);
}

TEST_CASE("adaptive gamma")
{
    SUBCASE("identical likelihoods jump straight to 1")
    {
        const auto pop = with_loglik({-5.0, -5.0, -5.0});
        CHECK(next_gamma_adaptive(pop, 0.01, 0.9) == 1.0);
    }
    SUBCASE("two particles against the gamma scan")
    {
        // With ll = (0, -1) the ESS never falls to 1.6 on (0, 1]; both return 1.
        const auto flat = with_loglik({0.0, -1.0});
        const double target_ratio = 1.6 / 2.0;
        CHECK(next_gamma_adaptive(flat, 0.0, target_ratio) == 1.0);
        CHECK(oracle::gamma_scan_root({0.0, 0.0}, {0.0, -1.0}, 0.0, 1.6) == 1.0);

        const auto steep = with_loglik({0.0, -4.0});
        const double g = next_gamma_adaptive(steep, 0.0, target_ratio);
        const double scan = oracle::gamma_scan_root({0.0, 0.0}, {0.0, -4.0}, 0.0, 1.6);
        CHECK(std::abs(g - scan) <= 1e-4);
        CHECK(ess_after_increment(steep, g) == doctest::Approx(1.6).epsilon(1e-6));
    }
    SUBCASE("ess_reduction close to 1 takes a tiny step")
    {
        const auto pop = with_loglik({0.0, -1.0, -2.0, -3.0});
        const double g = next_gamma_adaptive(pop, 0.25, 1.0 - 1e-9);
        CHECK(g > 0.25);
        CHECK(g - 0.25 < 1e-4);
    }
}

TEST_CASE("grid schedule")
{
    RunConfig c;
    const TemperSchedule s = TemperSchedule::from_config(c);
    REQUIRE(s.grid.size() == 10);
    CHECK(s.grid.front() == 1e-3);
    CHECK(s.grid.back() == 1.0);
    for (std::size_t i = 1; i < s.grid.size(); ++i) CHECK(s.grid[i] > s.grid[i - 1]);
}

TEST_CASE("per-worker maximum over contiguous chunks")
{
    const std::vector<std::uint64_t> counts{3, 1, 4, 1, 5};
    CHECK(per_worker_max(counts, 1) == 14);
    CHECK(per_worker_max(counts, 2) == 8);  // {3,1,4} {1,5}
    CHECK(per_worker_max(counts, 5) == 5);
    CHECK(per_worker_max(counts, 8) == 5);
}

TEST_CASE("grid run: sweeps, gammas and factorizations")
{
    const testing::GaussianTarget t(2.0, 0.3, 3);
    RunConfig c;
    c.particles = 16;
    c.steps_per_gamma = 2;
    c.schedule = GridSchedule{10, {}};
    c.seed = 4;
    std::vector<StageInfo> stages;
    const SmcRun run = run_smc(t, c, [&](const StageInfo& s, std::span<const Particle>) { stages.push_back(s); });
    CHECK(run.gammas.size() == 10);
    CHECK(run.gammas.back() == 1.0);
    for (std::size_t i = 1; i < run.gammas.size(); ++i) CHECK(run.gammas[i] > run.gammas[i - 1]);
    CHECK(run.sweeps_per_particle == 1 + 10 * 2);
    // Three blocks evaluated at the start, then one per proposal.
    for (auto f : run.slot_factorizations) CHECK(f == 3 + 21 * 3);
    CHECK(stages.size() == 10);
    CHECK(stages.back().factorizations_per_worker == per_worker_max(run.slot_factorizations, 1));
    for (const auto& s : run.steps) {
        CHECK(s.ess_to >= 1.0);
        CHECK(s.ess_to <= 16.0);
    }
}

TEST_CASE("adaptive mode on a flat likelihood jumps from gamma0 to 1")
{
    const testing::LogFlatTarget t(2);
    RunConfig c;
    c.particles = 8;
    c.schedule = AdaptiveSchedule{0.9};
    const SmcRun run = run_smc(t, c);
    CHECK(run.gammas == std::vector<double>{c.gamma0, 1.0});
    CHECK(run.steps.back().forced_terminal);
}

TEST_CASE("parallel and serial particle moves agree bitwise")
{
    Rng rng(3);
    const Dataset ds = testing::random_dataset(10, 2, 2, rng);
    const GpTarget t(ds, PriorSpec::weakly_informative(9), KernelForm::exponentiated_sum, 1e-10);
    std::vector<Particle> a(13);
    for (std::size_t j = 0; j < a.size(); ++j) {
        std::vector<double> theta(9);
        Rng r = make_stream(1, StreamTag::particle_init, j);
        for (std::size_t i = 0; i < 9; ++i) theta[i] = t.draw_prior(i, r);
        a[j].chain = init_chain(t, theta, 0.4, 0.5, std::move(r));
    }
    auto b = a;
    std::vector<std::size_t> free(9);
    std::iota(free.begin(), free.end(), 0);
    advance_population(a, t, 0.4, 3, free, 4);
    advance_population_serial(b, t, 0.4, 3, free);
    for (std::size_t j = 0; j < a.size(); ++j) {
        CHECK(a[j].chain.theta == b[j].chain.theta);
        CHECK(a[j].chain.factorizations == b[j].chain.factorizations);
        CHECK(a[j].chain.rng == b[j].chain.rng);
    }
}

TEST_CASE("ensemble does not depend on the worker count")
{
    const Dataset ds = testing::pinned_problem();
    RunConfig c;
    c.particles = 20;
    c.seed = 99;
    std::vector<PosteriorEnsemble> out;
    for (int w : {1, 2, 8}) {
        c.workers = w;
        out.push_back(run_asmc(ds, c, PriorSpec::weakly_informative(4)).ensemble);
    }
    for (std::size_t r = 1; r < out.size(); ++r)
        for (std::size_t j = 0; j < out[0].size(); ++j) CHECK(out[r].samples[j] == out[0].samples[j]);
}

TEST_CASE("run_asmc trace and counters reconcile")
{
    Rng rng(2);
    const Dataset ds = testing::random_dataset(12, 2, 1, rng);
    const HoldOut test{ds.inputs().topRows(4), ds.raw_outputs().topRows(4)};
    RunConfig c;
    c.particles = 12;
    c.workers = 12;
    c.schedule = GridSchedule{5, {}};
    const EngineResult r = run_asmc(ds, c, PriorSpec::weakly_informative(5), &test);
    CHECK(r.trace.rows.size() == 5);
    CHECK(r.trace.rmse_columns == 1);
    CHECK(r.trace.rows.back().factorizations == r.factorizations_per_worker);
    // workers = particles: every worker owns one particle, 1 + 5 sweeps of 5 scalars plus the initial evaluation.
    CHECK(r.factorizations_per_worker == 1 + 6 * 5);
    CHECK(r.factorizations_total == 12 * (1 + 6 * 5));
    for (const auto& row : r.trace.rows) {
        REQUIRE(row.ess.has_value());
        CHECK(*row.ess <= 12.0);
        CHECK(row.rmse.size() == 1);
    }
    CHECK(r.ensemble.size() == 12);
    CHECK_NOTHROW(r.ensemble.validate());
}
