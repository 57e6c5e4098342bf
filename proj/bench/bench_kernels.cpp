// OpenMP kernels against their serial references.

#include "gptemper/smc.hpp"
#include "gptemper/synthetic.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

using namespace gptemper;

namespace {

struct Fixture {
    SyntheticData data;
    PriorSpec priors;
    GpTarget target;
    std::vector<Particle> population;
    std::vector<std::size_t> free;
    PosteriorEnsemble ensemble;

    static Fixture& get()
    {
        static Fixture f;
        return f;
    }

private:
    Fixture()
        : data(generate(make_problem("scalability"), 100, 500, 3)),
          priors(PriorSpec::weakly_informative(hyperparam_count(10, 1))),
          target(data.train, priors, KernelForm::exponentiated_sum, 1e-10)
    {
        RunConfig c;
        c.particles = 32;
        c.schedule = GridSchedule{2, {}};
        population = run_smc(target, c).population;
        free = free_indices(c, target.dimension());
        for (const auto& p : population) ensemble.samples.emplace_back(10, 1, p.chain.theta);
        ensemble.weights.assign(population.size(), 1.0 / static_cast<double>(population.size()));
    }
};

void advance_parallel(benchmark::State& state)
{
    auto& f = Fixture::get();
    for (auto _ : state) {
        auto pop = f.population;
        advance_population(pop, f.target, 1.0, 1, f.free, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(pop.data());
    }
}

void advance_serial(benchmark::State& state)
{
    auto& f = Fixture::get();
    for (auto _ : state) {
        auto pop = f.population;
        advance_population_serial(pop, f.target, 1.0, 1, f.free);
        benchmark::DoNotOptimize(pop.data());
    }
}

void predict_parallel(benchmark::State& state)
{
    auto& f = Fixture::get();
    for (auto _ : state)
        benchmark::DoNotOptimize(predict(f.data.train, f.ensemble, f.data.test.inputs, KernelForm::exponentiated_sum,
                                         1e-10, static_cast<int>(state.range(0))));
}

void predict_serial_ref(benchmark::State& state)
{
    auto& f = Fixture::get();
    for (auto _ : state)
        benchmark::DoNotOptimize(
            predict_serial(f.data.train, f.ensemble, f.data.test.inputs, KernelForm::exponentiated_sum, 1e-10));
}

void thread_counts(benchmark::internal::Benchmark* b)
{
    for (int w = 2; w <= std::max(2, omp_get_max_threads()); w *= 2) b->Arg(w);
}

} // namespace

BENCHMARK(advance_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(advance_parallel)->Apply(thread_counts)->Unit(benchmark::kMillisecond);
BENCHMARK(predict_serial_ref)->Unit(benchmark::kMillisecond);
BENCHMARK(predict_parallel)->Apply(thread_counts)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
