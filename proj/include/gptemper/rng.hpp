#pragma once

#include <cstdint>
#include <random>

namespace gptemper {

using Rng = std::mt19937_64;

// Stream tags keep substreams for different purposes disjoint.
enum class StreamTag : std::uint64_t {
    chain = 1,
    particle_init = 2,
    particle = 3,
    resample = 4,
    split = 5,
    design = 6,
    noise = 7,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent generator keyed by (seed, tag, a, b). Depends only on its
// arguments, never on thread scheduling.
inline Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0, std::uint64_t b = 0)
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ (b * 0x632be59bd9b4e019ULL));
    return Rng(h);
}

inline double standard_normal(Rng& rng)
{
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

inline double uniform01(Rng& rng)
{
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

} // namespace gptemper
