#pragma once

// Seed hierarchy: master seed -> per-run seed -> one independent stream per
// consumer, so adding draws in one consumer never shifts another's sequence.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace modesel {

using Rng = std::mt19937_64;

enum class Stream : std::uint64_t {
    placement = 1,
    pairing = 2,
    shadowing = 3,
    mobility = 4,
    channel = 5,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) noexcept
{
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (const auto p : parts)
        h = splitmix64(h ^ splitmix64(p));
    return h;
}

inline constexpr std::uint64_t run_seed(std::uint64_t master, std::uint64_t run_index) noexcept
{
    return mix_seed({master, run_index});
}

inline Rng make_stream(std::uint64_t run_seed, Stream s, std::uint64_t sub = 0)
{
    return Rng(mix_seed({run_seed, static_cast<std::uint64_t>(s), sub}));
}

} // namespace modesel
