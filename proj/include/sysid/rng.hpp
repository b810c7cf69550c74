#pragma once

#include <cstdint>
#include <limits>

namespace sysid {

// splitmix64 output function. Constants:
//   increment  0x9E3779B97F4A7C15
//   multiplier 0xBF58476D1CE4E5B9, 0x94D049BB133111EB
//   shifts     30, 27, 31
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed of trial `index` in stream `stream` of a run with seed `master`:
//   splitmix64(splitmix64(master ^ splitmix64(stream)) ^ index)
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master ^ splitmix64(stream)) ^ index);
}

// Stream identifiers; fixed so that any reimplementation derives the same
// per-trial seeds.
namespace streams {
inline constexpr std::uint64_t record = 1;
inline constexpr std::uint64_t discovery = 2;
inline constexpr std::uint64_t refinement = 3;
inline constexpr std::uint64_t lg_c21 = 21;
inline constexpr std::uint64_t lg_c32 = 32;
inline constexpr std::uint64_t lg_c31 = 31;
inline constexpr std::uint64_t alice = 101;
inline constexpr std::uint64_t bob = 102;
inline constexpr std::uint64_t charlie = 103;
inline constexpr std::uint64_t schedule = 201;
}  // namespace streams

// Sequential splitmix64 generator. Satisfies UniformRandomBitGenerator, but
// uniform() is the only draw the library uses, so results do not depend on
// the standard library's distribution implementations.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) from the top 53 bits.
    double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

}  // namespace sysid
