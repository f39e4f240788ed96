#pragma once

#include <cstdint>
#include <random>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace cvdiff {

/// splitmix64 finalizer; used only to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of replica stream j. Depends only on (master_seed, j), never on
/// which worker runs the replica.
constexpr std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream) noexcept {
    return mix64(mix64(master_seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// A single random stream: 64-bit Mersenne twister, ziggurat normals, uniforms.
/// Not thread-safe; each replica owns one.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    RandomStream(std::uint64_t master_seed, std::uint64_t stream) : engine_(stream_seed(master_seed, stream)) {}

    double normal() { return normal_(engine_); }
    /// Uniform on [0, 1).
    double uniform() { return std::generate_canonical<double, 53>(engine_); }

    boost::random::mt19937_64& engine() noexcept { return engine_; }

private:
    boost::random::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace cvdiff
