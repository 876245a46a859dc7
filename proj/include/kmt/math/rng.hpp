#ifndef KMT_MATH_RNG_HPP
#define KMT_MATH_RNG_HPP

#include <cstdint>
#include <random>

#include "kmt/math/normal.hpp"

namespace kmt::math {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Seed of the (stream, rep) substream of a master seed.  Replications and
/// logically distinct consumers (construction, baseline, bootstrap, ...) each
/// get their own stream id so streams never collide.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t rep) {
    return splitmix64(splitmix64(master ^ splitmix64(stream)) + rep);
}

enum class Stream : std::uint64_t {
    construction = 1,
    baseline = 2,
    bootstrap = 3,
    battery = 4,
    direct_sum = 5,
};

/// Deterministic uniform/Gaussian source.  Gaussians come from the inverse
/// normal CDF so that output is identical across standard libraries.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    RandomStream(std::uint64_t master, Stream stream, std::uint64_t rep)
        : engine_(substream_seed(master, static_cast<std::uint64_t>(stream), rep)) {}

    /// Uniform on (0, 1), never returning an endpoint.
    double uniform() {
        const std::uint64_t bits = engine_() >> 11;  // 53 random bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double gaussian() { return normal_quantile(uniform()); }

private:
    std::mt19937_64 engine_;
};

}  // namespace kmt::math

#endif
