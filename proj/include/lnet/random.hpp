#ifndef LNET_RANDOM_HPP
#define LNET_RANDOM_HPP

#include <cstdint>
#include <random>

namespace lnet {

/// splitmix64 finalizer; derives independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return splitmix64(master ^ splitmix64(index + 1));
}

/// mt19937_64 with draws defined bit-for-bit here rather than by the
/// standard library's distribution classes, so outputs match across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [lo, hi], unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
    {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) {
            return static_cast<std::int64_t>(engine_());
        }
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return lo + static_cast<std::int64_t>(v % span);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

} // namespace lnet

#endif // LNET_RANDOM_HPP
