#pragma once

#include <cmath>
#include <cstdint>

namespace qlcp {

/// SplitMix64 finaliser.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent stream key for (seed, stream). Replication r of a run seeded with s uses derive_seed(s, r).
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) + mix64(stream + 0x9e3779b97f4a7c15ULL));
}

/**
 * @brief Counter-based generator: draw i is mix64(key + i * golden_gamma).
 *
 * Gaussian variates use the Marsaglia polar method; both variates of an
 * accepted pair are used, in order.
 */
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    [[nodiscard]] std::uint64_t next_u64() noexcept { return mix64(key_ + (++counter_) * kGamma); }

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    [[nodiscard]] double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    [[nodiscard]] double gaussian() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace qlcp
