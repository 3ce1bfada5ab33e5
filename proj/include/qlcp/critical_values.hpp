#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qlcp {

/// Quantile level used for C_alpha: 1 - alpha/2 (the test takes the max of two statistics).
[[nodiscard]] double quantile_level(double alpha, bool halve_alpha = true);

/**
 * @brief Samples of sup_{0<=tau<=1} ||W_d(tau)||^2 for a d-dimensional Brownian bridge.
 *
 * Each replication draws d Gaussian random walks of m steps scaled by
 * 1/sqrt(m), turns them into bridges with W(tau_j) = B(tau_j) - tau_j B(1)
 * and records max_j sum_i W_i(tau_j)^2. Replication r uses the stream
 * derive_seed(seed, r), so the result does not depend on thread count.
 *
 * Requires d >= 1, m >= 100, R >= 1000; throws ValidationError otherwise.
 */
[[nodiscard]] std::vector<double> simulate_sup_bb(std::size_t d, std::size_t m, std::size_t R, std::uint64_t seed);

/**
 * @brief The bridge behind one replication: entry i * (m + 1) + j is W_i(j / m).
 *
 * Replication r of simulate_sup_bb(d, m, R, seed) uses key derive_seed(seed, r).
 */
[[nodiscard]] std::vector<double> bridge_path(std::size_t d, std::size_t m, std::uint64_t key);

/// Single-threaded reference for simulate_sup_bb. Produces the identical vector.
[[nodiscard]] std::vector<double> simulate_sup_bb_serial(std::size_t d, std::size_t m, std::size_t R,
                                                         std::uint64_t seed);

/// Sample quantile with linear interpolation between order statistics (h = (N-1) * level).
[[nodiscard]] double empirical_quantile(std::span<const double> samples, double level);

/// C_alpha from samples: the (1 - alpha/2) empirical quantile.
[[nodiscard]] double quantile(std::span<const double> samples, double alpha);

/// Quantiles C_alpha indexed by (d, alpha), with the simulation settings that produced them.
class CriticalTable {
public:
    struct Entry {
        double c = 0.0;
        std::size_t m = 0;
        std::size_t R = 0;
        std::uint64_t seed = 0;
    };

    void set(std::size_t d, double alpha, Entry entry);
    [[nodiscard]] std::optional<Entry> find(std::size_t d, double alpha) const;
    /// C_alpha for (d, alpha). Throws CalibrationRequired when absent.
    [[nodiscard]] double quantile(std::size_t d, double alpha) const;
    [[nodiscard]] bool covers(std::size_t d, double alpha) const { return find(d, alpha).has_value(); }
    [[nodiscard]] const std::map<std::pair<std::size_t, double>, Entry>& entries() const noexcept { return entries_; }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }

    /// Shipped table: d in {1, 2, 3}, alpha = 0.05, calibrated with m = 1000, R = 100000.
    static CriticalTable builtin();

    /// Plain-text table with header `d,alpha,C,m,R,seed`.
    static CriticalTable read(std::istream& in);
    static CriticalTable read_file(const std::string& path);
    void write(std::ostream& out) const;
    void write_file(const std::string& path) const;

private:
    std::map<std::pair<std::size_t, double>, Entry> entries_;
};

struct CalibrationOptions {
    std::size_t m = 1000;
    std::size_t R = 100000;
    std::uint64_t seed = 20240601;
    bool halve_alpha = true;
};

/// Simulates each d once and reads off every alpha.
[[nodiscard]] CriticalTable calibrate(std::span<const std::size_t> dims, std::span<const double> alphas,
                                      const CalibrationOptions& opts = {});

} // namespace qlcp
