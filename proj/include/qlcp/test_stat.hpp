#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "qlcp/critical_values.hpp"
#include "qlcp/model.hpp"
#include "qlcp/qmle.hpp"

namespace qlcp {

/// G is treated as singular above this condition number.
inline constexpr double kDefaultCondMax = 1e12;

/**
 * @brief Information matrices of a segment at its estimate.
 *
 * G = (1/Card T) sum_t grad q_t grad q_t'
 * F = -(2/Card T) hessian of loglik = (1/Card T) sum_t hessian q_t
 */
struct InfoMatrices {
    Matrix G_hat;
    Matrix F_hat;
    bool G_invertible = false;
    double cond_G = std::numeric_limits<double>::infinity();
};

[[nodiscard]] InfoMatrices info_matrices(const ModelSpec& spec, const SeriesSegment& segment,
                                         const ParamVector& theta_hat, double cond_max = kDefaultCondMax);

/**
 * @brief Sigma_{n,k} = (k/n) F_L G_L^{-1} F_L + ((n-k)/n) F_R G_R^{-1} F_R.
 *
 * A side whose G is not invertible contributes nothing, so both sides
 * singular gives the zero matrix.
 */
[[nodiscard]] Matrix sigma_hat(const InfoMatrices& left, const InfoMatrices& right, std::size_t k, std::size_t n);

/// Same, estimating the information matrices of T_k and its complement from the estimates.
[[nodiscard]] Matrix sigma_hat(const ModelSpec& spec, std::span<const double> series, std::size_t k,
                               const EstimateResult& est_left, const EstimateResult& est_right,
                               double cond_max = kDefaultCondMax);

enum class Decision { reject, fail_to_reject };

[[nodiscard]] const char* to_string(Decision d) noexcept;

/// Rejects iff Q > C_alpha. Throws CalibrationRequired if the table lacks (d, alpha).
[[nodiscard]] Decision decide(double Q, std::size_t d, double alpha, const CriticalTable& table);

struct ScanOptions {
    OptimOptions optim;
    double cond_max = kDefaultCondMax;
    /// Pi_n is cut into chunks of this many k; each chunk starts cold and warm-starts inside.
    std::size_t chunk_size = 128;
    /// The scan fails when more than this fraction of k have no converged estimate.
    double max_missing_fraction = 0.10;
    bool parallel = true;
};

/**
 * @brief Per-k scan statistics and the test decision.
 *
 * q1[i] and q2[i] belong to k_values[i]; NaN marks a k whose segment
 * estimate did not converge. Such k are excluded from the maxima.
 */
struct ScanResult {
    ScanWindow window;
    std::vector<std::size_t> k_values;
    std::vector<double> q1;
    std::vector<double> q2;
    double Q1 = 0.0;
    double Q2 = 0.0;
    double Q = 0.0;
    std::size_t argmax_k = 0;
    ParamVector theta_full;
    Decision decision = Decision::fail_to_reject;
    double C_alpha = 0.0;
    double alpha = 0.0;
    std::size_t missing = 0;
};

/**
 * @brief Scans every k in Pi_n and compares Q = max(Q1, Q2) with C_alpha.
 *
 * Estimates on T_k are warm-started left to right and those on the
 * complement right to left inside fixed chunks of Pi_n. Chunks run in
 * parallel when `opts.parallel` is set; the chunking does not depend on
 * the thread count, so the result is identical either way.
 *
 * Throws SizingError when the window does not match the series, Error when
 * the full-sample estimate fails or more than `max_missing_fraction` of
 * Pi_n is missing.
 */
[[nodiscard]] ScanResult scan(const ModelSpec& spec, std::span<const double> series, const ScanWindow& window,
                              double alpha, const CriticalTable& table, const ScanOptions& opts = {});

/// Serial brute-force reference: every segment estimate is a cold multi-start.
[[nodiscard]] ScanResult scan_reference(const ModelSpec& spec, std::span<const double> series,
                                        const ScanWindow& window, double alpha, const CriticalTable& table,
                                        const ScanOptions& opts = {});

} // namespace qlcp
