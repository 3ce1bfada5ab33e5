#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qlcp/critical_values.hpp"
#include "qlcp/simulate.hpp"
#include "qlcp/test_stat.hpp"

namespace qlcp {

enum class WindowPolicy { ar_default, garch_default, explicit_vn };

/// v_n for a policy: the AR or GARCH default rule (clamped), or the given value.
[[nodiscard]] ScanWindow policy_window(WindowPolicy policy, const ModelSpec& spec, std::size_t n, std::size_t vn = 0);

/// Monte Carlo design. The seed of `plan` is ignored; replication r uses derive_seed(base_seed, r).
struct ExperimentConfig {
    SimPlan plan{ModelSpec::ar(1), ParamVector{0.0}};
    std::size_t replications = 100;
    double alpha = 0.05;
    WindowPolicy window_policy = WindowPolicy::ar_default;
    std::size_t vn = 0; ///< used with WindowPolicy::explicit_vn
    std::uint64_t base_seed = 1;
    CriticalTable table = CriticalTable::builtin();
    ScanOptions scan;
};

struct ReplicationRecord {
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    double Q = 0.0;
    Decision decision = Decision::fail_to_reject;
    std::size_t argmax_k = 0;
    bool flagged = false; ///< the scan failed; excluded from the rate
    std::string error;
};

struct ExperimentReport {
    double rejection_rate = 0.0; ///< rejections / unflagged replications
    std::size_t rejections = 0;
    std::size_t flagged = 0;
    std::vector<ReplicationRecord> per_rep;
    double wall_time = 0.0; ///< seconds
    ExperimentConfig config;
};

/// Largest fraction of flagged replications an experiment tolerates.
inline constexpr double kMaxFlaggedFraction = 0.05;

/**
 * @brief Simulates and scans every replication, in parallel when `parallel` is set.
 *
 * Throws CalibrationRequired when the table lacks (d, alpha) and Error
 * when more than 5% of replications fail.
 */
[[nodiscard]] ExperimentReport run_experiment(const ExperimentConfig& config, bool parallel = true);

/**
 * @brief Reads a `key = value` experiment file.
 *
 * Keys: model, order, theta, theta2, break (index) or break_fraction,
 * n, reps, alpha, window (ar | garch | integer v_n), seed, burn_in,
 * table (path). Lists are comma separated; `#` starts a comment.
 */
[[nodiscard]] ExperimentConfig parse_experiment_config(std::istream& in);

void write_report_csv(std::ostream& out, const ExperimentReport& report);
void print_report(std::ostream& out, const ExperimentReport& report);

} // namespace qlcp
