#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qlcp/test_stat.hpp"

namespace qlcp {

/**
 * @brief One numeric value per line.
 *
 * A single non-numeric first line is taken as a header. Blank lines are
 * skipped. Throws ParseError with the offending line number otherwise, and
 * for input with no values.
 */
[[nodiscard]] std::vector<double> read_series(std::istream& in);
[[nodiscard]] std::vector<double> read_series_file(const std::string& path);

/// Header `x` followed by one value per line at full precision.
void write_series(std::ostream& out, const std::vector<double>& series);
void write_series_file(const std::string& path, const std::vector<double>& series);

/// Scan curve as written by write_scan_curve.
struct ScanCurve {
    std::vector<std::size_t> k;
    std::vector<double> q1;
    std::vector<double> q2;
    double C_alpha = 0.0;
};

/**
 * @brief `#`-prefixed summary lines (including `C_alpha=`) followed by a
 * `k,q1,q2` table with 17 significant digits. Missing values print as `nan`.
 */
void write_scan_curve(std::ostream& out, const ScanResult& result);
[[nodiscard]] ScanCurve read_scan_curve(std::istream& in);

/// Human-readable summary with 6 significant digits.
void print_summary(std::ostream& out, const ScanResult& result);

} // namespace qlcp
