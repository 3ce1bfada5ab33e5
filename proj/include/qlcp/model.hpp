#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qlcp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Causal model families supported by the test.
enum class Family { ar, arch, garch };

[[nodiscard]] std::string to_string(Family family);
[[nodiscard]] Family parse_family(const std::string& name);

/**
 * @brief Compact parameter set: a coordinate box intersected with the
 * family's stationarity constraint.
 *
 * AR(p):        sum_i |phi_i|  <= 1 - stationarity_margin
 * ARCH(1):      alpha_1        <= 1 - stationarity_margin
 * GARCH(1,1):   alpha_1 + beta_1 <= 1 - stationarity_margin
 *
 * For ARCH/GARCH the first lower bound is the variance floor and must be > 0.
 */
struct ParamDomain {
    std::vector<double> lower;
    std::vector<double> upper;
    double stationarity_margin = 0.02;
};

/// Point in R^d. Domain membership is checked against a ModelSpec.
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(Vector values) : values_(std::move(values)) {}
    ParamVector(std::initializer_list<double> values);
    explicit ParamVector(const std::vector<double>& values);

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
    [[nodiscard]] const Vector& values() const noexcept { return values_; }
    [[nodiscard]] std::vector<double> to_std() const { return {values_.data(), values_.data() + values_.size()}; }

    friend bool operator==(const ParamVector& a, const ParamVector& b) {
        return a.values_.size() == b.values_.size() && a.values_ == b.values_;
    }

private:
    Vector values_;
};

/// Linear description of the domain: A * theta <= b.
struct LinearConstraints {
    Matrix A;
    Vector b;
};

/**
 * @brief Model family, order and parameter domain.
 *
 * Immutable after construction; the constructor rejects empty or
 * malformed domains.
 */
class ModelSpec {
public:
    static constexpr int kMaxArOrder = 10;
    static constexpr double kDefaultMargin = 0.02;
    static constexpr double kDefaultAlpha0Lower = 1e-4;
    static constexpr double kDefaultAlpha0Upper = 100.0;

    ModelSpec(Family family, int order, ParamDomain domain);

    /// AR(p) with box [-1, 1]^p.
    static ModelSpec ar(int p, double margin = kDefaultMargin);
    /// ARCH(1) with alpha_0 in [alpha0_lower, alpha0_upper], alpha_1 in [0, 1].
    static ModelSpec arch(double alpha0_lower = kDefaultAlpha0Lower,
                          double alpha0_upper = kDefaultAlpha0Upper,
                          double margin = kDefaultMargin);
    /// GARCH(1,1) with alpha_0 in [alpha0_lower, alpha0_upper], alpha_1, beta_1 in [0, 1].
    static ModelSpec garch(double alpha0_lower = kDefaultAlpha0Lower,
                           double alpha0_upper = kDefaultAlpha0Upper,
                           double margin = kDefaultMargin);
    /// Default-domain spec for a family; `order` is used only for AR.
    static ModelSpec make(Family family, int order = 1);

    [[nodiscard]] Family family() const noexcept { return family_; }
    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(dim_); }
    [[nodiscard]] const ParamDomain& domain() const noexcept { return domain_; }
    [[nodiscard]] std::string name() const;

    /// Right-hand side of the stationarity inequality.
    [[nodiscard]] double stationarity_bound() const noexcept { return 1.0 - domain_.stationarity_margin; }

private:
    Family family_;
    int order_;
    int dim_;
    ParamDomain domain_;
};

/// True iff theta satisfies the box bounds and the stationarity inequality.
/// Throws ShapeError when theta has the wrong length.
[[nodiscard]] bool in_domain(const ModelSpec& spec, const ParamVector& theta);

/// Euclidean projection onto the domain.
[[nodiscard]] ParamVector project(const ModelSpec& spec, const ParamVector& theta);

/// Domain written as linear inequalities (AR uses the 2^p sign facets of the l1 ball).
[[nodiscard]] LinearConstraints linear_constraints(const ModelSpec& spec);

/// Box midpoint projected onto the domain.
[[nodiscard]] ParamVector domain_center(const ModelSpec& spec);

/// `count` deterministic quasi-random (Halton) points mapped into the box and projected onto the domain.
[[nodiscard]] std::vector<ParamVector> quasi_random_points(const ModelSpec& spec, std::size_t count);

/**
 * @brief Observed trajectory X_1..X_n with a contiguous index window T = {start..end}.
 *
 * Non-owning: the referenced data must outlive the segment. Indices are
 * 1-based to match the time index of the series.
 */
class SeriesSegment {
public:
    SeriesSegment(std::span<const double> data, std::size_t start, std::size_t end);

    /// T_n = {1..n}.
    static SeriesSegment whole(std::span<const double> data);
    /// T_k = {1..k}.
    static SeriesSegment head(std::span<const double> data, std::size_t k);
    /// Complement of T_k: {k+1..n}.
    static SeriesSegment tail(std::span<const double> data, std::size_t k);

    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::size_t n() const noexcept { return data_.size(); }
    [[nodiscard]] std::size_t start() const noexcept { return start_; }
    [[nodiscard]] std::size_t end() const noexcept { return end_; }
    [[nodiscard]] std::size_t size() const noexcept { return end_ - start_ + 1; }
    [[nodiscard]] bool contains(std::size_t t) const noexcept { return t >= start_ && t <= end_; }

    /// X_t with the pre-sample convention X_t = 0 for t < 1.
    [[nodiscard]] double x(std::ptrdiff_t t) const noexcept {
        return t < 1 ? 0.0 : data_[static_cast<std::size_t>(t - 1)];
    }

private:
    std::span<const double> data_;
    std::size_t start_;
    std::size_t end_;
};

/// Trimming v_n and the scanned index set {v_n, ..., n - v_n}.
struct ScanWindow {
    std::size_t n = 0;
    std::size_t vn = 0;

    [[nodiscard]] std::size_t first() const noexcept { return vn; }
    [[nodiscard]] std::size_t last() const noexcept { return n - vn; }
    [[nodiscard]] std::size_t count() const noexcept { return last() - first() + 1; }
    [[nodiscard]] std::vector<std::size_t> indices() const;
};

/// Smallest series length accepted by default_window.
inline constexpr std::size_t kMinSeriesLength = 20;

/// Unclamped policy value: floor((ln n)^2) for AR, floor((ln n)^2.5) for ARCH/GARCH.
[[nodiscard]] std::size_t window_policy_value(Family family, std::size_t n);

/// Policy value clamped to [d+1, floor(n/2)-1]. Throws SizingError for too-short series.
[[nodiscard]] ScanWindow default_window(const ModelSpec& spec, std::size_t n);

/// User-supplied v_n, validated against d+1 <= v_n < n/2.
[[nodiscard]] ScanWindow explicit_window(const ModelSpec& spec, std::size_t n, std::size_t vn);

} // namespace qlcp
