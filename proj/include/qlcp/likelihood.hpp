#pragma once

#include <cstddef>
#include <vector>

#include "qlcp/model.hpp"

namespace qlcp {

/// Sums over segments of at least this many observations use compensated summation.
inline constexpr std::size_t kCompensatedThreshold = 10000;

/**
 * @brief Truncated conditional mean and variance along t = 1..segment.end().
 *
 * Entry t-1 holds the value at time t. Pre-sample observations are zero.
 * For AR the variance is identically 1 and its derivatives vanish.
 */
struct VolatilityPath {
    std::vector<double> f_hat;
    std::vector<double> h_hat;
    Matrix dh;              ///< d x len, column t-1 is the gradient of h at time t
    std::vector<Matrix> d2h; ///< len entries of d x d
};

/// One observation's contribution q_t with its first and second derivatives.
struct QTerm {
    double value = 0.0;
    Vector grad;
    Matrix hess;
};

/// What loglik should compute beyond the value.
struct EvalRequest {
    int order = 2;            ///< 0: value only, 1: + gradient, 2: + hessian
    bool per_t_grads = false; ///< keep the gradient of every q_t
    bool grad_outer = false;  ///< accumulate sum_t grad q_t grad q_t'
};

/**
 * @brief Quasi-log-likelihood -1/2 sum_{t in T} q_t and its derivatives.
 *
 * `gradient` and `hessian` are derivatives of `value`. `grad_outer` and
 * `per_t_grads` refer to the per-observation q_t (not to -q_t/2).
 */
struct LikelihoodEval {
    double value = 0.0;
    Vector gradient;
    Matrix hessian;
    std::vector<Vector> per_t_grads;
    Matrix grad_outer;
    double hessian_asymmetry = 0.0; ///< max |H - H'| / max |H| before symmetrising
};

[[nodiscard]] VolatilityPath volatility_path(const ModelSpec& spec, const ParamVector& theta,
                                             const SeriesSegment& segment);

[[nodiscard]] QTerm qhat_t(const ModelSpec& spec, const ParamVector& theta, const SeriesSegment& segment,
                           std::size_t t);

[[nodiscard]] LikelihoodEval loglik(const ModelSpec& spec, const ParamVector& theta, const SeriesSegment& segment,
                                    const EvalRequest& request = {});

/// Value-only shortcut used by line searches.
[[nodiscard]] double loglik_value(const ModelSpec& spec, const ParamVector& theta, const SeriesSegment& segment);

} // namespace qlcp
