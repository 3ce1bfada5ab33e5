#pragma once

#include <optional>

#include "qlcp/likelihood.hpp"
#include "qlcp/model.hpp"

namespace qlcp {

struct OptimOptions {
    double grad_tol_per_obs = 1e-8; ///< gradient tolerance is this times Card(T)
    int max_iter = 200;             ///< per start
    int n_starts = 5;               ///< domain center plus n_starts-1 quasi-random points
    double armijo = 1e-4;
    int max_backtracks = 60;
};

struct EstimateResult {
    ParamVector theta_hat;
    double loglik_at_opt = 0.0;
    double grad_norm = 0.0; ///< Euclidean norm of the loglik gradient at theta_hat (large only when a constraint is active)
    int iterations = 0;
    bool converged = false;
    bool boundary_active = false;
};

/**
 * @brief Quasi-maximum likelihood estimate of theta on a segment.
 *
 * Maximises loglik over the parameter domain by projected Newton ascent:
 * the analytic hessian is made negative definite by reflecting its
 * eigenvalues, the resulting quadratic model is maximised exactly over the
 * (linear) domain by an active-set QP, and a backtracking Armijo search
 * runs along that feasible step.
 *
 * Without `init` the search runs from the domain center and
 * `n_starts - 1` Halton points and keeps the best local optimum. With
 * `init` it runs a single warm start.
 *
 * A flat objective returns its start point with `converged` set. When no
 * start reaches a stationary point, the best iterate is returned with
 * `converged == false`.
 *
 * Throws SizingError when Card(T) < d + 1 and DomainError when `init` is
 * outside the domain.
 */
[[nodiscard]] EstimateResult estimate(const ModelSpec& spec, const SeriesSegment& segment,
                                      const std::optional<ParamVector>& init = std::nullopt,
                                      const OptimOptions& opts = {});

/**
 * @brief Minimiser of 1/2 p'Hp + g'p subject to A p <= c.
 *
 * H must be positive definite and c >= 0 so that p = 0 is feasible.
 * Exposed for testing.
 */
[[nodiscard]] Vector solve_linear_qp(const Matrix& H, const Vector& g, const Matrix& A, const Vector& c);

} // namespace qlcp
