#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qlcp/model.hpp"

namespace qlcp {

/**
 * @brief Simulation design with at most one parameter change.
 *
 * Observations X_1..X_{k*} follow theta0 and X_{k*+1}..X_n follow theta1.
 */
struct SimPlan {
    SimPlan(ModelSpec spec_, ParamVector theta0_) : spec(std::move(spec_)), theta0(std::move(theta0_)) {}

    ModelSpec spec;
    ParamVector theta0;
    std::optional<ParamVector> theta1;
    std::optional<std::size_t> break_index; ///< k*, 1-based; the change applies from k*+1
    std::size_t n = 0;
    std::size_t burn_in = 500;
    std::uint64_t seed = 0;
};

/// Throws ValidationError unless the plan is complete and both parameter vectors are in the domain.
void validate(const SimPlan& plan);

/**
 * @brief Draws X_1..X_n with i.i.d. N(0,1) innovations.
 *
 * AR:    X_t = sum_k phi_k X_{t-k} + xi_t, pre-sample values zero.
 * ARCH/GARCH: X_t = sigma_t xi_t, sigma_t^2 = a0 + a1 X_{t-1}^2 + b1 sigma_{t-1}^2,
 *        started from sigma_0^2 = X_0^2 = a0 / (1 - a1 - b1).
 *
 * The first `burn_in` draws (under theta0) are discarded. At the break the
 * recursion switches parameters and keeps its state.
 */
[[nodiscard]] std::vector<double> generate(const SimPlan& plan);

/// Series plus the conditional variance sigma_t^2 that produced each X_t (1 for AR).
struct SimPath {
    std::vector<double> x;
    std::vector<double> sigma2;
};

[[nodiscard]] SimPath generate_path(const SimPlan& plan);

} // namespace qlcp
