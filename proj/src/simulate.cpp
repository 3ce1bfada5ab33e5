#include "qlcp/simulate.hpp"

#include <cmath>
#include <deque>

#include "qlcp/errors.hpp"
#include "qlcp/random.hpp"

namespace qlcp {

void validate(const SimPlan& plan) {
    if (plan.n < 1) throw ValidationError("simulation length n must be positive");
    if (plan.theta0.size() != plan.spec.dim() || !in_domain(plan.spec, plan.theta0))
        throw ValidationError("theta0 is not a point of the " + plan.spec.name() + " domain");
    if (plan.theta1.has_value() != plan.break_index.has_value())
        throw ValidationError("theta1 and the break index must be given together");
    if (plan.theta1) {
        if (plan.theta1->size() != plan.spec.dim() || !in_domain(plan.spec, *plan.theta1))
            throw ValidationError("theta1 is not a point of the " + plan.spec.name() + " domain");
        if (*plan.break_index < 1 || *plan.break_index >= plan.n)
            throw ValidationError("break index must satisfy 1 <= k* < n");
    }
}

std::vector<double> generate(const SimPlan& plan) { return generate_path(plan).x; }

SimPath generate_path(const SimPlan& plan) {
    validate(plan);
    CounterRng rng(plan.seed);
    const std::size_t total = plan.burn_in + plan.n;
    const std::size_t switch_at = plan.break_index ? plan.burn_in + *plan.break_index : total;
    SimPath out;
    out.x.reserve(plan.n);
    out.sigma2.reserve(plan.n);

    auto theta_at = [&](std::size_t step) -> const ParamVector& {
        return step > switch_at ? *plan.theta1 : plan.theta0;
    };

    if (plan.spec.family() == Family::ar) {
        const std::size_t p = plan.spec.dim();
        std::deque<double> lags(p, 0.0); // lags[k] = X_{t-1-k}
        for (std::size_t step = 1; step <= total; ++step) {
            const ParamVector& th = theta_at(step);
            double x = rng.gaussian();
            for (std::size_t k = 0; k < p; ++k) x += th[k] * lags[k];
            lags.pop_back();
            lags.push_front(x);
            if (step > plan.burn_in) {
                out.x.push_back(x);
                out.sigma2.push_back(1.0);
            }
        }
        return out;
    }

    const bool garch = plan.spec.family() == Family::garch;
    auto persistence = [&](const ParamVector& th) { return th[1] + (garch ? th[2] : 0.0); };
    double sigma2 = plan.theta0[0] / (1.0 - persistence(plan.theta0));
    double x_prev = std::sqrt(sigma2);
    for (std::size_t step = 1; step <= total; ++step) {
        const ParamVector& th = theta_at(step);
        sigma2 = th[0] + th[1] * x_prev * x_prev + (garch ? th[2] * sigma2 : 0.0);
        x_prev = std::sqrt(sigma2) * rng.gaussian();
        if (step > plan.burn_in) {
            out.x.push_back(x_prev);
            out.sigma2.push_back(sigma2);
        }
    }
    return out;
}

} // namespace qlcp
