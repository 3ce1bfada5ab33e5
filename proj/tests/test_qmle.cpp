#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "qlcp/errors.hpp"
#include "qlcp/qmle.hpp"
#include "qlcp/random.hpp"
#include "qlcp/simulate.hpp"

using namespace qlcp;
using Catch::Approx;

namespace {

std::vector<double> simulate(const ModelSpec& spec, const ParamVector& theta, std::size_t n, std::uint64_t seed) {
    SimPlan plan(spec, theta);
    plan.n = n;
    plan.seed = seed;
    return generate(plan);
}

// Least-squares AR(p) fit with zero pre-sample values, solved by QR.
Vector least_squares(const std::vector<double>& x, std::size_t p) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Matrix Z = Matrix::Zero(n, static_cast<Eigen::Index>(p));
    Vector y(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        y[t] = x[static_cast<std::size_t>(t)];
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j)
            if (t - 1 - j >= 0) Z(t, j) = x[static_cast<std::size_t>(t - 1 - j)];
    }
    return Z.colPivHouseholderQr().solve(y);
}

} // namespace

TEST_CASE("AR estimate equals least squares at interior optima", "[qmle][oracle]") {
    int interior = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto x = simulate(ModelSpec::ar(1), ParamVector{0.5}, 300, derive_seed(100, s));
        const Vector ls = least_squares(x, 1);
        const auto est = estimate(ModelSpec::ar(1), SeriesSegment::whole(x));
        REQUIRE(est.converged);
        if (est.boundary_active) continue;
        ++interior;
        CHECK(std::abs(est.theta_hat[0] - ls[0]) < 1e-6);
    }
    CHECK(interior == 50);

    const auto x = simulate(ModelSpec::ar(2), ParamVector{0.4, 0.2}, 500, 3);
    const auto est = estimate(ModelSpec::ar(2), SeriesSegment::whole(x));
    REQUIRE(est.converged);
    CHECK((est.theta_hat.values() - least_squares(x, 2)).norm() < 1e-6);
}

TEST_CASE("ARCH estimate is close to the truth on long series", "[qmle]") {
    const ParamVector truth{1, 0.3};
    const auto x = simulate(ModelSpec::arch(), truth, 20000, 5);
    const auto est = estimate(ModelSpec::arch(), SeriesSegment::whole(x));
    REQUIRE(est.converged);
    CHECK(est.theta_hat[0] == Approx(1.0).margin(0.05));
    CHECK(est.theta_hat[1] == Approx(0.3).margin(0.05));
}

TEST_CASE("GARCH estimate converges with a small gradient", "[qmle]") {
    const auto x = simulate(ModelSpec::garch(), ParamVector{1, 0.3, 0.5}, 5000, 8);
    const auto est = estimate(ModelSpec::garch(), SeriesSegment::whole(x));
    REQUIRE(est.converged);
    CHECK_FALSE(est.boundary_active);
    CHECK(est.grad_norm <= 1e-8 * 5000);
    CHECK(est.theta_hat[2] == Approx(0.5).margin(0.15));
}

TEST_CASE("Estimate beats every probe point", "[qmle][property]") {
    for (const auto& spec : {ModelSpec::arch(), ModelSpec::garch()}) {
        const auto x = simulate(spec, spec.dim() == 2 ? ParamVector{1, 0.3} : ParamVector{1, 0.4, 0.1}, 400, 21);
        const auto seg = SeriesSegment::whole(x);
        const auto est = estimate(spec, seg);
        REQUIRE(est.converged);
        for (const auto& p : quasi_random_points(spec, 300))
            CHECK(loglik_value(spec, p, seg) <= est.loglik_at_opt + 1e-9 * std::abs(est.loglik_at_opt));
    }
}

TEST_CASE("Boundary optima are reported as active", "[qmle]") {
    // A constant series has no variance dynamics: alpha_1 = 0 is optimal.
    const std::vector<double> x(200, 1.5);
    const auto est = estimate(ModelSpec::arch(), SeriesSegment::whole(x));
    REQUIRE(est.converged);
    CHECK(est.boundary_active);
    CHECK(est.theta_hat[1] == Approx(0.0).margin(1e-8));

    // Negatively correlated squares push alpha_1 to its lower bound.
    std::vector<double> y(300);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = t % 2 ? 0.1 : 3.0;
    const auto e = estimate(ModelSpec::arch(), SeriesSegment::whole(y));
    REQUIRE(e.converged);
    CHECK(e.boundary_active);
}

TEST_CASE("Warm start from the cold optimum stays there", "[qmle]") {
    for (const auto& spec : {ModelSpec::ar(1), ModelSpec::arch()}) {
        const auto x = simulate(spec, spec.dim() == 1 ? ParamVector{0.5} : ParamVector{1, 0.3}, 600, 4);
        const auto seg = SeriesSegment::head(x, 400);
        const auto cold = estimate(spec, seg);
        const auto warm = estimate(spec, seg, cold.theta_hat);
        REQUIRE(warm.converged);
        CHECK((warm.theta_hat.values() - cold.theta_hat.values()).norm() < 1e-6);
        // Starting from the neighbouring segment's optimum reaches the same point.
        const auto next = estimate(spec, SeriesSegment::head(x, 401), cold.theta_hat);
        const auto next_cold = estimate(spec, SeriesSegment::head(x, 401));
        CHECK((next.theta_hat.values() - next_cold.theta_hat.values()).norm() < 1e-6);
    }
}

TEST_CASE("Estimation input errors", "[qmle]") {
    const std::vector<double> x{1, 2, 3};
    CHECK_THROWS_AS(estimate(ModelSpec::garch(), SeriesSegment::head(x, 3)), SizingError);
    CHECK_THROWS_AS(estimate(ModelSpec::ar(1), SeriesSegment::whole(x), ParamVector{1.2}), DomainError);
}

TEST_CASE("Box QP solutions satisfy KKT conditions", "[qmle][qp]") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    const Eigen::Index d = 3;
    Matrix A(2 * d, d);
    A << Matrix::Identity(d, d), -Matrix::Identity(d, d);
    for (int rep = 0; rep < 100; ++rep) {
        Matrix M(d, d);
        for (Eigen::Index i = 0; i < d * d; ++i) M.data()[i] = z(rng);
        const Matrix H = M * M.transpose() + 0.1 * Matrix::Identity(d, d);
        Vector g(d);
        for (Eigen::Index i = 0; i < d; ++i) g[i] = 3 * z(rng);
        Vector c(2 * d);
        for (Eigen::Index i = 0; i < 2 * d; ++i) c[i] = std::abs(z(rng)) * (rep % 3 == 0 && i == 0 ? 0.0 : 1.0);
        const Vector p = solve_linear_qp(H, g, A, c);
        REQUIRE(((A * p - c).array() <= 1e-10).all());
        // Box KKT: per coordinate, the gradient points outward at an active bound and vanishes otherwise.
        const Vector grad = H * p + g;
        for (Eigen::Index i = 0; i < d; ++i) {
            const bool at_upper = std::abs(p[i] - c[i]) < 1e-9;
            const bool at_lower = std::abs(p[i] + c[d + i]) < 1e-9;
            if (at_upper && !at_lower) CHECK(grad[i] <= 1e-8);
            else if (at_lower && !at_upper) CHECK(grad[i] >= -1e-8);
            else if (!at_upper && !at_lower) CHECK(std::abs(grad[i]) < 1e-8);
        }
    }
}

TEST_CASE("Unconstrained QP is the Newton step", "[qmle][qp]") {
    Matrix H(2, 2);
    H << 2, 0.5, 0.5, 1;
    const Vector g = Vector::Constant(2, 1.0);
    Matrix A(1, 2);
    A << 1, 1;
    const Vector c = Vector::Constant(1, 100.0);
    const Vector p = solve_linear_qp(H, g, A, c);
    CHECK((p - H.ldlt().solve(-g)).norm() < 1e-12);
}
