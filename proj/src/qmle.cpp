#include "qlcp/qmle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qlcp/errors.hpp"

namespace qlcp {

namespace {

constexpr double kActiveTol = 1e-10;

// Reflect negative eigenvalues and floor tiny ones so the quadratic model is strictly convex.
Matrix make_positive_definite(const Matrix& H) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
    Vector lambda = eig.eigenvalues().cwiseAbs();
    const double floor = std::max(1e-8 * lambda.maxCoeff(), 1e-12);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) lambda[i] = std::max(lambda[i], floor);
    return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

bool any_active(const LinearConstraints& lc, const Vector& theta) {
    const Vector slack = lc.b - lc.A * theta;
    for (Eigen::Index i = 0; i < slack.size(); ++i)
        if (slack[i] <= kActiveTol * (1.0 + std::abs(lc.b[i]))) return true;
    return false;
}

struct LocalRun {
    Vector theta;
    LikelihoodEval eval;
    int iterations = 0;
    bool converged = false;
    bool boundary = false;
};

class Objective {
public:
    Objective(const ModelSpec& spec, const SeriesSegment& seg) : spec_(spec), seg_(seg) {}

    [[nodiscard]] LikelihoodEval full(const Vector& theta) const {
        return loglik(spec_, ParamVector(theta), seg_, EvalRequest{2, false, false});
    }
    [[nodiscard]] double value(const Vector& theta) const { return loglik_value(spec_, ParamVector(theta), seg_); }
    [[nodiscard]] Vector feasible(const Vector& theta) const {
        return in_domain(spec_, ParamVector(theta)) ? theta : project(spec_, ParamVector(theta)).values();
    }

private:
    const ModelSpec& spec_;
    const SeriesSegment& seg_;
};

// Distance moved by a unit projected-gradient step; zero exactly at KKT points of the domain.
double stationarity(const Objective& obj, const Vector& theta, const Vector& gradient) {
    return (obj.feasible(theta + gradient) - theta).norm();
}

// Projected Newton ascent on loglik from one start. Works on f = -loglik.
LocalRun local_search(const Objective& obj, const LinearConstraints& lc, const Vector& start, double grad_tol,
                      const OptimOptions& opts) {
    LocalRun run;
    run.theta = obj.feasible(start);
    run.eval = obj.full(run.theta);

    for (; run.iterations < opts.max_iter; ++run.iterations) {
        const Vector g = -run.eval.gradient;
        const double f = -run.eval.value;
        if (g.norm() <= grad_tol || stationarity(obj, run.theta, run.eval.gradient) <= grad_tol) {
            run.converged = true;
            break;
        }

        const Vector slack = (lc.b - lc.A * run.theta).cwiseMax(0.0);
        const Matrix H = make_positive_definite(-run.eval.hessian);
        Vector p = solve_linear_qp(H, g, lc.A, slack);

        if (p.norm() <= 1e-12 * (1.0 + run.theta.norm())) {
            run.converged = any_active(lc, run.theta);
            break;
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            if (attempt == 1) {
                // Newton model failed to decrease f: fall back to a scaled gradient step.
                const double scale = std::max(H.diagonal().maxCoeff(), 1e-12);
                p = solve_linear_qp(Matrix::Identity(g.size(), g.size()) * scale, g, lc.A, slack);
            }
            const double slope = g.dot(p);
            if (!(slope < 0.0)) continue;
            double step = 1.0;
            for (int bt = 0; bt < opts.max_backtracks; ++bt, step *= 0.5) {
                const Vector trial = obj.feasible(run.theta + step * p);
                const double ft = -obj.value(trial);
                if (std::isfinite(ft) && ft <= f + opts.armijo * step * slope) {
                    run.theta = trial;
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) break;
        run.eval = obj.full(run.theta);
    }
    if (!run.converged) run.converged = stationarity(obj, run.theta, run.eval.gradient) <= grad_tol;

    // A point within tolerance of a face but not on it: move onto the face so the
    // reported gradient is explained by an active constraint.
    if (run.converged && run.eval.gradient.norm() > grad_tol && !any_active(lc, run.theta)) {
        run.theta = obj.feasible(run.theta + run.eval.gradient);
        run.eval = obj.full(run.theta);
    }
    run.boundary = any_active(lc, run.theta);
    return run;
}

EstimateResult to_result(const LocalRun& run) {
    EstimateResult r;
    r.theta_hat = ParamVector(run.theta);
    r.loglik_at_opt = run.eval.value;
    r.grad_norm = run.eval.gradient.norm();
    r.iterations = run.iterations;
    r.converged = run.converged;
    r.boundary_active = run.boundary;
    return r;
}

} // namespace

Vector solve_linear_qp(const Matrix& H, const Vector& g, const Matrix& A, const Vector& c) {
    const Eigen::Index d = g.size();
    Vector p = Vector::Zero(d);
    std::vector<Eigen::Index> work;

    auto independent_with = [&](Eigen::Index row) {
        if (static_cast<Eigen::Index>(work.size()) >= d) return false;
        Matrix M(static_cast<Eigen::Index>(work.size()) + 1, d);
        for (std::size_t i = 0; i < work.size(); ++i) M.row(static_cast<Eigen::Index>(i)) = A.row(work[i]);
        M.row(M.rows() - 1) = A.row(row);
        Eigen::FullPivLU<Matrix> lu(M);
        lu.setThreshold(1e-10);
        return lu.rank() == M.rows();
    };

    for (Eigen::Index i = 0; i < A.rows(); ++i)
        if (c[i] <= kActiveTol * (1.0 + std::abs(c[i])) && independent_with(i)) work.push_back(i);

    const double scale = std::max(H.cwiseAbs().maxCoeff(), 1e-300);
    for (int iter = 0; iter < 100 + 4 * static_cast<int>(A.rows()); ++iter) {
        const auto m = static_cast<Eigen::Index>(work.size());
        Matrix K = Matrix::Zero(d + m, d + m);
        K.topLeftCorner(d, d) = H;
        for (Eigen::Index i = 0; i < m; ++i) {
            K.block(d + i, 0, 1, d) = A.row(work[static_cast<std::size_t>(i)]);
            K.block(0, d + i, d, 1) = A.row(work[static_cast<std::size_t>(i)]).transpose();
        }
        Vector rhs = Vector::Zero(d + m);
        rhs.head(d) = -(H * p + g);
        const Vector sol = K.fullPivLu().solve(rhs);
        const Vector s = sol.head(d);

        if (s.norm() <= 1e-14 * (1.0 + p.norm())) {
            if (m == 0) break;
            const Vector lambda = sol.tail(m);
            Eigen::Index worst = 0;
            const double most_negative = lambda.minCoeff(&worst);
            if (most_negative >= -1e-12 * scale) break;
            work.erase(work.begin() + worst);
            continue;
        }

        double alpha = 1.0;
        Eigen::Index blocking = -1;
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            if (std::find(work.begin(), work.end(), i) != work.end()) continue;
            const double as = A.row(i).dot(s);
            if (as <= 0.0) continue;
            const double room = std::max(c[i] - A.row(i).dot(p), 0.0);
            if (room / as < alpha) {
                alpha = room / as;
                blocking = i;
            }
        }
        p += alpha * s;
        if (blocking < 0) continue;
        if (static_cast<Eigen::Index>(work.size()) < d) work.push_back(blocking);
        else break;
    }
    return p;
}

EstimateResult estimate(const ModelSpec& spec, const SeriesSegment& segment, const std::optional<ParamVector>& init,
                        const OptimOptions& opts) {
    if (segment.size() < spec.dim() + 1)
        throw SizingError("segment of " + std::to_string(segment.size()) + " observations is too short to estimate " +
                          spec.name() + "; need at least " + std::to_string(spec.dim() + 1));
    if (init && !in_domain(spec, *init)) throw DomainError("initial point lies outside the domain of " + spec.name());

    const Objective obj(spec, segment);
    const LinearConstraints lc = linear_constraints(spec);
    const double grad_tol = opts.grad_tol_per_obs * static_cast<double>(segment.size());

    if (init) return to_result(local_search(obj, lc, init->values(), grad_tol, opts));

    std::vector<ParamVector> starts{domain_center(spec)};
    if (opts.n_starts > 1) {
        auto extra = quasi_random_points(spec, static_cast<std::size_t>(opts.n_starts - 1));
        starts.insert(starts.end(), extra.begin(), extra.end());
    }

    std::optional<LocalRun> best;
    for (const auto& s : starts) {
        LocalRun run = local_search(obj, lc, s.values(), grad_tol, opts);
        const bool better = !best || (run.converged && !best->converged) ||
                            (run.converged == best->converged && run.eval.value > best->eval.value);
        if (better) best = std::move(run);
    }
    return to_result(*best);
}

} // namespace qlcp
