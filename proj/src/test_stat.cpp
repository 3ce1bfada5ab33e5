#include "qlcp/test_stat.hpp"

#include <cmath>
#include <exception>
#include <optional>

#include "qlcp/errors.hpp"
#include "qlcp/likelihood.hpp"

namespace qlcp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double condition_number(const Matrix& G) {
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(G, Eigen::EigenvaluesOnly).eigenvalues();
    const double hi = ev.maxCoeff();
    const double lo = ev.minCoeff();
    if (!(hi > 0.0) || !(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

// F G^{-1} F via the Cholesky factor of G.
Matrix sandwich(const InfoMatrices& info) {
    Eigen::LLT<Matrix> llt(info.G_hat);
    if (llt.info() != Eigen::Success) return Matrix::Zero(info.F_hat.rows(), info.F_hat.cols());
    const Matrix w = llt.matrixL().solve(info.F_hat);
    return w.transpose() * w;
}

double quadratic_form(const Matrix& sigma, const Vector& delta, double weight) {
    return std::max(0.0, weight * delta.dot(sigma * delta));
}

EstimateResult warm_or_cold(const ModelSpec& spec, const SeriesSegment& seg, const std::optional<ParamVector>& prev,
                            const OptimOptions& opts) {
    if (!prev) return estimate(spec, seg, std::nullopt, opts);
    EstimateResult warm = estimate(spec, seg, *prev, opts);
    if (warm.converged && !warm.boundary_active) return warm;
    // Boundary optima are where the quasi-likelihood tends to be multi-modal: compare with a cold search.
    EstimateResult cold = estimate(spec, seg, std::nullopt, opts);
    if (!warm.converged) return cold;
    return cold.converged && cold.loglik_at_opt > warm.loglik_at_opt ? cold : warm;
}

struct SideEstimates {
    std::vector<std::optional<EstimateResult>> left;
    std::vector<std::optional<EstimateResult>> right;
};

void fill_q(const ModelSpec& spec, std::span<const double> series, std::size_t i, const SideEstimates& est,
            const ScanOptions& opts, ScanResult& res) {
    const auto& l = est.left[i];
    const auto& r = est.right[i];
    if (!l || !r || !l->converged || !r->converged) return;
    const std::size_t n = series.size();
    const std::size_t k = res.k_values[i];
    const Matrix sigma = sigma_hat(spec, series, k, *l, *r, opts.cond_max);
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    res.q1[i] = quadratic_form(sigma, l->theta_hat.values() - res.theta_full.values(), kk * kk / nn);
    res.q2[i] = quadratic_form(sigma, r->theta_hat.values() - res.theta_full.values(), (nn - kk) * (nn - kk) / nn);
}

ScanResult prepare(const ModelSpec& spec, std::span<const double> series, const ScanWindow& window, double alpha,
                   const CriticalTable& table, const ScanOptions& opts) {
    if (window.n != series.size())
        throw SizingError("scan window was built for n = " + std::to_string(window.n) + " but the series has " +
                          std::to_string(series.size()) + " observations");
    if (window.vn < spec.dim() + 1 || 2 * window.vn >= window.n)
        throw SizingError("scan window v_n = " + std::to_string(window.vn) + " is invalid for n = " +
                          std::to_string(window.n));
    ScanResult res;
    res.window = window;
    res.alpha = alpha;
    res.C_alpha = table.quantile(spec.dim(), alpha);
    res.k_values = window.indices();
    res.q1.assign(res.k_values.size(), kNaN);
    res.q2.assign(res.k_values.size(), kNaN);

    const EstimateResult full = estimate(spec, SeriesSegment::whole(series), std::nullopt, opts.optim);
    if (!full.converged) throw Error("full-sample estimate of " + spec.name() + " did not converge");
    res.theta_full = full.theta_hat;
    return res;
}

void finalize(ScanResult& res, const ScanOptions& opts) {
    res.missing = 0;
    res.Q1 = res.Q2 = 0.0;
    double best = -1.0;
    for (std::size_t i = 0; i < res.k_values.size(); ++i) {
        if (std::isnan(res.q1[i]) || std::isnan(res.q2[i])) {
            ++res.missing;
            continue;
        }
        res.Q1 = std::max(res.Q1, res.q1[i]);
        res.Q2 = std::max(res.Q2, res.q2[i]);
        const double q = std::max(res.q1[i], res.q2[i]);
        if (q > best) {
            best = q;
            res.argmax_k = res.k_values[i];
        }
    }
    if (static_cast<double>(res.missing) > opts.max_missing_fraction * static_cast<double>(res.k_values.size()))
        throw Error("segment estimation failed at " + std::to_string(res.missing) + " of " +
                    std::to_string(res.k_values.size()) + " scan points");
    res.Q = std::max(res.Q1, res.Q2);
    res.decision = res.Q > res.C_alpha ? Decision::reject : Decision::fail_to_reject;
}

} // namespace

InfoMatrices info_matrices(const ModelSpec& spec, const SeriesSegment& segment, const ParamVector& theta_hat,
                           double cond_max) {
    const LikelihoodEval ev = loglik(spec, theta_hat, segment, EvalRequest{2, false, true});
    const double card = static_cast<double>(segment.size());
    InfoMatrices info;
    const Matrix g = ev.grad_outer / card;
    info.G_hat = 0.5 * (g + g.transpose());
    info.F_hat = (-2.0 / card) * ev.hessian;
    info.cond_G = condition_number(info.G_hat);
    info.G_invertible = info.cond_G <= cond_max;
    return info;
}

Matrix sigma_hat(const InfoMatrices& left, const InfoMatrices& right, std::size_t k, std::size_t n) {
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    Matrix sigma = Matrix::Zero(left.F_hat.rows(), left.F_hat.cols());
    if (left.G_invertible) sigma += (kk / nn) * sandwich(left);
    if (right.G_invertible) sigma += ((nn - kk) / nn) * sandwich(right);
    return 0.5 * (sigma + sigma.transpose());
}

Matrix sigma_hat(const ModelSpec& spec, std::span<const double> series, std::size_t k, const EstimateResult& est_left,
                 const EstimateResult& est_right, double cond_max) {
    const InfoMatrices left = info_matrices(spec, SeriesSegment::head(series, k), est_left.theta_hat, cond_max);
    const InfoMatrices right = info_matrices(spec, SeriesSegment::tail(series, k), est_right.theta_hat, cond_max);
    return sigma_hat(left, right, k, series.size());
}

const char* to_string(Decision d) noexcept { return d == Decision::reject ? "reject" : "fail_to_reject"; }

Decision decide(double Q, std::size_t d, double alpha, const CriticalTable& table) {
    return Q > table.quantile(d, alpha) ? Decision::reject : Decision::fail_to_reject;
}

ScanResult scan(const ModelSpec& spec, std::span<const double> series, const ScanWindow& window, double alpha,
                const CriticalTable& table, const ScanOptions& opts) {
    ScanResult res = prepare(spec, series, window, alpha, table, opts);
    const std::size_t count = res.k_values.size();
    const std::size_t chunk = std::max<std::size_t>(opts.chunk_size, 1);
    const auto n_chunks = static_cast<std::ptrdiff_t>((count + chunk - 1) / chunk);

    SideEstimates est{std::vector<std::optional<EstimateResult>>(count),
                      std::vector<std::optional<EstimateResult>>(count)};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_chunks));

#pragma omp parallel for schedule(dynamic) if (opts.parallel)
    for (std::ptrdiff_t c = 0; c < n_chunks; ++c) {
        try {
            const std::size_t lo = static_cast<std::size_t>(c) * chunk;
            const std::size_t hi = std::min(lo + chunk, count);
            std::optional<ParamVector> prev;
            for (std::size_t i = lo; i < hi; ++i) {
                est.left[i] = warm_or_cold(spec, SeriesSegment::head(series, res.k_values[i]), prev, opts.optim);
                prev = est.left[i]->converged ? std::optional(est.left[i]->theta_hat) : std::nullopt;
            }
            prev.reset();
            for (std::size_t i = hi; i-- > lo;) {
                est.right[i] = warm_or_cold(spec, SeriesSegment::tail(series, res.k_values[i]), prev, opts.optim);
                prev = est.right[i]->converged ? std::optional(est.right[i]->theta_hat) : std::nullopt;
            }
            for (std::size_t i = lo; i < hi; ++i) fill_q(spec, series, i, est, opts, res);
        } catch (...) {
            errors[static_cast<std::size_t>(c)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    finalize(res, opts);
    return res;
}

ScanResult scan_reference(const ModelSpec& spec, std::span<const double> series, const ScanWindow& window,
                          double alpha, const CriticalTable& table, const ScanOptions& opts) {
    ScanResult res = prepare(spec, series, window, alpha, table, opts);
    const std::size_t count = res.k_values.size();
    SideEstimates est{std::vector<std::optional<EstimateResult>>(count),
                      std::vector<std::optional<EstimateResult>>(count)};
    for (std::size_t i = 0; i < count; ++i) {
        est.left[i] = estimate(spec, SeriesSegment::head(series, res.k_values[i]), std::nullopt, opts.optim);
        est.right[i] = estimate(spec, SeriesSegment::tail(series, res.k_values[i]), std::nullopt, opts.optim);
        fill_q(spec, series, i, est, opts, res);
    }
    finalize(res, opts);
    return res;
}

} // namespace qlcp
