#include "qlcp/likelihood.hpp"

#include <array>
#include <cassert>
#include <cmath>

#include "qlcp/errors.hpp"

namespace qlcp {

namespace {

constexpr int kMaxDim = ModelSpec::kMaxArOrder;

// Per-observation q_t, gradient and hessian (row-major d x d).
struct Term {
    double q = 0.0;
    std::array<double, kMaxDim> g{};
    std::array<double, kMaxDim * kMaxDim> h{};
};

// Variance state at time t for ARCH/GARCH, with first and second derivatives.
struct VarianceState {
    double h = 0.0;
    std::array<double, 3> dh{};
    std::array<double, 9> d2h{};
};

template <int Order>
void term_from_variance(double x, const VarianceState& v, int d, Term& out) {
    const double r = x * x / v.h;
    out.q = r + std::log(v.h);
    if constexpr (Order >= 1) {
        const double c1 = (1.0 - r) / v.h;
        for (int i = 0; i < d; ++i) out.g[i] = c1 * v.dh[i];
        if constexpr (Order >= 2) {
            const double c2 = (2.0 * r - 1.0) / (v.h * v.h);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    out.h[i * d + j] = c2 * v.dh[i] * v.dh[j] + c1 * v.d2h[i * 3 + j];
        }
    }
}

// Calls visit(t, variance_state) for t = 1..last. ARCH(1) is GARCH(1,1) with beta = 0
// and only the first two coordinates.
template <typename Visit>
void walk_variance(const ModelSpec& spec, const Vector& theta, const SeriesSegment& seg, std::size_t first,
                   std::size_t last, Visit&& visit) {
    const double a0 = theta[0];
    const double a1 = theta[1];
    VarianceState v;
    if (spec.family() == Family::arch) {
        for (std::size_t t = first; t <= last; ++t) {
            const double xl = seg.x(static_cast<std::ptrdiff_t>(t) - 1);
            v.h = a0 + a1 * xl * xl;
            v.dh = {1.0, xl * xl, 0.0};
            visit(t, v);
        }
        return;
    }
    // h_t = a0/(1-b) + a1 * S_t with S_t = sum_{k>=1} b^{k-1} X_{t-k}^2, D_t = dS_t/db, E_t = d2S_t/db2.
    const double b = theta[2];
    const double inv = 1.0 / (1.0 - b);
    const double c0 = a0 * inv;
    const double c0b = a0 * inv * inv;
    const double c0bb = 2.0 * a0 * inv * inv * inv;
    double s = 0.0, ds = 0.0, es = 0.0;
    for (std::size_t t = 1; t <= last; ++t) {
        if (t > 1) {
            const double xl = seg.x(static_cast<std::ptrdiff_t>(t) - 1);
            es = 2.0 * ds + b * es;
            ds = s + b * ds;
            s = xl * xl + b * s;
        }
        if (t < first) continue;
        v.h = c0 + a1 * s;
        v.dh = {inv, s, c0b + a1 * ds};
        v.d2h = {0.0, 0.0, inv * inv, 0.0, 0.0, ds, inv * inv, ds, c0bb + a1 * es};
        visit(t, v);
    }
}

// Calls visit(t, term) for every t in the segment.
template <int Order, typename Visit>
void walk_terms(const ModelSpec& spec, const Vector& theta, const SeriesSegment& seg, Visit&& visit) {
    const int d = static_cast<int>(spec.dim());
    Term term;
    if (spec.family() == Family::ar) {
        std::array<double, kMaxDim> lag{};
        for (std::size_t t = seg.start(); t <= seg.end(); ++t) {
            double e = seg.x(static_cast<std::ptrdiff_t>(t));
            for (int k = 0; k < d; ++k) {
                lag[k] = seg.x(static_cast<std::ptrdiff_t>(t) - 1 - k);
                e -= theta[k] * lag[k];
            }
            term.q = e * e;
            if constexpr (Order >= 1) {
                for (int k = 0; k < d; ++k) term.g[k] = -2.0 * e * lag[k];
                if constexpr (Order >= 2) {
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j) term.h[i * d + j] = 2.0 * lag[i] * lag[j];
                }
            }
            visit(t, term);
        }
        return;
    }
    walk_variance(spec, theta, seg, seg.start(), seg.end(), [&](std::size_t t, const VarianceState& v) {
        assert(v.h > 0.0);
        term_from_variance<Order>(seg.x(static_cast<std::ptrdiff_t>(t)), v, d, term);
        visit(t, term);
    });
}

template <bool Compensated>
struct Sum {
    double s = 0.0;
    double c = 0.0;

    void add(double x) {
        if constexpr (Compensated) {
            const double t = s + x;
            c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
            s = t;
        } else {
            s += x;
        }
    }
    [[nodiscard]] double get() const { return s + c; }
};

template <int Order, bool Compensated>
LikelihoodEval evaluate(const ModelSpec& spec, const Vector& theta, const SeriesSegment& seg,
                        const EvalRequest& req) {
    const int d = static_cast<int>(spec.dim());
    Sum<Compensated> value;
    std::array<Sum<Compensated>, kMaxDim> grad{};
    std::array<Sum<Compensated>, kMaxDim * kMaxDim> hess{};
    std::array<Sum<Compensated>, kMaxDim * kMaxDim> outer{};
    LikelihoodEval out;
    if (req.per_t_grads) out.per_t_grads.reserve(seg.size());

    walk_terms<Order>(spec, theta, seg, [&](std::size_t, const Term& term) {
        value.add(term.q);
        if constexpr (Order >= 1) {
            for (int i = 0; i < d; ++i) grad[i].add(term.g[i]);
            if (req.grad_outer)
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) outer[i * d + j].add(term.g[i] * term.g[j]);
            if (req.per_t_grads) out.per_t_grads.emplace_back(Eigen::Map<const Vector>(term.g.data(), d));
        }
        if constexpr (Order >= 2) {
            for (int i = 0; i < d * d; ++i) hess[i].add(term.h[i]);
        }
    });

    out.value = -0.5 * value.get();
    if constexpr (Order >= 1) {
        out.gradient.resize(d);
        for (int i = 0; i < d; ++i) out.gradient[i] = -0.5 * grad[i].get();
        if (req.grad_outer) {
            out.grad_outer.resize(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) out.grad_outer(i, j) = outer[i * d + j].get();
        }
    }
    if constexpr (Order >= 2) {
        Matrix h(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) h(i, j) = -0.5 * hess[i * d + j].get();
        const double scale = h.cwiseAbs().maxCoeff();
        out.hessian_asymmetry = scale > 0.0 ? (h - h.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
        out.hessian = 0.5 * (h + h.transpose());
    }
    return out;
}

void require_domain(const ModelSpec& spec, const ParamVector& theta) {
    if (!in_domain(spec, theta)) throw DomainError("parameter vector lies outside the domain of " + spec.name());
}

} // namespace

VolatilityPath volatility_path(const ModelSpec& spec, const ParamVector& theta, const SeriesSegment& segment) {
    require_domain(spec, theta);
    const auto d = static_cast<Eigen::Index>(spec.dim());
    const std::size_t len = segment.end();
    VolatilityPath path;
    path.f_hat.assign(len, 0.0);
    path.h_hat.assign(len, 1.0);
    path.dh = Matrix::Zero(d, static_cast<Eigen::Index>(len));
    path.d2h.assign(len, Matrix::Zero(d, d));

    if (spec.family() == Family::ar) {
        for (std::size_t t = 1; t <= len; ++t) {
            double f = 0.0;
            for (Eigen::Index k = 0; k < d; ++k) f += theta[static_cast<std::size_t>(k)] * segment.x(static_cast<std::ptrdiff_t>(t) - 1 - k);
            path.f_hat[t - 1] = f;
        }
        return path;
    }
    walk_variance(spec, theta.values(), segment, 1, len, [&](std::size_t t, const VarianceState& v) {
        const auto col = static_cast<Eigen::Index>(t - 1);
        path.h_hat[t - 1] = v.h;
        for (Eigen::Index i = 0; i < d; ++i) {
            path.dh(i, col) = v.dh[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < d; ++j) path.d2h[t - 1](i, j) = v.d2h[static_cast<std::size_t>(i * 3 + j)];
        }
    });
    return path;
}

QTerm qhat_t(const ModelSpec& spec, const ParamVector& theta, const SeriesSegment& segment, std::size_t t) {
    if (!segment.contains(t))
        throw IndexError("t = " + std::to_string(t) + " is outside segment [" + std::to_string(segment.start()) + ", " +
                         std::to_string(segment.end()) + "]");
    require_domain(spec, theta);
    const int d = static_cast<int>(spec.dim());
    const SeriesSegment single(segment.data(), t, t);
    QTerm out;
    walk_terms<2>(spec, theta.values(), single, [&](std::size_t, const Term& term) {
        out.value = term.q;
        out.grad = Eigen::Map<const Vector>(term.g.data(), d);
        out.hess = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            term.h.data(), d, d);
    });
    return out;
}

LikelihoodEval loglik(const ModelSpec& spec, const ParamVector& theta, const SeriesSegment& segment,
                      const EvalRequest& request) {
    require_domain(spec, theta);
    const bool comp = segment.size() >= kCompensatedThreshold;
    const int order = (request.per_t_grads || request.grad_outer) ? std::max(request.order, 1) : request.order;
    switch (order) {
    case 0: return comp ? evaluate<0, true>(spec, theta.values(), segment, request)
                        : evaluate<0, false>(spec, theta.values(), segment, request);
    case 1: return comp ? evaluate<1, true>(spec, theta.values(), segment, request)
                        : evaluate<1, false>(spec, theta.values(), segment, request);
    default: return comp ? evaluate<2, true>(spec, theta.values(), segment, request)
                         : evaluate<2, false>(spec, theta.values(), segment, request);
    }
}

double loglik_value(const ModelSpec& spec, const ParamVector& theta, const SeriesSegment& segment) {
    return loglik(spec, theta, segment, EvalRequest{0, false, false}).value;
}

} // namespace qlcp
