#include "qlcp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qlcp/errors.hpp"

namespace qlcp {

std::string to_string(Family family) {
    switch (family) {
    case Family::ar: return "ar";
    case Family::arch: return "arch";
    case Family::garch: return "garch";
    }
    return "?";
}

Family parse_family(const std::string& name) {
    if (name == "ar") return Family::ar;
    if (name == "arch") return Family::arch;
    if (name == "garch") return Family::garch;
    throw ValidationError("unknown model family '" + name + "' (expected ar, arch or garch)");
}

ParamVector::ParamVector(std::initializer_list<double> values)
    : values_(static_cast<Eigen::Index>(values.size())) {
    Eigen::Index i = 0;
    for (double v : values) values_[i++] = v;
}

ParamVector::ParamVector(const std::vector<double>& values)
    : values_(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()))) {}

namespace {

int family_dim(Family family, int order) {
    switch (family) {
    case Family::ar: return order;
    case Family::arch: return 2;
    case Family::garch: return 3;
    }
    return 0;
}

// Weight vector of the linear stationarity constraint for ARCH/GARCH.
Vector volatility_weights(const ModelSpec& spec) {
    Vector a = Vector::Zero(static_cast<Eigen::Index>(spec.dim()));
    a.tail(a.size() - 1).setOnes();
    return a;
}

double soft_threshold(double y, double lambda) {
    if (y > lambda) return y - lambda;
    if (y < -lambda) return y + lambda;
    return 0.0;
}

// Projection onto box ∩ {g(x) <= r} where x(lambda) minimises
// |x - y|^2/2 + lambda * g(x) over the box and g(x(lambda)) is nonincreasing.
template <typename Shrink, typename Constraint>
Vector project_by_bisection(const Vector& y, const Vector& lo, const Vector& hi, double r,
                            double lambda_max, Shrink shrink, Constraint g) {
    auto at = [&](double lambda) {
        Vector x(y.size());
        for (Eigen::Index i = 0; i < y.size(); ++i) x[i] = std::clamp(shrink(i, lambda), lo[i], hi[i]);
        return x;
    };
    Vector x0 = at(0.0);
    if (g(x0) <= r) return x0;

    double a = 0.0;
    double b = lambda_max;
    while (g(at(b)) > r) b *= 2.0;
    for (int it = 0; it < 200 && b - a > 0.0; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        if (g(at(mid)) > r) a = mid;
        else b = mid;
    }
    return at(b);
}

} // namespace

ModelSpec::ModelSpec(Family family, int order, ParamDomain domain)
    : family_(family), order_(order), dim_(family_dim(family, order)), domain_(std::move(domain)) {
    if (family_ == Family::ar) {
        if (order_ < 1 || order_ > kMaxArOrder)
            throw ValidationError("AR order must be in [1, " + std::to_string(kMaxArOrder) + "]");
    } else if (order_ != 1) {
        throw ValidationError("ARCH and GARCH are supported with order 1 only");
    }
    const auto d = static_cast<std::size_t>(dim_);
    if (domain_.lower.size() != d || domain_.upper.size() != d)
        throw ShapeError("domain bounds must have length " + std::to_string(d));
    for (std::size_t i = 0; i < d; ++i)
        if (!(domain_.lower[i] < domain_.upper[i]) || !std::isfinite(domain_.lower[i]) || !std::isfinite(domain_.upper[i]))
            throw ValidationError("domain requires finite lower < upper in every coordinate");
    if (!(domain_.stationarity_margin > 0.0 && domain_.stationarity_margin < 1.0))
        throw ValidationError("stationarity margin must lie in (0, 1)");

    const double r = stationarity_bound();
    if (family_ == Family::ar) {
        double closest = 0.0;
        for (std::size_t i = 0; i < d; ++i) closest += std::abs(std::clamp(0.0, domain_.lower[i], domain_.upper[i]));
        if (closest > r) throw ValidationError("AR domain is empty: box does not meet the stationarity region");
    } else {
        if (!(domain_.lower[0] > 0.0)) throw ValidationError("alpha_0 lower bound must be strictly positive");
        double lowest = 0.0;
        for (std::size_t i = 1; i < d; ++i) {
            if (domain_.lower[i] < 0.0) throw ValidationError("alpha_1 and beta_1 lower bounds must be >= 0");
            lowest += domain_.lower[i];
        }
        if (lowest > r) throw ValidationError("volatility domain is empty: lower bounds violate stationarity");
    }
}

ModelSpec ModelSpec::ar(int p, double margin) {
    if (p < 1) throw ValidationError("AR order must be positive");
    const auto n = static_cast<std::size_t>(p);
    return ModelSpec(Family::ar, p, ParamDomain{std::vector<double>(n, -1.0), std::vector<double>(n, 1.0), margin});
}

ModelSpec ModelSpec::arch(double alpha0_lower, double alpha0_upper, double margin) {
    return ModelSpec(Family::arch, 1, ParamDomain{{alpha0_lower, 0.0}, {alpha0_upper, 1.0}, margin});
}

ModelSpec ModelSpec::garch(double alpha0_lower, double alpha0_upper, double margin) {
    return ModelSpec(Family::garch, 1, ParamDomain{{alpha0_lower, 0.0, 0.0}, {alpha0_upper, 1.0, 1.0}, margin});
}

ModelSpec ModelSpec::make(Family family, int order) {
    switch (family) {
    case Family::ar: return ar(order);
    case Family::arch: return arch();
    case Family::garch: return garch();
    }
    throw ValidationError("unknown family");
}

std::string ModelSpec::name() const {
    switch (family_) {
    case Family::ar: return "AR(" + std::to_string(order_) + ")";
    case Family::arch: return "ARCH(1)";
    case Family::garch: return "GARCH(1,1)";
    }
    return "?";
}

bool in_domain(const ModelSpec& spec, const ParamVector& theta) {
    const std::size_t d = spec.dim();
    if (theta.size() != d)
        throw ShapeError("parameter vector has length " + std::to_string(theta.size()) + ", model " + spec.name() +
                         " expects " + std::to_string(d));
    const auto& dom = spec.domain();
    for (std::size_t i = 0; i < d; ++i) {
        if (!std::isfinite(theta[i])) return false;
        if (theta[i] < dom.lower[i] || theta[i] > dom.upper[i]) return false;
    }
    double s = 0.0;
    if (spec.family() == Family::ar) {
        for (std::size_t i = 0; i < d; ++i) s += std::abs(theta[i]);
    } else {
        for (std::size_t i = 1; i < d; ++i) s += theta[i];
    }
    return s <= spec.stationarity_bound();
}

ParamVector project(const ModelSpec& spec, const ParamVector& theta) {
    if (theta.size() != spec.dim()) throw ShapeError("parameter vector length does not match model dimension");
    const auto& dom = spec.domain();
    const auto d = static_cast<Eigen::Index>(spec.dim());
    const Vector lo = Eigen::Map<const Vector>(dom.lower.data(), d);
    const Vector hi = Eigen::Map<const Vector>(dom.upper.data(), d);
    const Vector& y = theta.values();
    const double r = spec.stationarity_bound();

    if (spec.family() == Family::ar) {
        const double lambda_max = y.cwiseAbs().maxCoeff() + 1.0;
        return ParamVector(project_by_bisection(
            y, lo, hi, r, lambda_max, [&](Eigen::Index i, double l) { return soft_threshold(y[i], l); },
            [](const Vector& x) { return x.cwiseAbs().sum(); }));
    }
    const Vector a = volatility_weights(spec);
    const double lambda_max = (y - lo).cwiseAbs().maxCoeff() + 1.0;
    return ParamVector(project_by_bisection(
        y, lo, hi, r, lambda_max, [&](Eigen::Index i, double l) { return y[i] - l * a[i]; },
        [&](const Vector& x) { return a.dot(x); }));
}

LinearConstraints linear_constraints(const ModelSpec& spec) {
    const auto d = static_cast<Eigen::Index>(spec.dim());
    const auto& dom = spec.domain();
    const Eigen::Index extra = spec.family() == Family::ar ? (Eigen::Index{1} << d) : 1;
    LinearConstraints c{Matrix::Zero(2 * d + extra, d), Vector::Zero(2 * d + extra)};
    for (Eigen::Index i = 0; i < d; ++i) {
        c.A(2 * i, i) = -1.0;
        c.b[2 * i] = -dom.lower[static_cast<std::size_t>(i)];
        c.A(2 * i + 1, i) = 1.0;
        c.b[2 * i + 1] = dom.upper[static_cast<std::size_t>(i)];
    }
    if (spec.family() == Family::ar) {
        for (Eigen::Index s = 0; s < extra; ++s) {
            for (Eigen::Index i = 0; i < d; ++i) c.A(2 * d + s, i) = ((s >> i) & 1) ? -1.0 : 1.0;
            c.b[2 * d + s] = spec.stationarity_bound();
        }
    } else {
        c.A.row(2 * d) = volatility_weights(spec).transpose();
        c.b[2 * d] = spec.stationarity_bound();
    }
    return c;
}

ParamVector domain_center(const ModelSpec& spec) {
    const auto& dom = spec.domain();
    std::vector<double> mid(spec.dim());
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (dom.lower[i] + dom.upper[i]);
    return project(spec, ParamVector(mid));
}

namespace {

double radical_inverse(std::size_t index, unsigned base) {
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

} // namespace

std::vector<ParamVector> quasi_random_points(const ModelSpec& spec, std::size_t count) {
    const auto& dom = spec.domain();
    std::vector<ParamVector> out;
    out.reserve(count);
    for (std::size_t j = 1; j <= count; ++j) {
        std::vector<double> x(spec.dim());
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = dom.lower[i] + radical_inverse(j, kPrimes[i]) * (dom.upper[i] - dom.lower[i]);
        out.push_back(project(spec, ParamVector(x)));
    }
    return out;
}

SeriesSegment::SeriesSegment(std::span<const double> data, std::size_t start, std::size_t end)
    : data_(data), start_(start), end_(end) {
    if (data.empty()) throw SizingError("series is empty");
    if (start < 1 || start > end || end > data.size())
        throw IndexError("segment [" + std::to_string(start) + ", " + std::to_string(end) +
                         "] is not inside 1.." + std::to_string(data.size()));
}

SeriesSegment SeriesSegment::whole(std::span<const double> data) { return {data, 1, data.size()}; }

SeriesSegment SeriesSegment::head(std::span<const double> data, std::size_t k) { return {data, 1, k}; }

SeriesSegment SeriesSegment::tail(std::span<const double> data, std::size_t k) { return {data, k + 1, data.size()}; }

std::vector<std::size_t> ScanWindow::indices() const {
    std::vector<std::size_t> k(count());
    std::iota(k.begin(), k.end(), first());
    return k;
}

std::size_t window_policy_value(Family family, std::size_t n) {
    const double l = std::log(static_cast<double>(n));
    const double v = family == Family::ar ? l * l : std::pow(l, 2.5);
    return static_cast<std::size_t>(std::floor(v));
}

ScanWindow default_window(const ModelSpec& spec, std::size_t n) {
    const std::size_t d = spec.dim();
    const std::size_t min_n = std::max(kMinSeriesLength, 2 * d + 4);
    if (n < min_n)
        throw SizingError("series of length " + std::to_string(n) + " is too short for " + spec.name() +
                          "; minimum n is " + std::to_string(min_n));
    const std::size_t v = std::clamp(window_policy_value(spec.family(), n), d + 1, n / 2 - 1);
    return ScanWindow{n, v};
}

ScanWindow explicit_window(const ModelSpec& spec, std::size_t n, std::size_t vn) {
    const std::size_t d = spec.dim();
    if (vn < d + 1) throw SizingError("v_n must be at least d+1 = " + std::to_string(d + 1));
    if (2 * vn >= n)
        throw SizingError("v_n = " + std::to_string(vn) + " leaves an empty scan window; need n > 2*v_n, minimum n is " +
                          std::to_string(2 * vn + 1));
    return ScanWindow{n, vn};
}

} // namespace qlcp
