#include "qlcp/critical_values.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qlcp/errors.hpp"
#include "qlcp/random.hpp"

namespace qlcp {

namespace {

void validate_sim(std::size_t d, std::size_t m, std::size_t R) {
    if (d < 1) throw ValidationError("bridge dimension d must be >= 1");
    if (m < 100) throw ValidationError("grid size m must be >= 100");
    if (R < 1000) throw ValidationError("replication count R must be >= 1000");
}

// Random walks B_i(tau_j), j = 0..m, stored row-major in `walk` (d * (m + 1) doubles).
void fill_walks(std::size_t d, std::size_t m, std::uint64_t key, std::vector<double>& walk) {
    CounterRng rng(key);
    const double step = 1.0 / std::sqrt(static_cast<double>(m));
    for (std::size_t i = 0; i < d; ++i) {
        double* b = walk.data() + i * (m + 1);
        b[0] = 0.0;
        for (std::size_t j = 1; j <= m; ++j) b[j] = b[j - 1] + step * rng.gaussian();
    }
}

// One replication; `walk` is scratch space of d * (m + 1) doubles.
double sup_squared_bridge(std::size_t d, std::size_t m, std::uint64_t key, std::vector<double>& walk) {
    fill_walks(d, m, key, walk);
    double sup = 0.0;
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t j = 0; j <= m; ++j) {
        const double tau = static_cast<double>(j) * inv_m;
        double norm2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double* b = walk.data() + i * (m + 1);
            const double w = b[j] - tau * b[m];
            norm2 += w * w;
        }
        sup = std::max(sup, norm2);
    }
    return sup;
}

constexpr double kAlphaMatch = 1e-12;

} // namespace

double quantile_level(double alpha, bool halve_alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
    return halve_alpha ? 1.0 - alpha / 2.0 : 1.0 - alpha;
}

std::vector<double> bridge_path(std::size_t d, std::size_t m, std::uint64_t key) {
    validate_sim(d, m, 1000);
    std::vector<double> w(d * (m + 1));
    fill_walks(d, m, key, w);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < d; ++i) {
        double* b = w.data() + i * (m + 1);
        const double end = b[m];
        for (std::size_t j = 0; j <= m; ++j) b[j] -= static_cast<double>(j) * inv_m * end;
    }
    return w;
}

std::vector<double> simulate_sup_bb(std::size_t d, std::size_t m, std::size_t R, std::uint64_t seed) {
    validate_sim(d, m, R);
    std::vector<double> out(R);
    const auto count = static_cast<std::ptrdiff_t>(R);
#pragma omp parallel
    {
        std::vector<double> walk(d * (m + 1));
#pragma omp for schedule(static)
        for (std::ptrdiff_t r = 0; r < count; ++r)
            out[static_cast<std::size_t>(r)] = sup_squared_bridge(d, m, derive_seed(seed, static_cast<std::uint64_t>(r)), walk);
    }
    return out;
}

std::vector<double> simulate_sup_bb_serial(std::size_t d, std::size_t m, std::size_t R, std::uint64_t seed) {
    validate_sim(d, m, R);
    std::vector<double> out(R);
    std::vector<double> walk(d * (m + 1));
    for (std::size_t r = 0; r < R; ++r) out[r] = sup_squared_bridge(d, m, derive_seed(seed, r), walk);
    return out;
}

double empirical_quantile(std::span<const double> samples, double level) {
    if (samples.empty()) throw CalibrationRequired("no samples to take a quantile of");
    if (!(level >= 0.0 && level <= 1.0)) throw ValidationError("quantile level must lie in [0, 1]");
    std::vector<double> v(samples.begin(), samples.end());
    const double h = static_cast<double>(v.size() - 1) * level;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
    const double a = v[lo];
    if (lo + 1 >= v.size()) return a;
    const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
    return a + (h - static_cast<double>(lo)) * (b - a);
}

double quantile(std::span<const double> samples, double alpha) {
    return empirical_quantile(samples, quantile_level(alpha));
}

void CriticalTable::set(std::size_t d, double alpha, Entry entry) {
    if (auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const auto& e) { return e.first.first == d && std::abs(e.first.second - alpha) < kAlphaMatch; });
        it != entries_.end())
        entries_.erase(it);
    entries_[{d, alpha}] = entry;
}

std::optional<CriticalTable::Entry> CriticalTable::find(std::size_t d, double alpha) const {
    for (const auto& [key, entry] : entries_)
        if (key.first == d && std::abs(key.second - alpha) < kAlphaMatch) return entry;
    return std::nullopt;
}

double CriticalTable::quantile(std::size_t d, double alpha) const {
    if (auto e = find(d, alpha)) return e->c;
    std::ostringstream msg;
    msg << "no critical value for d=" << d << ", alpha=" << alpha << "; run `qlcp calibrate` and pass --table";
    throw CalibrationRequired(msg.str());
}

CriticalTable CriticalTable::builtin() {
    // Output of calibrate({1,2,3}, {0.05}) with m=1000, R=100000, seed=20240601.
    constexpr std::size_t m = 1000;
    constexpr std::size_t R = 100000;
    constexpr std::uint64_t seed = 20240601;
    CriticalTable t;
    t.set(1, 0.05, {2.1226583041233136, m, R, seed});
    t.set(2, 0.05, {2.8179809445891726, m, R, seed});
    t.set(3, 0.05, {3.4137990177820363, m, R, seed});
    return t;
}

CriticalTable CriticalTable::read(std::istream& in) {
    CriticalTable t;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("d,", 0) == 0) continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::size_t d = 0, m = 0, R = 0;
        double alpha = 0.0, c = 0.0;
        std::uint64_t seed = 0;
        if (!(fields >> d >> alpha >> c >> m >> R >> seed))
            throw ParseError("critical table row must be d,alpha,C,m,R,seed", line_no);
        if (d < 1 || !(alpha > 0.0 && alpha <= 1.0) || !(c > 0.0))
            throw ParseError("critical table row has out-of-range values", line_no);
        t.set(d, alpha, {c, m, R, seed});
    }
    return t;
}

CriticalTable CriticalTable::read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open critical table '" + path + "'");
    return read(in);
}

void CriticalTable::write(std::ostream& out) const {
    out << "d,alpha,C,m,R,seed\n";
    out << std::setprecision(17);
    for (const auto& [key, e] : entries_)
        out << key.first << ',' << key.second << ',' << e.c << ',' << e.m << ',' << e.R << ',' << e.seed << '\n';
}

void CriticalTable::write_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write critical table '" + path + "'");
    write(out);
}

CriticalTable calibrate(std::span<const std::size_t> dims, std::span<const double> alphas,
                        const CalibrationOptions& opts) {
    CriticalTable t;
    for (std::size_t d : dims) {
        const auto samples = simulate_sup_bb(d, opts.m, opts.R, opts.seed);
        for (double alpha : alphas)
            t.set(d, alpha, {empirical_quantile(samples, quantile_level(alpha, opts.halve_alpha)), opts.m, opts.R, opts.seed});
    }
    return t;
}

} // namespace qlcp
