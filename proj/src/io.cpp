#include "qlcp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "qlcp/errors.hpp"

namespace qlcp {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

} // namespace

std::vector<double> read_series(std::istream& in) {
    std::vector<double> out;
    std::string line;
    std::size_t line_no = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++line_no;
        const auto field = trim(line);
        if (field.empty()) continue;
        const auto v = parse_number(field);
        if (!v || !std::isfinite(*v)) {
            if (first_content && !v) {
                first_content = false;
                continue; // header
            }
            throw ParseError("expected one finite number per line, got '" + std::string(field) + "'", line_no);
        }
        first_content = false;
        out.push_back(*v);
    }
    if (out.empty()) throw ParseError("series contains no values");
    return out;
}

std::vector<double> read_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open series file '" + path + "'");
    return read_series(in);
}

void write_series(std::ostream& out, const std::vector<double>& series) {
    out << "x\n" << std::setprecision(17);
    for (double v : series) out << v << '\n';
}

void write_series_file(const std::string& path, const std::vector<double>& series) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write series file '" + path + "'");
    write_series(out, series);
}

void write_scan_curve(std::ostream& out, const ScanResult& r) {
    out << std::setprecision(17);
    out << "# C_alpha=" << r.C_alpha << '\n';
    out << "# alpha=" << r.alpha << " v_n=" << r.window.vn << " n=" << r.window.n << '\n';
    out << "# Q1=" << r.Q1 << " Q2=" << r.Q2 << " Q=" << r.Q << " argmax_k=" << r.argmax_k
        << " decision=" << to_string(r.decision) << '\n';
    out << "k,q1,q2\n";
    for (std::size_t i = 0; i < r.k_values.size(); ++i) out << r.k_values[i] << ',' << r.q1[i] << ',' << r.q2[i] << '\n';
}

ScanCurve read_scan_curve(std::istream& in) {
    ScanCurve curve;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto s = trim(line);
        if (s.empty()) continue;
        if (s.front() == '#') {
            if (const auto pos = s.find("C_alpha="); pos != std::string_view::npos) {
                const auto rest = s.substr(pos + 8);
                if (const auto v = parse_number(rest.substr(0, rest.find(' ')))) curve.C_alpha = *v;
            }
            continue;
        }
        if (s.rfind("k,", 0) == 0) continue;
        const auto c1 = s.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : s.find(',', c1 + 1);
        if (c2 == std::string_view::npos) throw ParseError("scan curve row must be k,q1,q2", line_no);
        std::size_t k = 0;
        const auto ks = s.substr(0, c1);
        const auto [ptr, ec] = std::from_chars(ks.data(), ks.data() + ks.size(), k);
        const auto q1 = parse_number(s.substr(c1 + 1, c2 - c1 - 1));
        const auto q2 = parse_number(s.substr(c2 + 1));
        if (ec != std::errc() || ptr != ks.data() + ks.size() || !q1 || !q2)
            throw ParseError("scan curve row must be k,q1,q2", line_no);
        curve.k.push_back(k);
        curve.q1.push_back(*q1);
        curve.q2.push_back(*q2);
    }
    return curve;
}

void print_summary(std::ostream& out, const ScanResult& r) {
    std::ostringstream s;
    s << std::setprecision(6);
    s << "theta_hat(T_n) =";
    for (std::size_t i = 0; i < r.theta_full.size(); ++i) s << ' ' << r.theta_full[i];
    s << "\nv_n            = " << r.window.vn << "  (k = " << r.window.first() << ".." << r.window.last() << ")\n";
    s << "Q1             = " << r.Q1 << '\n';
    s << "Q2             = " << r.Q2 << '\n';
    s << "Q              = " << r.Q << '\n';
    s << "C_alpha        = " << r.C_alpha << "  (alpha = " << r.alpha << ")\n";
    s << "argmax_k       = " << r.argmax_k << '\n';
    if (r.missing) s << "missing k      = " << r.missing << '\n';
    s << "decision       = " << to_string(r.decision) << '\n';
    out << s.str();
}

} // namespace qlcp
