#include "catch_amalgamated.hpp"

#include <cmath>
#include <sstream>

#include "qlcp/errors.hpp"
#include "qlcp/io.hpp"
#include "qlcp/simulate.hpp"

using namespace qlcp;

namespace {

std::size_t parse_error_line(const std::string& text) {
    std::istringstream in(text);
    try {
        (void)read_series(in);
    } catch (const ParseError& e) {
        return e.line();
    }
    return static_cast<std::size_t>(-1);
}

} // namespace

TEST_CASE("Series files with and without a header", "[io]") {
    std::istringstream plain("1.5\n-2\n\n3e-1\n");
    CHECK(read_series(plain) == std::vector<double>{1.5, -2, 0.3});
    std::istringstream header("value\n1\n2\r\n+3\n");
    CHECK(read_series(header) == std::vector<double>{1, 2, 3});
    std::istringstream blank_first("\n\nx\n4\n");
    CHECK(read_series(blank_first) == std::vector<double>{4});
}

TEST_CASE("Malformed series report the offending line", "[io]") {
    CHECK(parse_error_line("1\n2\nabc\n4\n") == 3);
    CHECK(parse_error_line("x\ny\n1\n") == 2);
    CHECK(parse_error_line("1\n1,000\n") == 2);
    CHECK(parse_error_line("1\nnan\n") == 2);
    CHECK(parse_error_line("1\ninf\n") == 2);
    CHECK(parse_error_line("") == 0);
    CHECK(parse_error_line("header\n\n") == 0);
    CHECK_THROWS_AS(read_series_file("/nonexistent/series.csv"), ParseError);
}

TEST_CASE("Series round trip is exact", "[io]") {
    SimPlan plan(ModelSpec::garch(), ParamVector{1, 0.4, 0.1});
    plan.n = 200;
    plan.seed = 1;
    const auto x = generate(plan);
    std::stringstream ss;
    write_series(ss, x);
    CHECK(read_series(ss) == x);
}

TEST_CASE("Scan curve round trip", "[io]") {
    ScanResult r;
    r.window = explicit_window(ModelSpec::ar(1), 100, 48);
    r.k_values = r.window.indices();
    r.q1 = {0.12345678901234567, std::numeric_limits<double>::quiet_NaN(), 3.0, 1e-20, 7.5};
    r.q2 = {1.0 / 3.0, 2.0, std::numeric_limits<double>::quiet_NaN(), 0.0, 2.0 / 7.0};
    r.C_alpha = 2.1226583041233136;
    r.alpha = 0.05;
    REQUIRE(r.k_values.size() == r.q1.size());

    std::stringstream ss;
    write_scan_curve(ss, r);
    const std::string text = ss.str();
    CHECK(text.find("# C_alpha=2.12265830412331") != std::string::npos);
    const auto back = read_scan_curve(ss);
    CHECK(back.C_alpha == r.C_alpha);
    CHECK(back.k == r.k_values);
    for (std::size_t i = 0; i < r.q1.size(); ++i) {
        if (std::isnan(r.q1[i])) CHECK(std::isnan(back.q1[i]));
        else CHECK(back.q1[i] == r.q1[i]);
        if (std::isnan(r.q2[i])) CHECK(std::isnan(back.q2[i]));
        else CHECK(back.q2[i] == r.q2[i]);
    }

    std::istringstream bad("k,q1,q2\n50,1.0\n");
    CHECK_THROWS_AS(read_scan_curve(bad), ParseError);
}

TEST_CASE("Screen summary uses six significant digits", "[io]") {
    ScanResult r;
    r.window = explicit_window(ModelSpec::ar(1), 100, 10);
    r.theta_full = ParamVector{0.123456789};
    r.Q = 2.718281828;
    r.C_alpha = 2.2;
    std::ostringstream out;
    print_summary(out, r);
    CHECK(out.str().find("0.123457") != std::string::npos);
    CHECK(out.str().find("2.71828\n") != std::string::npos);
}
