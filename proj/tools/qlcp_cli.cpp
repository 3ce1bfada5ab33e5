// qlcp: quasi-likelihood change-point test for AR / ARCH / GARCH series.
//
// Exit codes: 0 no change detected (or command succeeded), 2 change detected, 1 error.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qlcp/critical_values.hpp"
#include "qlcp/errors.hpp"
#include "qlcp/experiments.hpp"
#include "qlcp/io.hpp"
#include "qlcp/simulate.hpp"
#include "qlcp/test_stat.hpp"

namespace {

constexpr int kExitNoChange = 0;
constexpr int kExitError = 1;
constexpr int kExitChange = 2;

constexpr const char* kTableEnv = "QLCP_TABLE";

struct ModelFlags {
    std::string model = "ar";
    int order = 1;
    double alpha0_max = qlcp::ModelSpec::kDefaultAlpha0Upper;

    void add(CLI::App& cmd) {
        cmd.add_option("--model", model, "Model family")->check(CLI::IsMember({"ar", "arch", "garch"}));
        cmd.add_option("--order", order, "AR order p")->check(CLI::Range(1, qlcp::ModelSpec::kMaxArOrder));
        cmd.add_option("--alpha0-max", alpha0_max, "Upper bound of alpha_0 (ARCH/GARCH)")->check(CLI::PositiveNumber);
    }

    [[nodiscard]] qlcp::ModelSpec spec() const {
        switch (qlcp::parse_family(model)) {
        case qlcp::Family::ar: return qlcp::ModelSpec::ar(order);
        case qlcp::Family::arch: return qlcp::ModelSpec::arch(qlcp::ModelSpec::kDefaultAlpha0Lower, alpha0_max);
        case qlcp::Family::garch: return qlcp::ModelSpec::garch(qlcp::ModelSpec::kDefaultAlpha0Lower, alpha0_max);
        }
        throw qlcp::ValidationError("unknown model");
    }
};

qlcp::CriticalTable load_table(const std::string& path) {
    if (!path.empty()) return qlcp::CriticalTable::read_file(path);
    if (const char* env = std::getenv(kTableEnv); env && *env) return qlcp::CriticalTable::read_file(env);
    return qlcp::CriticalTable::builtin();
}

struct ScanFlags {
    std::string input;
    double alpha = 0.05;
    std::size_t vn = 0;
    std::string table;

    void add(CLI::App& cmd) {
        cmd.add_option("input", input, "Series file, one value per line")->required();
        cmd.add_option("--alpha", alpha, "Nominal level")->check(CLI::Range(0.0, 1.0));
        cmd.add_option("--vn", vn, "Trimming v_n (default: (ln n)^2 for AR, (ln n)^2.5 otherwise)");
        cmd.add_option("--table", table, std::string("Critical value table (default: $") + kTableEnv + " or built-in)");
    }

    [[nodiscard]] qlcp::ScanResult run(const qlcp::ModelSpec& spec) const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw qlcp::ValidationError("--alpha must lie in (0, 1)");
        const auto series = qlcp::read_series_file(input);
        const auto window = vn ? qlcp::explicit_window(spec, series.size(), vn) : qlcp::default_window(spec, series.size());
        return qlcp::scan(spec, series, window, alpha, load_table(table));
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw qlcp::Error("cannot write '" + path + "'");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasi-likelihood change-point test for causal time series"};
    app.require_subcommand(1);

    ModelFlags model;
    ScanFlags scan_flags;

    auto* test = app.add_subcommand("test", "Test a series for a parameter change");
    model.add(*test);
    scan_flags.add(*test);

    std::string curve_out;
    auto* curve = app.add_subcommand("scan-curve", "Write per-k statistics q1, q2 for plotting");
    model.add(*curve);
    scan_flags.add(*curve);
    curve->add_option("--out", curve_out, "Output file (default: stdout)");

    std::vector<double> theta, theta2;
    std::optional<std::size_t> break_at;
    std::size_t n = 0;
    std::size_t burn_in = 500;
    std::uint64_t seed = 1;
    std::string sim_out;
    auto* sim = app.add_subcommand("simulate", "Simulate a series, optionally with one parameter change");
    model.add(*sim);
    sim->add_option("--theta", theta, "Parameters before the change")->required()->delimiter(',');
    sim->add_option("--theta2", theta2, "Parameters after the change")->delimiter(',');
    sim->add_option("--break", break_at, "Last index under --theta (change applies from break+1)");
    sim->add_option("--n", n, "Series length")->required()->check(CLI::PositiveNumber);
    sim->add_option("--burn-in", burn_in, "Discarded initial draws");
    sim->add_option("--seed", seed, "Random seed");
    sim->add_option("--out", sim_out, "Output file (default: stdout)");

    std::vector<std::size_t> dims{1, 2, 3};
    std::vector<double> alphas{0.05};
    qlcp::CalibrationOptions cal;
    std::string cal_out;
    auto* calib = app.add_subcommand("calibrate", "Simulate critical values of sup ||W_d||^2");
    calib->add_option("--d", dims, "Dimensions")->delimiter(',');
    calib->add_option("--alpha", alphas, "Levels")->delimiter(',');
    calib->add_option("--m", cal.m, "Grid size")->check(CLI::Range(100, 100000000));
    calib->add_option("--reps", cal.R, "Replications")->check(CLI::Range(1000, 1000000000));
    calib->add_option("--seed", cal.seed, "Random seed");
    calib->add_option("--out", cal_out, "Table file (default: stdout)");

    std::string exp_config, exp_out, exp_table;
    std::size_t reps = 100;
    double exp_alpha = 0.05;
    std::size_t exp_vn = 0;
    auto* exp = app.add_subcommand("experiment", "Monte Carlo level/power experiment");
    exp->add_option("config", exp_config, "key = value experiment file (flags are ignored when given)");
    model.add(*exp);
    exp->add_option("--theta", theta, "Parameters before the change")->delimiter(',');
    exp->add_option("--theta2", theta2, "Parameters after the change")->delimiter(',');
    exp->add_option("--break", break_at, "Change index (default n/2 when --theta2 is given)");
    exp->add_option("--n", n, "Series length");
    exp->add_option("--reps", reps, "Replications")->check(CLI::PositiveNumber);
    exp->add_option("--alpha", exp_alpha, "Nominal level")->check(CLI::Range(0.0, 1.0));
    exp->add_option("--vn", exp_vn, "Trimming v_n (default: family rule)");
    exp->add_option("--seed", seed, "Base seed");
    exp->add_option("--burn-in", burn_in, "Discarded initial draws");
    exp->add_option("--table", exp_table, "Critical value table");
    exp->add_option("--out", exp_out, "Per-replication CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitError;
    }

    try {
        if (test->parsed()) {
            const auto result = scan_flags.run(model.spec());
            qlcp::print_summary(std::cout, result);
            return result.decision == qlcp::Decision::reject ? kExitChange : kExitNoChange;
        }
        if (curve->parsed()) {
            const auto result = scan_flags.run(model.spec());
            if (curve_out.empty()) {
                qlcp::write_scan_curve(std::cout, result);
            } else {
                auto out = open_out(curve_out);
                qlcp::write_scan_curve(out, result);
                qlcp::print_summary(std::cout, result);
            }
            return kExitNoChange;
        }
        if (sim->parsed()) {
            qlcp::SimPlan plan{model.spec(), qlcp::ParamVector(theta)};
            plan.n = n;
            plan.burn_in = burn_in;
            plan.seed = seed;
            if (!theta2.empty()) {
                plan.theta1 = qlcp::ParamVector(theta2);
                plan.break_index = break_at.value_or(n / 2);
            } else if (break_at) {
                throw qlcp::ValidationError("--break requires --theta2");
            }
            const auto series = qlcp::generate(plan);
            if (sim_out.empty()) {
                qlcp::write_series(std::cout, series);
            } else {
                auto out = open_out(sim_out);
                qlcp::write_series(out, series);
            }
            return kExitNoChange;
        }
        if (calib->parsed()) {
            for (double a : alphas)
                if (!(a > 0.0 && a < 1.0)) throw qlcp::ValidationError("--alpha values must lie in (0, 1)");
            const auto table = qlcp::calibrate(dims, alphas, cal);
            if (cal_out.empty()) {
                table.write(std::cout);
            } else {
                table.write_file(cal_out);
                std::cout << std::setprecision(6);
                for (const auto& [key, e] : table.entries())
                    std::cout << "d=" << key.first << " alpha=" << key.second << " C_alpha=" << e.c << '\n';
            }
            return kExitNoChange;
        }
        if (exp->parsed()) {
            qlcp::ExperimentConfig cfg;
            if (!exp_config.empty()) {
                std::ifstream in(exp_config);
                if (!in) throw qlcp::ParseError("cannot open experiment config '" + exp_config + "'");
                cfg = qlcp::parse_experiment_config(in);
            } else {
                if (theta.empty() || n == 0) throw qlcp::ValidationError("experiment needs --theta and --n (or a config file)");
                const auto spec = model.spec();
                qlcp::SimPlan plan{spec, qlcp::ParamVector(theta)};
                plan.n = n;
                plan.burn_in = burn_in;
                if (!theta2.empty()) {
                    plan.theta1 = qlcp::ParamVector(theta2);
                    plan.break_index = break_at.value_or(n / 2);
                }
                cfg.plan = plan;
                cfg.replications = reps;
                cfg.alpha = exp_alpha;
                cfg.base_seed = seed;
                cfg.window_policy = spec.family() == qlcp::Family::ar ? qlcp::WindowPolicy::ar_default
                                                                      : qlcp::WindowPolicy::garch_default;
                if (exp_vn) {
                    cfg.window_policy = qlcp::WindowPolicy::explicit_vn;
                    cfg.vn = exp_vn;
                }
                cfg.table = load_table(exp_table);
            }
            const auto report = qlcp::run_experiment(cfg);
            qlcp::print_report(std::cout, report);
            if (!exp_out.empty()) {
                auto out = open_out(exp_out);
                qlcp::write_report_csv(out, report);
            }
            return kExitNoChange;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
