#include "qlcp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "qlcp/errors.hpp"
#include "qlcp/random.hpp"

namespace qlcp {

ScanWindow policy_window(WindowPolicy policy, const ModelSpec& spec, std::size_t n, std::size_t vn) {
    switch (policy) {
    case WindowPolicy::explicit_vn: return explicit_window(spec, n, vn);
    case WindowPolicy::ar_default:
    case WindowPolicy::garch_default: {
        (void)default_window(spec, n); // validates n
        const Family rule = policy == WindowPolicy::ar_default ? Family::ar : Family::garch;
        return ScanWindow{n, std::clamp(window_policy_value(rule, n), spec.dim() + 1, n / 2 - 1)};
    }
    }
    throw ValidationError("unknown window policy");
}

namespace {

ReplicationRecord run_one(const ExperimentConfig& cfg, const ScanWindow& window, std::size_t rep) {
    ReplicationRecord rec;
    rec.rep = rep;
    rec.seed = derive_seed(cfg.base_seed, rep);
    try {
        SimPlan plan = cfg.plan;
        plan.seed = rec.seed;
        const auto series = generate(plan);
        ScanOptions opts = cfg.scan;
        opts.parallel = false;
        const ScanResult r = scan(plan.spec, series, window, cfg.alpha, cfg.table, opts);
        rec.Q = r.Q;
        rec.decision = r.decision;
        rec.argmax_k = r.argmax_k;
    } catch (const std::exception& e) {
        rec.flagged = true;
        rec.error = e.what();
    }
    return rec;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const std::string t = trim(item);
            out.push_back(std::stod(t, &used));
            if (used != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            throw ValidationError("key '" + key + "' expects a comma-separated list of numbers");
        }
    }
    return out;
}

double parse_double(const std::string& value, const std::string& key) {
    const auto v = parse_list(value, key);
    if (v.size() != 1) throw ValidationError("key '" + key + "' expects a single number");
    return v[0];
}

std::size_t parse_count(const std::string& value, const std::string& key) {
    const double v = parse_double(value, key);
    if (v < 0 || v != std::floor(v)) throw ValidationError("key '" + key + "' expects a non-negative integer");
    return static_cast<std::size_t>(v);
}

} // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, bool parallel) {
    if (cfg.replications < 1) throw ValidationError("experiment needs at least one replication");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    validate(cfg.plan);
    (void)cfg.table.quantile(cfg.plan.spec.dim(), cfg.alpha);
    const ScanWindow window = policy_window(cfg.window_policy, cfg.plan.spec, cfg.plan.n, cfg.vn);

    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.config = cfg;
    report.per_rep.resize(cfg.replications);
    const auto reps = static_cast<std::ptrdiff_t>(cfg.replications);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::ptrdiff_t r = 0; r < reps; ++r)
        report.per_rep[static_cast<std::size_t>(r)] = run_one(cfg, window, static_cast<std::size_t>(r));

    for (const auto& rec : report.per_rep) {
        if (rec.flagged) ++report.flagged;
        else if (rec.decision == Decision::reject) ++report.rejections;
    }
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (static_cast<double>(report.flagged) > kMaxFlaggedFraction * static_cast<double>(cfg.replications))
        throw Error("experiment failed: " + std::to_string(report.flagged) + " of " +
                    std::to_string(cfg.replications) + " replications could not be scanned (first error: " +
                    std::find_if(report.per_rep.begin(), report.per_rep.end(), [](const auto& r) { return r.flagged; })->error +
                    ")");
    const std::size_t valid = cfg.replications - report.flagged;
    report.rejection_rate = valid ? static_cast<double>(report.rejections) / static_cast<double>(valid) : 0.0;
    return report;
}

ExperimentConfig parse_experiment_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
        kv[lower(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
    }
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    static const char* known[] = {"model", "order", "theta", "theta2", "break", "break_fraction", "n", "reps",
                                  "alpha", "window", "seed", "burn_in", "table"};
    for (const auto& [key, value] : kv)
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw ValidationError("unknown experiment key '" + key + "'");

    ExperimentConfig cfg;
    const Family family = parse_family(get("model") ? lower(*get("model")) : "ar");
    const int order = get("order") ? static_cast<int>(parse_count(*get("order"), "order")) : 1;
    const ModelSpec spec = ModelSpec::make(family, order);
    if (!get("theta")) throw ValidationError("experiment config requires 'theta'");
    if (!get("n")) throw ValidationError("experiment config requires 'n'");

    SimPlan plan{spec, ParamVector(parse_list(*get("theta"), "theta"))};
    plan.n = parse_count(*get("n"), "n");
    if (get("burn_in")) plan.burn_in = parse_count(*get("burn_in"), "burn_in");
    if (get("theta2")) {
        plan.theta1 = ParamVector(parse_list(*get("theta2"), "theta2"));
        if (get("break")) plan.break_index = parse_count(*get("break"), "break");
        else if (get("break_fraction"))
            plan.break_index = static_cast<std::size_t>(
                std::floor(parse_double(*get("break_fraction"), "break_fraction") * static_cast<double>(plan.n)));
        else plan.break_index = plan.n / 2;
    } else if (get("break") || get("break_fraction")) {
        throw ValidationError("a break needs 'theta2'");
    }
    cfg.plan = std::move(plan);

    if (get("reps")) cfg.replications = parse_count(*get("reps"), "reps");
    if (get("alpha")) cfg.alpha = parse_double(*get("alpha"), "alpha");
    if (const auto* seed = get("seed")) {
        try {
            std::size_t used = 0;
            cfg.base_seed = std::stoull(*seed, &used);
            if (used != seed->size()) throw std::invalid_argument(*seed);
        } catch (const std::exception&) {
            throw ValidationError("key 'seed' expects a non-negative integer");
        }
    }
    cfg.window_policy = family == Family::ar ? WindowPolicy::ar_default : WindowPolicy::garch_default;
    if (const auto* w = get("window")) {
        const std::string v = lower(*w);
        if (v == "ar" || v == "ar_default") cfg.window_policy = WindowPolicy::ar_default;
        else if (v == "garch" || v == "garch_default") cfg.window_policy = WindowPolicy::garch_default;
        else {
            cfg.window_policy = WindowPolicy::explicit_vn;
            cfg.vn = parse_count(v, "window");
        }
    }
    if (const auto* t = get("table")) cfg.table = CriticalTable::read_file(*t);
    validate(cfg.plan);
    return cfg;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
    out << "rep,seed,Q,decision,argmax_k,error\n" << std::setprecision(17);
    for (const auto& r : report.per_rep) {
        out << r.rep << ',' << r.seed << ',';
        if (r.flagged) {
            std::string msg = r.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            out << "nan,flagged,0," << msg << '\n';
        } else {
            out << r.Q << ',' << to_string(r.decision) << ',' << r.argmax_k << ",\n";
        }
    }
}

void print_report(std::ostream& out, const ExperimentReport& report) {
    const auto& c = report.config;
    std::ostringstream s;
    s << std::setprecision(6);
    s << "model          : " << c.plan.spec.name() << '\n';
    s << "theta0         :";
    for (std::size_t i = 0; i < c.plan.theta0.size(); ++i) s << ' ' << c.plan.theta0[i];
    s << '\n';
    if (c.plan.theta1) {
        s << "theta1         :";
        for (std::size_t i = 0; i < c.plan.theta1->size(); ++i) s << ' ' << (*c.plan.theta1)[i];
        s << "  (from k* + 1, k* = " << *c.plan.break_index << ")\n";
    }
    s << "n              : " << c.plan.n << '\n';
    s << "replications   : " << c.replications << '\n';
    s << "alpha          : " << c.alpha << "  (C_alpha = " << c.table.quantile(c.plan.spec.dim(), c.alpha) << ")\n";
    s << "rejections     : " << report.rejections << '\n';
    if (report.flagged) s << "flagged        : " << report.flagged << '\n';
    s << (c.plan.theta1 ? "empirical power: " : "empirical level: ") << report.rejection_rate << '\n';
    s << "wall time (s)  : " << report.wall_time << '\n';
    out << s.str();
}

} // namespace qlcp
