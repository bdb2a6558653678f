#pragma once

// Experiment harness: config-file ingestion, parameter sweeps and
// deterministic CSV emission with a JSON parameter sidecar.
//
// Config format: one `key = value` pair per line, `#` starts a comment.
// Keys: m, n, k, t, rho, p, p_h, p_m, sigma (scalar or comma list of n
// values), strategy (threshold|cardinal|abstain), z, sweep.axis
// (z|n|k|p|gap), sweep.from, sweep.to, sweep.step, engine (exact|mc|bound),
// trials, seed, output.

#include <charconv>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "apvote/analytics.hpp"
#include "apvote/errors.hpp"
#include "apvote/simulator.hpp"
#include "apvote/strategies.hpp"

namespace apvote {

struct SweepSpec {
    bool active = false;
    std::string axis;  // z | n | k | p | gap
    double from = 0.0;
    double to = 0.0;
    double step = 1.0;
};

enum class Engine { exact, mc, bound };

inline std::string engine_name(Engine e) {
    switch (e) {
        case Engine::exact: return "exact";
        case Engine::mc: return "mc";
        case Engine::bound: return "bound";
    }
    return "?";
}

struct ExperimentSpec {
    ElectionConfig base;
    SweepSpec sweep;
    Engine engine = Engine::exact;
    std::uint64_t trials = 100000;
    std::string output_path;

    void validate() const {
        base.validate();
        if (engine != Engine::mc) {
            for (const Strategy& s : base.strategies) {
                if (s.kind != StrategyKind::threshold) {
                    throw config_error(
                        "engine '" + engine_name(engine) +
                        "' is only valid for threshold strategies; use engine "
                        "= mc");
                }
            }
        }
        if (sweep.active) {
            if (sweep.step <= 0.0) throw config_error("sweep.step must be > 0");
            if (sweep.to < sweep.from) {
                throw config_error("sweep.to must be >= sweep.from");
            }
        }
        if (trials < 1) throw config_error("trials must be >= 1");
    }
};

struct ResultRow {
    double sweep_value = 0.0;
    int m = 0, n = 0, k = 0, t = 0;
    std::string rho;
    double p = 0.0, p_h = 0.0, p_m = 0.0;
    std::string sigma;
    std::string strategy;
    double z = 0.0;
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::string method;
    std::uint64_t wall_time_ms = 0;  // measured separately in the sidecar;
                                     // the CSV carries 0 so identical config
                                     // + seed gives byte-identical files
};

namespace detail {

// Shortest round-trip decimal for a double; locale-free and stable.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct ConfigLine {
    int line_no = 0;
    std::string key;
    std::string value;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<ConfigLine> tokenize_config(const std::string& text) {
    std::vector<ConfigLine> lines;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        raw = trim(raw);
        if (raw.empty()) continue;
        const auto eq = raw.find('=');
        if (eq == std::string::npos) {
            throw config_error("config line " + std::to_string(line_no) +
                               ": expected 'key = value'");
        }
        lines.push_back(ConfigLine{line_no, trim(raw.substr(0, eq)),
                                   trim(raw.substr(eq + 1))});
    }
    return lines;
}

inline double parse_double(const ConfigLine& l) {
    try {
        std::size_t used = 0;
        const double v = std::stod(l.value, &used);
        if (used != l.value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw config_error("config line " + std::to_string(l.line_no) +
                           ": key '" + l.key + "': not a number: '" + l.value +
                           "'");
    }
}

inline long long parse_int(const ConfigLine& l) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(l.value, &used);
        if (used != l.value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw config_error("config line " + std::to_string(l.line_no) +
                           ": key '" + l.key + "': not an integer: '" +
                           l.value + "'");
    }
}

}  // namespace detail

// Parses the key-value experiment format. Every violated invariant is
// reported with the offending key (and line where applicable).
inline ExperimentSpec parse_config(const std::string& text) {
    using detail::ConfigLine;
    ExperimentSpec spec;
    std::optional<double> sigma_scalar;
    std::vector<double> sigma_list;
    std::string strategy_kind = "threshold";
    double z_value = 0.5;
    bool have_z = false;

    int m = 0, n = -1, k = 0, t = 0;
    Rational rho{1, 3};
    double p = 0.5, p_h = 0.0, p_m = 0.0;
    bool have_m = false, have_n = false, have_k = false, have_t = false;
    bool have_p = false, have_ph = false, have_pm = false, have_sigma = false;

    for (const ConfigLine& l : detail::tokenize_config(text)) {
        const std::string& key = l.key;
        if (key == "m") { m = int(detail::parse_int(l)); have_m = true; }
        else if (key == "n") { n = int(detail::parse_int(l)); have_n = true; }
        else if (key == "k") { k = int(detail::parse_int(l)); have_k = true; }
        else if (key == "t") { t = int(detail::parse_int(l)); have_t = true; }
        else if (key == "rho") {
            try {
                rho = Rational::parse(l.value);
            } catch (const config_error& e) {
                throw config_error("config line " + std::to_string(l.line_no) +
                                   ": key 'rho': " + e.what());
            }
        }
        else if (key == "p") { p = detail::parse_double(l); have_p = true; }
        else if (key == "p_h") { p_h = detail::parse_double(l); have_ph = true; }
        else if (key == "p_m") { p_m = detail::parse_double(l); have_pm = true; }
        else if (key == "sigma") {
            have_sigma = true;
            if (l.value.find(',') == std::string::npos) {
                sigma_scalar = detail::parse_double(l);
            } else {
                std::istringstream ss(l.value);
                std::string part;
                while (std::getline(ss, part, ',')) {
                    sigma_list.push_back(detail::parse_double(
                        ConfigLine{l.line_no, l.key, detail::trim(part)}));
                }
            }
        }
        else if (key == "strategy" || key == "strategy.kind") {
            strategy_kind = l.value;
        }
        else if (key == "z" || key == "strategy.z") {
            z_value = detail::parse_double(l);
            have_z = true;
        }
        else if (key == "sweep.axis") { spec.sweep.active = true; spec.sweep.axis = l.value; }
        else if (key == "sweep.from") { spec.sweep.from = detail::parse_double(l); }
        else if (key == "sweep.to") { spec.sweep.to = detail::parse_double(l); }
        else if (key == "sweep.step") { spec.sweep.step = detail::parse_double(l); }
        else if (key == "engine") {
            if (l.value == "exact") spec.engine = Engine::exact;
            else if (l.value == "mc") spec.engine = Engine::mc;
            else if (l.value == "bound") spec.engine = Engine::bound;
            else {
                throw config_error("config line " + std::to_string(l.line_no) +
                                   ": key 'engine': unknown engine '" +
                                   l.value + "'");
            }
        }
        else if (key == "trials") { spec.trials = std::uint64_t(detail::parse_int(l)); }
        else if (key == "seed") { spec.base.seed = std::uint64_t(detail::parse_int(l)); }
        else if (key == "output") { spec.output_path = l.value; }
        else {
            throw config_error("config line " + std::to_string(l.line_no) +
                               ": unknown key '" + key + "'");
        }
    }

    const std::pair<bool, const char*> required[] = {
        {have_m, "m"},   {have_n, "n"},     {have_k, "k"},
        {have_t, "t"},   {have_p, "p"},     {have_ph, "p_h"},
        {have_pm, "p_m"}, {have_sigma, "sigma"}};
    for (const auto& [flag, name] : required) {
        if (!flag) {
            throw config_error(std::string("config: missing required key '") +
                               name + "'");
        }
    }
    if (k > m) throw config_error("config: key 'k': m >= k violated");

    spec.base.m = m;
    spec.base.n = n;
    spec.base.k = k;
    spec.base.t = t;
    spec.base.rho = rho;
    spec.base.signal.prior_honest = p;
    spec.base.signal.base_honest = p_h;
    spec.base.signal.base_malicious = p_m;
    spec.base.signal.noise_sd = sigma_scalar.value_or(
        sigma_list.empty() ? 0.1 : sigma_list.front());
    if (!sigma_list.empty()) {
        if (int(sigma_list.size()) != n) {
            throw config_error("config: key 'sigma': per-voter list must have "
                               "length n = " + std::to_string(n));
        }
        spec.base.noise_sds = sigma_list;
    } else {
        spec.base.noise_sds.assign(std::size_t(n), *sigma_scalar);
    }

    Strategy strat;
    if (strategy_kind == "threshold") {
        strat = Strategy::threshold(have_z ? z_value : 0.5);
    } else if (strategy_kind == "cardinal") {
        strat = Strategy::cardinal(have_z ? int(std::llround(z_value)) : 1);
    } else if (strategy_kind == "abstain") {
        strat = Strategy::abstain();
    } else {
        throw config_error("config: key 'strategy': unknown kind '" +
                           strategy_kind + "'");
    }
    spec.base.strategies.assign(std::size_t(n), strat);

    spec.validate();
    return spec;
}

inline ExperimentSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

namespace detail {

inline std::string sigma_column(const ElectionConfig& cfg) {
    bool uniform = true;
    for (double sd : cfg.noise_sds) uniform &= sd == cfg.signal.noise_sd;
    if (uniform || cfg.noise_sds.empty()) {
        return format_double(cfg.signal.noise_sd);
    }
    std::string out;
    for (std::size_t i = 0; i < cfg.noise_sds.size(); ++i) {
        if (i) out += ';';
        out += format_double(cfg.noise_sds[i]);
    }
    return out;
}

inline double strategy_z(const Strategy& s) {
    switch (s.kind) {
        case StrategyKind::threshold: return s.threshold_z;
        case StrategyKind::cardinal: return double(s.cardinal_z);
        case StrategyKind::abstain: return 0.0;
    }
    return 0.0;
}

// Per-voter vote probabilities for threshold configs; the exact and bound
// engines both start here.
inline std::pair<std::vector<double>, std::vector<double>> threshold_probs(
    const ElectionConfig& cfg) {
    std::vector<double> qh, qm;
    qh.reserve(std::size_t(cfg.n));
    qm.reserve(std::size_t(cfg.n));
    for (int i = 0; i < cfg.n; ++i) {
        const VoteProbs v = threshold_vote_probs(
            cfg.strategies[std::size_t(i)].threshold_z, cfg.voter_params(i));
        qh.push_back(v.honest);
        qm.push_back(v.malicious);
    }
    return {std::move(qh), std::move(qm)};
}

}  // namespace detail

// Exact success for a threshold config via the order-statistic formula.
inline SuccessEstimate evaluate_exact(const ElectionConfig& cfg) {
    const auto [qh, qm] = detail::threshold_probs(cfg);
    const Pmf pmf_h = pbd_pmf(PoissonBinomialParams{qh});
    const Pmf pmf_m = pbd_pmf(PoissonBinomialParams{qm});
    return success_threshold_exact(cfg.m, cfg.k, cfg.tolerance(),
                                   cfg.signal.prior_honest, pmf_h, pmf_m);
}

// Convergence lower bound for a threshold config; vacuous gaps yield 0.
inline SuccessEstimate evaluate_bound(const ElectionConfig& cfg) {
    if (cfg.n == 0) return SuccessEstimate::bound(0.0);
    const auto [qh, qm] = detail::threshold_probs(cfg);
    double min_qh = 1.0, max_qm = 0.0;
    for (double v : qh) min_qh = std::min(min_qh, v);
    for (double v : qm) max_qm = std::max(max_qm, v);
    const double delta = min_qh - max_qm;
    if (!(delta > 0.0)) return SuccessEstimate::bound(0.0);
    return SuccessEstimate::bound(
        asymptotic_lower_bound(cfg.m, cfg.n, std::min(1.0, delta)));
}

inline SuccessEstimate evaluate_point(const ElectionConfig& cfg, Engine engine,
                                      std::uint64_t trials, int threads) {
    switch (engine) {
        case Engine::exact: return evaluate_exact(cfg);
        case Engine::bound: return evaluate_bound(cfg);
        case Engine::mc: return estimate_success(cfg, trials, threads);
    }
    throw config_error("unknown engine");
}

inline std::vector<double> sweep_grid(const SweepSpec& sweep) {
    if (!sweep.active) return {0.0};
    std::vector<double> grid;
    // Index-based stepping keeps grid points exact under accumulation.
    const auto count =
        std::size_t((sweep.to - sweep.from) / sweep.step + 1e-9) + 1;
    for (std::size_t i = 0; i < count; ++i) {
        grid.push_back(sweep.from + double(i) * sweep.step);
    }
    if (grid.empty()) throw config_error("sweep grid is empty");
    return grid;
}

inline ElectionConfig apply_axis(const ElectionConfig& base,
                                 const std::string& axis, double value) {
    ElectionConfig cfg = base;
    if (axis == "z") {
        for (Strategy& s : cfg.strategies) {
            if (s.kind == StrategyKind::threshold) s.threshold_z = value;
            else if (s.kind == StrategyKind::cardinal) {
                s.cardinal_z = int(std::llround(value));
            }
        }
    } else if (axis == "n") {
        const int n = int(std::llround(value));
        cfg.n = n;
        cfg.noise_sds.assign(std::size_t(n), base.signal.noise_sd);
        cfg.strategies.assign(
            std::size_t(n),
            base.strategies.empty() ? Strategy::threshold(0.5)
                                    : base.strategies.front());
    } else if (axis == "k") {
        cfg.k = int(std::llround(value));
    } else if (axis == "p") {
        cfg.signal.prior_honest = value;
    } else if (axis == "gap") {
        cfg.signal.base_honest = cfg.signal.base_malicious + value;
    } else {
        throw config_error("unknown sweep axis '" + axis + "'");
    }
    return cfg;
}

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<std::uint64_t> wall_times_ms;  // measured, sidecar-only
};

// Evaluates the chosen engine at every grid point, rows in grid order.
// Deterministic for a fixed seed and any thread count.
inline ExperimentResult run_experiment(const ExperimentSpec& spec,
                                       int threads = 1) {
    spec.validate();
    ExperimentResult result;
    for (double value : sweep_grid(spec.sweep)) {
        const ElectionConfig cfg =
            spec.sweep.active ? apply_axis(spec.base, spec.sweep.axis, value)
                              : spec.base;
        cfg.validate();
        const auto start = std::chrono::steady_clock::now();
        const SuccessEstimate est =
            evaluate_point(cfg, spec.engine, spec.trials, threads);
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);

        ResultRow row;
        row.sweep_value = spec.sweep.active ? value : 0.0;
        row.m = cfg.m;
        row.n = cfg.n;
        row.k = cfg.k;
        row.t = cfg.t;
        row.rho = cfg.rho.str();
        row.p = cfg.signal.prior_honest;
        row.p_h = cfg.signal.base_honest;
        row.p_m = cfg.signal.base_malicious;
        row.sigma = detail::sigma_column(cfg);
        row.strategy = cfg.strategies.empty() ? "abstain"
                                              : cfg.strategies.front().name();
        row.z = cfg.strategies.empty()
                    ? 0.0
                    : detail::strategy_z(cfg.strategies.front());
        row.value = est.value;
        row.ci_low = est.ci_low;
        row.ci_high = est.ci_high;
        row.method = method_name(est.method);
        result.rows.push_back(std::move(row));
        result.wall_times_ms.push_back(std::uint64_t(elapsed.count()));
    }
    return result;
}

inline constexpr const char* kCsvHeader =
    "sweep_value,m,n,k,t,rho,p,p_h,p_m,sigma,strategy,z,value,ci_low,ci_high,"
    "method,wall_time_ms";

inline std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const ResultRow& r : rows) {
        out += detail::format_double(r.sweep_value);
        out += ',' + std::to_string(r.m) + ',' + std::to_string(r.n) + ',' +
               std::to_string(r.k) + ',' + std::to_string(r.t);
        out += ',' + r.rho;
        out += ',' + detail::format_double(r.p) + ',' +
               detail::format_double(r.p_h) + ',' + detail::format_double(r.p_m);
        out += ',' + r.sigma + ',' + r.strategy + ',' +
               detail::format_double(r.z);
        out += ',' + detail::format_double(r.value) + ',' +
               detail::format_double(r.ci_low) + ',' +
               detail::format_double(r.ci_high);
        out += ',' + r.method + ',' + std::to_string(r.wall_time_ms);
        out += '\n';
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open output file: " + path);
    out << content;
}

// JSON sidecar describing every parameter of the run plus measured
// per-row wall times (timings live here, not in the CSV, so the CSV stays
// byte-identical across reruns).
inline nlohmann::json experiment_sidecar(const ExperimentSpec& spec,
                                         const ExperimentResult& result,
                                         int threads) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["m"] = spec.base.m;
    j["n"] = spec.base.n;
    j["k"] = spec.base.k;
    j["t"] = spec.base.t;
    j["rho"] = spec.base.rho.str();
    j["p"] = spec.base.signal.prior_honest;
    j["p_h"] = spec.base.signal.base_honest;
    j["p_m"] = spec.base.signal.base_malicious;
    j["sigma"] = detail::sigma_column(spec.base);
    j["strategy"] = spec.base.strategies.empty()
                        ? "abstain"
                        : spec.base.strategies.front().name();
    j["z"] = spec.base.strategies.empty()
                 ? 0.0
                 : detail::strategy_z(spec.base.strategies.front());
    j["engine"] = engine_name(spec.engine);
    j["trials"] = spec.trials;
    j["seed"] = spec.base.seed;
    j["threads"] = threads;
    if (spec.sweep.active) {
        j["sweep"] = {{"axis", spec.sweep.axis},
                      {"from", spec.sweep.from},
                      {"to", spec.sweep.to},
                      {"step", spec.sweep.step}};
    }
    j["wall_time_ms"] = result.wall_times_ms;
    return j;
}

}  // namespace apvote
