// Command-line front end: single-point evaluations, config-driven sweeps,
// committee sizing, lottery tails and figure reproduction.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric-instability
// error, 4 enumeration budget exceeded.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "apvote/analytics.hpp"
#include "apvote/committee_sizing.hpp"
#include "apvote/experiment.hpp"
#include "apvote/figures.hpp"
#include "apvote/signal_model.hpp"
#include "apvote/simulator.hpp"

namespace {

using apvote::detail::format_double;

struct GlobalOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::string out_path;
    int threads = 1;
};

apvote::ExperimentSpec load_spec(const GlobalOpts& g) {
    if (g.config_path.empty()) {
        throw apvote::config_error("--config is required for this command");
    }
    apvote::ExperimentSpec spec = apvote::load_config(g.config_path);
    if (g.seed) spec.base.seed = *g.seed;
    if (g.trials) spec.trials = *g.trials;
    if (!g.out_path.empty()) spec.output_path = g.out_path;
    return spec;
}

void emit_rows(const apvote::ExperimentSpec& spec,
               const apvote::ExperimentResult& result, int threads) {
    if (spec.output_path.empty()) {
        std::cout << apvote::rows_to_csv(result.rows);
        return;
    }
    apvote::write_file(spec.output_path, apvote::rows_to_csv(result.rows));
    apvote::write_file(
        spec.output_path + ".json",
        apvote::experiment_sidecar(spec, result, threads).dump(2) + "\n");
    std::cout << "wrote " << result.rows.size() << " rows to "
              << spec.output_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"approval-voting committee election analysis"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "experiment config file");
    app.add_option("--seed", g.seed, "override the config seed");
    app.add_option("--trials", g.trials, "override the config trial count");
    app.add_option("--out", g.out_path, "output CSV path");
    app.add_option("--threads", g.threads, "worker thread count")
        ->check(CLI::PositiveNumber);

    // posterior: single-signal posterior or its inverse.
    auto* posterior_cmd =
        app.add_subcommand("posterior", "posterior honesty probability");
    double po_p = 0.5, po_ph = 0.75, po_pm = 0.5, po_sigma = 0.1;
    std::optional<double> po_sstar, po_inverse;
    posterior_cmd->add_option("--p", po_p, "prior honesty probability");
    posterior_cmd->add_option("--ph", po_ph, "honest base signal");
    posterior_cmd->add_option("--pm", po_pm, "malicious base signal");
    posterior_cmd->add_option("--sigma", po_sigma, "noise standard deviation");
    posterior_cmd->add_option("--sstar", po_sstar, "raw signal value");
    posterior_cmd->add_option("--inverse", po_inverse,
                              "posterior value to invert instead");

    auto* success_cmd = app.add_subcommand(
        "success-exact", "exact success probability for a threshold config");
    auto* simulate_cmd =
        app.add_subcommand("simulate", "Monte Carlo success estimate");
    auto* sweep_cmd =
        app.add_subcommand("sweep", "run the config's sweep and emit CSV");

    auto* size_cmd =
        app.add_subcommand("committee-size", "minimum committee size");
    std::string size_method = "lottery";
    double size_target = 1e-4;
    double size_p = 0.8;
    std::string size_rho = "1/3";
    int size_kmax = 100000;
    size_cmd->add_option("--method", size_method, "lottery | voting")
        ->check(CLI::IsMember({"lottery", "voting"}));
    size_cmd->add_option("--target", size_target, "target failure probability")
        ->required();
    size_cmd->add_option("--p", size_p, "honesty probability (lottery)");
    size_cmd->add_option("--rho", size_rho, "tolerance fraction (lottery)");
    size_cmd->add_option("--kmax", size_kmax, "largest size to consider");

    auto* lottery_cmd =
        app.add_subcommand("lottery", "lottery committee success probability");
    int lot_k = 1500;
    double lot_p = 0.8;
    std::string lot_rho = "1/3";
    std::string lot_mode = "exact";
    double lot_elections = 0.0;
    lottery_cmd->add_option("--k", lot_k, "committee size")->required();
    lottery_cmd->add_option("--p", lot_p, "honesty probability")->required();
    lottery_cmd->add_option("--rho", lot_rho, "tolerance fraction");
    lottery_cmd->add_option("--mode", lot_mode, "exact | chernoff")
        ->check(CLI::IsMember({"exact", "chernoff"}));
    lottery_cmd->add_option("--elections", lot_elections,
                            "also print the lifetime union bound over this "
                            "many elections");

    auto* repro_cmd =
        app.add_subcommand("reproduce", "emit a figure's underlying data");
    std::string figure_id;
    repro_cmd->add_option("figure", figure_id, "figure id")->required();

    try {
        app.parse(argc, argv);

        if (posterior_cmd->parsed()) {
            apvote::SignalParams params{po_p, po_ph, po_pm, po_sigma};
            if (po_inverse) {
                std::cout << format_double(
                                 apvote::posterior_inverse(*po_inverse, params)
                                     .value)
                          << "\n";
            } else if (po_sstar) {
                std::cout << format_double(
                                 apvote::posterior(apvote::RawSignal{*po_sstar},
                                                   params)
                                     .value)
                          << "\n";
            } else {
                throw apvote::config_error(
                    "posterior: provide --sstar or --inverse");
            }
        } else if (success_cmd->parsed()) {
            const auto spec = load_spec(g);
            const auto est = apvote::evaluate_exact(spec.base);
            std::cout << format_double(est.value) << "\n";
        } else if (simulate_cmd->parsed()) {
            const auto spec = load_spec(g);
            apvote::McStats stats;
            const auto est = apvote::estimate_success(spec.base, spec.trials,
                                                      g.threads, &stats);
            if (stats.truncated > 0) {
                std::cerr << "warning: " << stats.truncated << " of "
                          << stats.trials
                          << " trials clipped a threshold vote set at the cap "
                             "t; analytic engines ignore the cap\n";
            }
            std::cout << format_double(est.value) << " ci99=["
                      << format_double(est.ci_low) << ","
                      << format_double(est.ci_high) << "] trials="
                      << stats.trials << "\n";
        } else if (sweep_cmd->parsed()) {
            const auto spec = load_spec(g);
            const auto result = apvote::run_experiment(spec, g.threads);
            emit_rows(spec, result, g.threads);
        } else if (size_cmd->parsed()) {
            if (size_method == "lottery") {
                const int k = apvote::min_committee_size_lottery(
                    size_target, size_p, apvote::Rational::parse(size_rho),
                    size_kmax);
                std::cout << k << " failure="
                          << format_double(apvote::lottery_failure(
                                 k, size_p, apvote::Rational::parse(size_rho)))
                          << "\n";
            } else {
                const auto spec = load_spec(g);
                apvote::VotingSizingConfig cfg;
                cfg.m = spec.base.m;
                cfg.n = spec.base.n;
                cfg.rho = spec.base.rho;
                cfg.signal = spec.base.signal;
                if (spec.base.strategies.empty() ||
                    spec.base.strategies.front().kind !=
                        apvote::StrategyKind::threshold) {
                    throw apvote::config_error(
                        "committee-size --method voting requires a threshold "
                        "strategy config");
                }
                cfg.threshold_z = spec.base.strategies.front().threshold_z;
                cfg.trials = spec.trials;
                cfg.seed = spec.base.seed;
                cfg.threads = g.threads;
                cfg.k_max = std::min(size_kmax, spec.base.m);
                const auto r =
                    apvote::min_committee_size_voting(size_target, cfg);
                std::cout << r.k << " failure_upper="
                          << format_double(1.0 - r.estimate.ci_low) << "\n";
            }
        } else if (lottery_cmd->parsed()) {
            const auto rho = apvote::Rational::parse(lot_rho);
            const auto tol = apvote::ToleranceSpec::make(rho, lot_k);
            const double success = apvote::lottery_success(
                lot_k, lot_p, tol,
                lot_mode == "exact" ? apvote::LotteryMode::exact
                                    : apvote::LotteryMode::chernoff);
            std::cout << "success=" << format_double(success)
                      << " failure=" << format_double(1.0 - success);
            if (lot_elections > 0.0) {
                std::cout << " lifetime_bound="
                          << format_double(apvote::lifetime_fork_bound(
                                 1.0 - success, lot_elections));
            }
            std::cout << "\n";
        } else if (repro_cmd->parsed()) {
            apvote::FigureRequest req;
            req.id = figure_id;
            req.out_path = g.out_path.empty() ? figure_id + ".csv" : g.out_path;
            req.threads = g.threads;
            req.seed = g.seed;
            req.trials = g.trials;
            const auto result = apvote::reproduce_figure(req);
            std::cout << "wrote " << result.rows.size() << " rows to "
                      << req.out_path << "\n";
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const apvote::budget_exceeded_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const apvote::numeric_instability_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const apvote::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
