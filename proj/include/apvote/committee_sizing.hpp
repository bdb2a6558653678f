#pragma once

// Committee sizing for the voting protocol: smallest k whose Monte Carlo
// failure estimate is certifiably below a target. The lottery counterpart
// (exact tails) lives in analytics.hpp.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "apvote/analytics.hpp"
#include "apvote/simulator.hpp"
#include "apvote/strategies.hpp"

namespace apvote {

struct VotingSizingConfig {
    int m = 200;               // candidate pool
    int n = 10000;             // voters
    Rational rho{1, 3};
    SignalParams signal;       // shared across voters
    double threshold_z = 0.5;  // common threshold strategy
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
    int threads = 1;
    int k_min = 1;
    int k_max = 200;
};

struct SizingResult {
    int k = 0;
    SuccessEstimate estimate;  // at the chosen k
};

// Largest failure count still certifiable below the target by a 99%
// Wilson upper bound at this trial count.
inline std::uint64_t max_certifiable_failures(double target,
                                              std::uint64_t trials) {
    if (wilson_interval(0, trials).high > target) {
        throw config_error(
            "committee sizing: target " + std::to_string(target) +
            " is below the resolution of " + std::to_string(trials) +
            " Monte Carlo trials");
    }
    std::uint64_t f = 0;
    while (f + 1 <= trials && wilson_interval(f + 1, trials).high <= target) {
        ++f;
    }
    return f;
}

// Scan k upward; a candidate size passes when the Wilson upper bound of
// its failure rate meets the target. Vote counts are exact Binomial draws
// per candidate (threshold voting with uniform voters), so trials cost
// O(m) regardless of n. Trials are keyed by (seed, trial) alone: the same
// sampled worlds are re-scored at every k.
inline SizingResult min_committee_size_voting(double target_failure,
                                              const VotingSizingConfig& cfg) {
    if (!(target_failure > 0.0 && target_failure <= 1.0)) {
        throw config_error("min_committee_size: target outside (0,1]");
    }
    cfg.signal.validate();
    const VoteProbs q = threshold_vote_probs(cfg.threshold_z, cfg.signal);
    const Pmf pmf_h = binomial_pmf(cfg.n, q.honest);
    const Pmf pmf_m = binomial_pmf(cfg.n, q.malicious);
    const std::uint64_t max_fail =
        max_certifiable_failures(target_failure, cfg.trials);

    for (int k = cfg.k_min; k <= std::min(cfg.k_max, cfg.m); ++k) {
        const ToleranceSpec tol = ToleranceSpec::make(cfg.rho, k);
        const SuccessEstimate est = threshold_success_monte_carlo(
            cfg.m, k, tol, cfg.signal.prior_honest, pmf_h, pmf_m, cfg.seed,
            cfg.trials, cfg.threads, max_fail);
        const auto failures =
            std::uint64_t(std::llround((1.0 - est.value) * double(cfg.trials)));
        if (failures <= max_fail &&
            wilson_interval(failures, cfg.trials).high <= target_failure) {
            return SizingResult{k, est};
        }
    }
    throw config_error("min_committee_size: no k <= " +
                       std::to_string(std::min(cfg.k_max, cfg.m)) +
                       " meets the target at this trial count");
}

}  // namespace apvote
