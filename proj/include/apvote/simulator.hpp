#pragma once

// Monte Carlo election engine: signal sampling, strategy application,
// score tallying and worst-case committee resolution, plus success-rate
// estimation with Wilson confidence intervals. Trials are embarrassingly
// parallel; every trial's randomness is keyed by (seed, trial index, role)
// so results are byte-identical for any worker count.

#include <atomic>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "apvote/committee.hpp"
#include "apvote/distributions.hpp"
#include "apvote/errors.hpp"
#include "apvote/rng.hpp"
#include "apvote/signal_model.hpp"
#include "apvote/strategies.hpp"
#include "apvote/tolerance.hpp"

namespace apvote {

struct ElectionConfig {
    int m = 0;  // candidates
    int n = 0;  // voters
    int k = 0;  // committee size
    int t = 0;  // per-voter vote cap
    Rational rho{1, 3};
    SignalParams signal;             // shared prior and base signals
    std::vector<double> noise_sds;   // per-voter noise scale, length n
    std::vector<Strategy> strategies;  // length n
    std::uint64_t seed = 0;

    void validate() const {
        if (!(m >= k && k >= 1)) throw config_error("config: need m >= k >= 1");
        if (t < 1 || t > m) throw config_error("config: need 1 <= t <= m");
        if (n < 0) throw config_error("config: n must be >= 0");
        if (int(noise_sds.size()) != n || int(strategies.size()) != n) {
            throw config_error("config: per-voter lists must have length n");
        }
        signal.validate();
        for (double sd : noise_sds) {
            if (!(sd > 0.0)) throw config_error("config: noise_sd must be > 0");
        }
        for (const Strategy& s : strategies) s.validate(t);
        (void)tolerance();
    }

    ToleranceSpec tolerance() const { return ToleranceSpec::make(rho, k); }

    SignalParams voter_params(int i) const {
        return signal.with_noise_sd(noise_sds[std::size_t(i)]);
    }

    // Uniform-voter convenience constructor.
    static ElectionConfig uniform(int m, int n, int k, int t, Rational rho,
                                  const SignalParams& signal,
                                  const Strategy& strategy,
                                  std::uint64_t seed) {
        ElectionConfig cfg;
        cfg.m = m;
        cfg.n = n;
        cfg.k = k;
        cfg.t = t;
        cfg.rho = rho;
        cfg.signal = signal;
        cfg.noise_sds.assign(std::size_t(n), signal.noise_sd);
        cfg.strategies.assign(std::size_t(n), strategy);
        cfg.seed = seed;
        return cfg;
    }
};

struct ElectionOutcome {
    std::vector<int> scores;
    std::vector<std::uint8_t> types;  // realized honesty, 1 = honest
    std::vector<int> committee;
    int honest_count = 0;
    bool is_honest = false;
    bool cap_truncated = false;  // a threshold vote set was clipped at t

    bool operator==(const ElectionOutcome&) const = default;
};

// One election: draw types, draw signals, apply each voter's strategy,
// tally, resolve worst-case. Deterministic in (cfg.seed, trial_index).
inline ElectionOutcome run_election(const ElectionConfig& cfg,
                                    std::uint64_t trial_index) {
    const ToleranceSpec tol = cfg.tolerance();

    ElectionOutcome out;
    out.types.resize(std::size_t(cfg.m));
    RandomStream type_rng =
        make_stream(cfg.seed, trial_index, StreamRole::producer_types);
    for (int j = 0; j < cfg.m; ++j) {
        out.types[std::size_t(j)] =
            type_rng.next_bernoulli(cfg.signal.prior_honest) ? 1 : 0;
    }

    out.scores.assign(std::size_t(cfg.m), 0);
    RandomStream signal_rng =
        make_stream(cfg.seed, trial_index, StreamRole::signals);
    std::vector<double> posteriors(static_cast<std::size_t>(cfg.m));
    for (int i = 0; i < cfg.n; ++i) {
        const SignalParams params = cfg.voter_params(i);
        for (int j = 0; j < cfg.m; ++j) {
            const ProducerType type = out.types[std::size_t(j)]
                                          ? ProducerType::honest
                                          : ProducerType::malicious;
            const RawSignal s = sample_signal(type, params, signal_rng);
            posteriors[std::size_t(j)] = posterior(s, params).value;
        }
        const VoteSet votes =
            apply_strategy(posteriors, cfg.strategies[std::size_t(i)], cfg.t);
        out.cap_truncated |= votes.truncated;
        for (int j : votes.chosen) ++out.scores[std::size_t(j)];
    }

    CommitteeResolution res =
        resolve_adversarial(out.scores, out.types, cfg.k, tol);
    out.committee = std::move(res.committee);
    out.honest_count = res.honest_count;
    out.is_honest = res.is_honest;
    return out;
}

struct McStats {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    std::uint64_t truncated = 0;  // trials where a vote set hit the cap
};

namespace detail {

// Runs fn(trial) for trial in [0, trials) over a fixed batch grid. Batch
// boundaries do not depend on the worker count, and per-batch tallies are
// integers, so the aggregate is identical for any number of threads.
template <typename TrialFn>
McStats run_trials(std::uint64_t trials, int threads, const TrialFn& fn) {
    constexpr std::uint64_t kBatch = 2048;
    const std::uint64_t num_batches = (trials + kBatch - 1) / kBatch;
    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> successes{0};
    std::atomic<std::uint64_t> truncated{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    const auto worker = [&]() {
        try {
            while (true) {
                const std::uint64_t b = next.fetch_add(1);
                if (b >= num_batches || failed.load()) return;
                const std::uint64_t lo = b * kBatch;
                const std::uint64_t hi = std::min(trials, lo + kBatch);
                std::uint64_t succ = 0, trunc = 0;
                for (std::uint64_t trial = lo; trial < hi; ++trial) {
                    const auto r = fn(trial);
                    succ += r.first ? 1 : 0;
                    trunc += r.second ? 1 : 0;
                }
                successes.fetch_add(succ);
                truncated.fetch_add(trunc);
            }
        } catch (...) {
            std::scoped_lock lock(error_mutex);
            if (!error) error = std::current_exception();
            failed.store(true);
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    return McStats{trials, successes.load(), truncated.load()};
}

}  // namespace detail

// Success-rate estimate over independent trials, 99% Wilson interval.
inline SuccessEstimate estimate_success(const ElectionConfig& cfg,
                                        std::uint64_t trials, int threads = 1,
                                        McStats* stats = nullptr) {
    cfg.validate();
    if (trials < 1) throw config_error("estimate_success: trials must be >= 1");
    const McStats st = detail::run_trials(trials, threads, [&](std::uint64_t t) {
        const ElectionOutcome o = run_election(cfg, t);
        return std::pair<bool, bool>(o.is_honest, o.cap_truncated);
    });
    if (stats) *stats = st;
    const Interval ci = wilson_interval(st.successes, st.trials);
    return SuccessEstimate{double(st.successes) / double(st.trials), ci.low,
                           ci.high, EstimateMethod::mc};
}

// Reduced Monte Carlo engine for threshold voting: per-candidate vote
// counts are independent draws from the type's exact count distribution,
// so a trial samples m types, m counts, and one committee resolution.
// Distribution-identical to the full engine for threshold strategies with
// voter-independent scores; used where n is far too large to simulate
// per-signal (committee sizing).
inline SuccessEstimate threshold_success_monte_carlo(
    int m, int k, const ToleranceSpec& tol, double prior_honest,
    const Pmf& pmf_honest, const Pmf& pmf_malicious, std::uint64_t seed,
    std::uint64_t trials, int threads = 1,
    std::uint64_t max_failures = UINT64_MAX) {
    if (m < k) throw config_error("threshold_success_monte_carlo: m < k");
    const AliasTable honest_table(pmf_honest.masses);
    const AliasTable malicious_table(pmf_malicious.masses);
    std::atomic<std::uint64_t> failures{0};

    const McStats st = detail::run_trials(trials, threads, [&](std::uint64_t trial) {
        if (failures.load(std::memory_order_relaxed) > max_failures) {
            return std::pair<bool, bool>(true, false);  // outcome already decided
        }
        RandomStream type_rng = make_stream(seed, trial, StreamRole::producer_types);
        RandomStream score_rng = make_stream(seed, trial, StreamRole::scores);
        std::vector<std::uint8_t> types(static_cast<std::size_t>(m));
        std::vector<int> scores(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j) {
            const bool honest = type_rng.next_bernoulli(prior_honest);
            types[std::size_t(j)] = honest ? 1 : 0;
            scores[std::size_t(j)] =
                (honest ? honest_table : malicious_table).sample(score_rng);
        }
        const bool ok = resolve_adversarial(scores, types, k, tol).is_honest;
        if (!ok) failures.fetch_add(1, std::memory_order_relaxed);
        return std::pair<bool, bool>(ok, false);
    });
    if (failures.load() > max_failures) {
        // Early-aborted: the caller only needs "too many failures".
        const Interval ci = wilson_interval(0, st.trials);
        return SuccessEstimate{0.0, ci.low, ci.high, EstimateMethod::mc};
    }
    const Interval ci = wilson_interval(st.successes, st.trials);
    return SuccessEstimate{double(st.successes) / double(st.trials), ci.low,
                           ci.high, EstimateMethod::mc};
}

}  // namespace apvote
