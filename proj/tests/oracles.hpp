#pragma once

// Test-only oracles, independent of the implementation paths they check:
// exhaustive enumerations for small discrete laws and seeded Monte Carlo
// estimators for posterior and rank probabilities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "apvote/rng.hpp"
#include "apvote/signal_model.hpp"

namespace oracles {

// pmf of a Bernoulli-sum by brute enumeration over all 2^n outcomes.
inline std::vector<double> enumerate_bernoulli_sum(
    const std::vector<double>& probs) {
    const int n = int(probs.size());
    std::vector<double> pmf(std::size_t(n) + 1, 0.0);
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
        double w = 1.0;
        int ones = 0;
        for (int i = 0; i < n; ++i) {
            if ((mask >> i) & 1) {
                w *= probs[std::size_t(i)];
                ++ones;
            } else {
                w *= 1.0 - probs[std::size_t(i)];
            }
        }
        pmf[std::size_t(ones)] += w;
    }
    return pmf;
}

// pmf of the k-th smallest of n iid draws from a small discrete pmf,
// by enumeration over all support^n outcome tuples.
inline std::vector<double> enumerate_order_stat_pmf(
    const std::vector<double>& parent_pmf, int n, int k) {
    const int support = int(parent_pmf.size());
    std::vector<double> out(std::size_t(support), 0.0);
    std::vector<int> draw(std::size_t(n), 0);
    while (true) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) w *= parent_pmf[std::size_t(draw[std::size_t(i)])];
        std::vector<int> sorted = draw;
        std::sort(sorted.begin(), sorted.end());
        out[std::size_t(sorted[std::size_t(k - 1)])] += w;
        int pos = 0;
        while (pos < n && draw[std::size_t(pos)] == support - 1) {
            draw[std::size_t(pos)] = 0;
            ++pos;
        }
        if (pos == n) break;
        ++draw[std::size_t(pos)];
    }
    return out;
}

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t hits = 0;
};

inline McEstimate binomial_estimate(std::uint64_t successes,
                                    std::uint64_t total) {
    McEstimate e;
    e.hits = total;
    if (total == 0) return e;
    e.value = double(successes) / double(total);
    e.std_error =
        std::sqrt(std::max(e.value * (1.0 - e.value), 1e-12) / double(total));
    return e;
}

// Bayes oracle for the posterior: sample (type, raw signal) pairs and
// estimate P(honest | raw signal lands in a narrow bin around s_star).
inline McEstimate mc_posterior(const apvote::SignalParams& params,
                               double s_star, double half_width,
                               std::uint64_t samples, std::uint64_t seed) {
    apvote::RandomStream rng(seed, 7, 7);
    std::uint64_t in_bin = 0, honest_in_bin = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const bool honest = rng.next_bernoulli(params.prior_honest);
        const double s = params.base(honest ? apvote::ProducerType::honest
                                            : apvote::ProducerType::malicious) +
                         params.noise_sd * rng.next_gaussian();
        if (std::abs(s - s_star) <= half_width) {
            ++in_bin;
            honest_in_bin += honest ? 1 : 0;
        }
    }
    return binomial_estimate(honest_in_bin, in_bin);
}

// Pooled-signal Bayes oracle: both of two signals land in narrow bins.
inline McEstimate mc_posterior_two_signals(const apvote::SignalParams& params,
                                           double s1, double s2,
                                           double half_width,
                                           std::uint64_t samples,
                                           std::uint64_t seed) {
    apvote::RandomStream rng(seed, 9, 9);
    std::uint64_t in_bin = 0, honest_in_bin = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const bool honest = rng.next_bernoulli(params.prior_honest);
        const double base = params.base(honest ? apvote::ProducerType::honest
                                               : apvote::ProducerType::malicious);
        const double a = base + params.noise_sd * rng.next_gaussian();
        const double b = base + params.noise_sd * rng.next_gaussian();
        if (std::abs(a - s1) <= half_width && std::abs(b - s2) <= half_width) {
            ++in_bin;
            honest_in_bin += honest ? 1 : 0;
        }
    }
    return binomial_estimate(honest_in_bin, in_bin);
}

// Probability that a candidate of the given type is voted under a
// threshold strategy: sample signals, compare posterior against z.
inline McEstimate mc_threshold_vote(const apvote::SignalParams& params,
                                    apvote::ProducerType type, double z,
                                    std::uint64_t samples, std::uint64_t seed) {
    apvote::RandomStream rng(seed, 11, 11);
    std::uint64_t votes = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const apvote::RawSignal s = apvote::sample_signal(type, params, rng);
        votes += apvote::posterior(s, params).value > z ? 1 : 0;
    }
    return binomial_estimate(votes, samples);
}

// Probability that a target candidate of the given type lands in the
// voter's top-z posteriors among m candidates with Bernoulli(prior) types.
inline McEstimate mc_cardinal_vote(const apvote::SignalParams& params,
                                   apvote::ProducerType type, int z, int m,
                                   std::uint64_t samples, std::uint64_t seed) {
    apvote::RandomStream rng(seed, 13, 13);
    std::uint64_t votes = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double target =
            apvote::posterior(apvote::sample_signal(type, params, rng), params)
                .value;
        int above = 0;
        for (int j = 0; j < m - 1; ++j) {
            const bool honest = rng.next_bernoulli(params.prior_honest);
            const double other =
                apvote::posterior(
                    apvote::sample_signal(honest ? apvote::ProducerType::honest
                                                 : apvote::ProducerType::malicious,
                                          params, rng),
                    params)
                    .value;
            above += other > target ? 1 : 0;
        }
        votes += above <= z - 1 ? 1 : 0;
    }
    return binomial_estimate(votes, samples);
}

// Empirical CDF of the rank-th smallest of a two-population sample at x.
inline McEstimate mc_two_population_order_cdf(
    const std::function<double(apvote::RandomStream&)>& draw1,
    const std::function<double(apvote::RandomStream&)>& draw2, int n1, int n2,
    int rank, double x, std::uint64_t samples, std::uint64_t seed) {
    apvote::RandomStream rng(seed, 17, 17);
    std::uint64_t hits = 0;
    std::vector<double> pool(static_cast<std::size_t>(n1 + n2));
    for (std::uint64_t i = 0; i < samples; ++i) {
        for (int j = 0; j < n1; ++j) pool[std::size_t(j)] = draw1(rng);
        for (int j = 0; j < n2; ++j) pool[std::size_t(n1 + j)] = draw2(rng);
        std::sort(pool.begin(), pool.end());
        hits += pool[std::size_t(rank - 1)] <= x ? 1 : 0;
    }
    return binomial_estimate(hits, samples);
}

}  // namespace oracles
