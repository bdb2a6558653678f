#pragma once

// Voting strategies: mapping posterior signals to vote sets, and the
// per-voter probabilities that a vote lands on an honest / malicious
// candidate, which feed the analytic success pipeline.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "apvote/distributions.hpp"
#include "apvote/errors.hpp"
#include "apvote/numeric.hpp"
#include "apvote/signal_model.hpp"

namespace apvote {

enum class StrategyKind { threshold, cardinal, abstain };

// Threshold(z in [0,1]): vote for every candidate whose posterior exceeds z.
// Cardinal(z in 1..t): vote for the z candidates with highest posteriors.
// Abstain: cast no votes. Single-choice voting is Cardinal(1).
struct Strategy {
    StrategyKind kind = StrategyKind::abstain;
    double threshold_z = 0.5;
    int cardinal_z = 1;

    static Strategy threshold(double z) {
        return Strategy{StrategyKind::threshold, z, 1};
    }
    static Strategy cardinal(int z) {
        return Strategy{StrategyKind::cardinal, 0.0, z};
    }
    static Strategy abstain() { return Strategy{StrategyKind::abstain, 0.0, 1}; }

    static Strategy single_choice() { return cardinal(1); }

    void validate(int vote_cap) const {
        switch (kind) {
            case StrategyKind::threshold:
                if (!(threshold_z >= 0.0 && threshold_z <= 1.0)) {
                    throw config_error("threshold strategy: z outside [0,1]");
                }
                break;
            case StrategyKind::cardinal:
                if (cardinal_z < 1 || cardinal_z > vote_cap) {
                    throw config_error("cardinal strategy: z=" +
                                       std::to_string(cardinal_z) +
                                       " outside 1..t=" + std::to_string(vote_cap));
                }
                break;
            case StrategyKind::abstain:
                break;
        }
    }

    std::string name() const {
        switch (kind) {
            case StrategyKind::threshold: return "threshold";
            case StrategyKind::cardinal: return "cardinal";
            case StrategyKind::abstain: return "abstain";
        }
        return "?";
    }
};

struct VoteSet {
    std::vector<int> chosen;       // ascending candidate indices, size <= t
    bool truncated = false;        // threshold overflow clipped at the cap
};

// Candidate indices ordered by posterior descending, ties by lowest index.
inline std::vector<int> rank_by_posterior(std::span<const double> posteriors) {
    std::vector<int> order(posteriors.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return posteriors[std::size_t(a)] > posteriors[std::size_t(b)];
    });
    return order;
}

inline VoteSet apply_strategy(std::span<const double> posteriors,
                              const Strategy& strategy, int cap) {
    const int m = int(posteriors.size());
    if (m < 1) throw config_error("apply_strategy: no candidates");
    if (strategy.kind == StrategyKind::cardinal && strategy.cardinal_z > m) {
        throw config_error("cardinal strategy: z exceeds candidate count");
    }
    strategy.validate(cap);

    VoteSet out;
    switch (strategy.kind) {
        case StrategyKind::abstain:
            break;
        case StrategyKind::cardinal: {
            const auto order = rank_by_posterior(posteriors);
            out.chosen.assign(order.begin(), order.begin() + strategy.cardinal_z);
            break;
        }
        case StrategyKind::threshold: {
            for (int j = 0; j < m; ++j) {
                if (posteriors[std::size_t(j)] > strategy.threshold_z) {
                    out.chosen.push_back(j);
                }
            }
            if (int(out.chosen.size()) > cap) {
                // Keep the cap-many highest posteriors (ties by lowest index).
                std::stable_sort(out.chosen.begin(), out.chosen.end(),
                                 [&](int a, int b) {
                                     return posteriors[std::size_t(a)] >
                                            posteriors[std::size_t(b)];
                                 });
                out.chosen.resize(std::size_t(cap));
                out.truncated = true;
            }
            break;
        }
    }
    std::sort(out.chosen.begin(), out.chosen.end());
    return out;
}

// Probability that one voter's vote reaches a specific honest / malicious
// candidate, conditioned on the candidate's type.
struct VoteProbs {
    double honest = 0.0;
    double malicious = 0.0;
};

// Threshold voting: the vote lands iff the posterior clears z, which maps
// back to a Gaussian tail of the raw signal.
inline VoteProbs threshold_vote_probs(double z, const SignalParams& params) {
    params.validate();
    if (z <= 0.0) return VoteProbs{1.0, 1.0};
    if (z >= 1.0) return VoteProbs{0.0, 0.0};
    if (!params.informative()) {
        throw config_error(
            "uninformative-signals: threshold vote probabilities undefined "
            "when base_honest == base_malicious");
    }
    const double cut = posterior_inverse(z, params).value;
    const double sigma = params.noise_sd;
    return VoteProbs{
        1.0 - normal_cdf((cut - params.base_honest) / sigma),
        1.0 - normal_cdf((cut - params.base_malicious) / sigma),
    };
}

namespace detail {

// Shared quadrature for the rank-based vote probabilities. `rank_tail`
// evaluates, at posterior level x, the probability that few enough of the
// m-1 competing candidates rank above the target.
template <typename RankTail>
double rank_vote_probability(ProducerType type, const SignalParams& params,
                             const RankTail& rank_tail) {
    const PosteriorConditional target(type, params);
    const auto integrand = [&](double x) {
        return target.pdf(x) * rank_tail(x);
    };
    constexpr double eps = 1e-12;
    return std::clamp(adaptive_simpson(integrand, eps, 1.0 - eps, 1e-8), 0.0,
                      1.0);
}

}  // namespace detail

// Cardinal voting: the target candidate is voted iff it ranks within the
// top z of the voter's m posteriors. Conditioned on the other candidates'
// type counts (binomial prior over honest count), the rank event is a
// two-population order-statistic tail, integrated against the target's
// conditional posterior density. Adaptive quadrature, abs tol 1e-8.
inline VoteProbs cardinal_vote_probs(int z, const SignalParams& params,
                                     int m) {
    params.validate();
    if (z < 1 || z > m) throw config_error("cardinal_vote_probs: z outside 1..m");
    if (!params.informative()) {
        throw config_error("uninformative-signals: cardinal vote probabilities "
                           "require base_honest > base_malicious");
    }
    if (z == m) return VoteProbs{1.0, 1.0};  // every candidate is in the top m

    const PosteriorConditional cond_h(ProducerType::honest, params);
    const PosteriorConditional cond_m(ProducerType::malicious, params);
    const int others = m - 1;
    const int rank = m - z;  // (m-z)-th smallest competitor must sit below x
    const double p = params.prior_honest;

    std::vector<double> type_weights(std::size_t(others) + 1);
    for (int a = 0; a <= others; ++a) {
        type_weights[std::size_t(a)] = binom_term(others, a, p, 1.0 - p);
    }

    const auto rank_tail = [&](double x) {
        const double u = cond_h.cdf(x);
        const double v = cond_m.cdf(x);
        KahanSum acc;
        for (int a = 0; a <= others; ++a) {
            acc.add(type_weights[std::size_t(a)] *
                    two_population_order_cdf_from_values(u, v, a, others - a,
                                                         rank));
        }
        return acc.value();
    };

    return VoteProbs{
        detail::rank_vote_probability(ProducerType::honest, params, rank_tail),
        detail::rank_vote_probability(ProducerType::malicious, params, rank_tail),
    };
}

// Single-choice voting via the type-conditioned product integrals: the
// target wins iff every competitor's posterior falls below it. Agrees with
// cardinal_vote_probs(z=1) by construction, through a different formula.
inline VoteProbs single_choice_vote_probs(const SignalParams& params, int m) {
    params.validate();
    if (m < 1) throw config_error("single_choice_vote_probs: m must be >= 1");
    if (m == 1) return VoteProbs{1.0, 1.0};
    if (!params.informative()) {
        throw config_error("uninformative-signals: single-choice vote "
                           "probabilities require base_honest > base_malicious");
    }

    const PosteriorConditional cond_h(ProducerType::honest, params);
    const PosteriorConditional cond_m(ProducerType::malicious, params);
    const int others = m - 1;
    const double p = params.prior_honest;

    std::vector<double> type_weights(std::size_t(others) + 1);
    for (int a = 0; a <= others; ++a) {
        type_weights[std::size_t(a)] = binom_term(others, a, p, 1.0 - p);
    }

    const auto all_below = [&](double x) {
        const double u = cond_h.cdf(x);
        const double v = cond_m.cdf(x);
        KahanSum acc;
        for (int a = 0; a <= others; ++a) {
            acc.add(type_weights[std::size_t(a)] * pow_or_one(u, a) *
                    pow_or_one(v, others - a));
        }
        return acc.value();
    };

    return VoteProbs{
        detail::rank_vote_probability(ProducerType::honest, params, all_below),
        detail::rank_vote_probability(ProducerType::malicious, params, all_below),
    };
}

}  // namespace apvote
