#pragma once

// Closed-form and bound-based success probabilities: the exact
// order-statistic success formula for threshold voting, its exhaustive
// enumeration oracle, the exponential convergence bound, lottery tails and
// committee sizing, and the two-voter cardinal-suboptimality quantities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "apvote/committee.hpp"
#include "apvote/distributions.hpp"
#include "apvote/errors.hpp"
#include "apvote/numeric.hpp"
#include "apvote/tolerance.hpp"

namespace apvote {

namespace detail {

struct SuccessStrata {
    double success = 0.0;             // unconditional success probability
    double success_given_enough = 0.0;  // conditioned on >= honest_needed
                                        // honest candidates existing
};

// Success probability when every candidate's vote count is independent
// (threshold voting). Conditioned on a honest candidates, the committee is
// honest iff the T-th highest honest count strictly exceeds the
// adversary_need-th highest dishonest count (worst-case tie resolution).
// The dishonest-side rank is floor(rho*k)+1: the number of seats the
// adversary must capture. Strata where too few dishonest exist are certain
// successes; strata with fewer than T honest are certain failures.
//
// Each stratum is accumulated through its failure probability
// Pr[X <= Y] = sum_y f_Y(y) F_X(y), a sum of non-negative terms, so the
// result stays accurate even when the success probability is within 1e-11
// of one (needed when comparing against the convergence bound).
inline SuccessStrata success_threshold_strata(int m, int k,
                                              const ToleranceSpec& tol,
                                              double p, const Pmf& pmf_h,
                                              const Pmf& pmf_m) {
    if (m < k) throw config_error("success: need m >= k");
    if (!(p >= 0.0 && p <= 1.0)) throw config_error("success: p outside [0,1]");
    if (pmf_h.masses.size() != pmf_m.masses.size()) {
        throw config_error("success: vote-count pmf supports mismatched");
    }
    if (tol.committee_size != k) {
        throw config_error("success: tolerance spec built for different k");
    }
    const int T = tol.honest_needed;
    const int K = tol.adversary_need;
    const int n = pmf_h.max_count();
    const std::vector<double> Fh = pmf_h.cdf();
    const std::vector<double> Fm = pmf_m.cdf();

    KahanSum failure;           // over all strata
    KahanSum hyp_weight;        // total weight of strata with a >= T
    KahanSum hyp_failure;       // failure mass within those strata
    for (int a = 0; a <= m; ++a) {
        const int b = m - a;
        const double w = binom_term(m, a, p, 1.0 - p);
        if (a < T) {
            failure.add(w);
            continue;
        }
        hyp_weight.add(w);
        if (b < K) continue;  // adversary cannot reach its seat count

        const int kx = a - T + 1;  // T-th largest of a, smallest-index form
        const int ky = b - K + 1;
        KahanSum fail_a;
        double prev_FY = 0.0;
        for (int y = 0; y <= n; ++y) {
            const double FY = order_stat_cdf_from_value(Fm[std::size_t(y)], b, ky);
            const double fY = std::max(0.0, FY - prev_FY);
            prev_FY = FY;
            if (fY == 0.0) continue;
            const double FX = order_stat_cdf_from_value(Fh[std::size_t(y)], a, kx);
            fail_a.add(fY * FX);
        }
        const double fa = std::clamp(fail_a.value(), 0.0, 1.0);
        failure.add(w * fa);
        hyp_failure.add(w * fa);
    }

    SuccessStrata out;
    out.success = std::clamp(1.0 - failure.value(), 0.0, 1.0);
    const double hw = hyp_weight.value();
    out.success_given_enough =
        hw > 0.0 ? std::clamp(1.0 - hyp_failure.value() / hw, 0.0, 1.0) : 0.0;
    return out;
}

}  // namespace detail

// Exact success probability for threshold voting, from the per-type
// vote-count distributions. Precondition (caller-asserted): vote counts
// independent across candidates, which holds for threshold strategies.
inline SuccessEstimate success_threshold_exact(int m, int k,
                                               const ToleranceSpec& tol,
                                               double p, const Pmf& pmf_h,
                                               const Pmf& pmf_m) {
    return SuccessEstimate::exact(
        detail::success_threshold_strata(m, k, tol, p, pmf_h, pmf_m).success);
}

// Success probability conditioned on at least honest_needed honest
// candidates existing -- the hypothesis under which the exponential
// convergence bound applies.
inline double success_threshold_exact_conditional(int m, int k,
                                                  const ToleranceSpec& tol,
                                                  double p, const Pmf& pmf_h,
                                                  const Pmf& pmf_m) {
    return detail::success_threshold_strata(m, k, tol, p, pmf_h, pmf_m)
        .success_given_enough;
}

// Exhaustive oracle: sums over all 2^m type assignments and all vote-count
// vectors in {0..n}^m, resolving each election with the worst-case
// committee rule. Independent of the order-statistic formula above.
inline double success_bruteforce(int m, int n, int k, const ToleranceSpec& tol,
                                 double p, std::span<const double> qh_per_voter,
                                 std::span<const double> qm_per_voter) {
    if (m < k) throw config_error("success_bruteforce: need m >= k");
    if (qh_per_voter.size() != std::size_t(n) ||
        qm_per_voter.size() != std::size_t(n)) {
        throw config_error("success_bruteforce: per-voter probability lists "
                           "must have length n");
    }
    const double states = std::pow(double(n + 1), m) * std::pow(2.0, m);
    if (states > 1e7) {
        throw budget_exceeded_error(
            "success_bruteforce: (n+1)^m * 2^m = " + std::to_string(states) +
            " exceeds the 1e7 enumeration budget");
    }

    const Pmf fh = pbd_pmf(PoissonBinomialParams{
        std::vector<double>(qh_per_voter.begin(), qh_per_voter.end())});
    const Pmf fm = pbd_pmf(PoissonBinomialParams{
        std::vector<double>(qm_per_voter.begin(), qm_per_voter.end())});

    // Pre-expand type assignments with their prior weights.
    const int num_masks = 1 << m;
    std::vector<std::vector<std::uint8_t>> type_sets(static_cast<std::size_t>(num_masks));
    std::vector<double> type_weights(static_cast<std::size_t>(num_masks));
    for (int mask = 0; mask < num_masks; ++mask) {
        std::vector<std::uint8_t> types(static_cast<std::size_t>(m));
        double w = 1.0;
        for (int j = 0; j < m; ++j) {
            const bool honest = (mask >> j) & 1;
            types[std::size_t(j)] = honest ? 1 : 0;
            w *= honest ? p : 1.0 - p;
        }
        type_sets[std::size_t(mask)] = std::move(types);
        type_weights[std::size_t(mask)] = w;
    }

    std::vector<int> scores(std::size_t(m), 0);
    KahanSum total;
    while (true) {
        for (int mask = 0; mask < num_masks; ++mask) {
            if (type_weights[std::size_t(mask)] == 0.0) continue;
            const auto& types = type_sets[std::size_t(mask)];
            double prob = type_weights[std::size_t(mask)];
            for (int j = 0; j < m; ++j) {
                prob *= (types[std::size_t(j)] ? fh : fm).mass(scores[std::size_t(j)]);
            }
            if (prob == 0.0) continue;
            if (resolve_adversarial(scores, types, k, tol).is_honest) {
                total.add(prob);
            }
        }
        // Odometer over the score vectors.
        int pos = 0;
        while (pos < m && scores[std::size_t(pos)] == n) {
            scores[std::size_t(pos)] = 0;
            ++pos;
        }
        if (pos == m) break;
        ++scores[std::size_t(pos)];
    }
    return std::clamp(total.value(), 0.0, 1.0);
}

// Exponential convergence lower bound: 1 - 2 m^2 exp(-delta^2 n / 2),
// clamped at zero. delta is the gap between the smallest honest and
// largest dishonest per-voter vote probabilities.
inline double asymptotic_lower_bound(int m, int n, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) {
        throw config_error("asymptotic_lower_bound: delta outside (0,1]");
    }
    if (m < 1 || n < 0) {
        throw config_error("asymptotic_lower_bound: invalid m or n");
    }
    return std::max(0.0,
                    1.0 - 2.0 * double(m) * double(m) *
                              std::exp(-delta * delta * double(n) / 2.0));
}

enum class LotteryMode { exact, chernoff };

// Success probability of a randomly drawn committee of size k when each
// member is honest independently with probability p.
inline double lottery_success(int k, double p, const ToleranceSpec& tol,
                              LotteryMode mode) {
    if (tol.committee_size != k) {
        throw config_error("lottery_success: tolerance spec built for different k");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw config_error("lottery_success: p outside [0,1]");
    }
    if (mode == LotteryMode::exact) {
        return std::exp(log_binomial_tail(k, p, tol.honest_needed,
                                          TailDirection::at_least));
    }
    const double honest_frac = 1.0 - tol.rho.value();
    if (!(p > honest_frac)) {
        throw config_error("bound-inapplicable: the Chernoff lottery bound "
                           "requires p > 1 - rho");
    }
    const double d = 1.0 - honest_frac / p;
    return 1.0 - std::exp(-d * d * p * double(k) / 2.0);
}

// Union bound on the probability that any of num_elections elections
// produces a dishonest committee.
inline double lifetime_fork_bound(double per_election_failure,
                                  double num_elections) {
    if (per_election_failure < 0.0 || num_elections < 0.0) {
        throw config_error("lifetime_fork_bound: negative input");
    }
    return std::min(1.0, per_election_failure * num_elections);
}

// Two voters following cardinal strategies with sizes z0, z1 over m
// candidates, each candidate dishonest independently with probability
// q_dishonest, uninformative signals. Probability the committee ends up
// dishonest (more than t_byz dishonest members seated), in the regime
// max(z0,z1) >= k where zero-vote candidates never reach the committee:
// the double-vote overlap is hypergeometric and the voted dishonest count
// collapses to a single binomial tail.
inline double two_voter_cardinal_dishonest(int z0, int z1, int m, int k,
                                           int t_byz, double q_dishonest) {
    if (z0 < 0 || z0 > m || z1 < 0 || z1 > m) {
        throw config_error("two_voter_cardinal_dishonest: z outside 0..m");
    }
    if (std::max(z0, z1) < k) {
        throw config_error("two_voter_cardinal_dishonest: requires "
                           "max(z0, z1) >= k");
    }
    if (!(q_dishonest >= 0.0 && q_dishonest <= 1.0)) {
        throw config_error("two_voter_cardinal_dishonest: q outside [0,1]");
    }
    if (t_byz < 0) throw config_error("two_voter_cardinal_dishonest: t_byz < 0");

    KahanSum total;
    const int a_lo = std::max(0, z0 + z1 - m);
    const int a_hi = std::min(z0, z1);
    for (int a = a_lo; a <= a_hi; ++a) {
        const int voted = z0 + z1 - a;  // distinct candidates holding votes
        if (t_byz + 1 > voted) continue;
        const double tail = std::exp(log_binomial_tail(
            voted, q_dishonest, t_byz + 1, TailDirection::at_least));
        total.add(hypergeometric_pmf(m, z0, z1, a) * tail);
    }
    return std::clamp(total.value(), 0.0, 1.0);
}

inline double lottery_failure(int k, double p, Rational rho) {
    return 1.0 -
           lottery_success(k, p, ToleranceSpec::make(rho, k), LotteryMode::exact);
}

// Smallest committee size whose exact lottery failure meets the target.
// The failure envelope decreases in k; bracket by doubling, bisect, then
// walk down across any local ceiling wiggles.
inline int min_committee_size_lottery(double target_failure, double p,
                                      Rational rho, int k_max = 100000) {
    if (!(target_failure > 0.0 && target_failure <= 1.0)) {
        throw config_error("min_committee_size: target outside (0,1]");
    }
    const auto ok = [&](int k) { return lottery_failure(k, p, rho) <= target_failure; };
    if (ok(1)) return 1;
    int hi = 2;
    while (hi <= k_max && !ok(hi)) hi *= 2;
    if (hi > k_max) {
        if (!ok(k_max)) {
            throw config_error("min_committee_size: no k <= " +
                               std::to_string(k_max) + " reaches the target");
        }
        hi = k_max;
    }
    int lo = hi / 2;  // known failing
    while (lo + 1 < hi) {
        const int mid = lo + (hi - lo) / 2;
        (ok(mid) ? hi : lo) = mid;
    }
    while (hi > 1 && ok(hi - 1)) --hi;
    return hi;
}

}  // namespace apvote
