#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "apvote/analytics.hpp"
#include "apvote/strategies.hpp"

using namespace apvote;

namespace {

const SignalParams kRef{0.75, 0.75, 0.5, 0.1};

// Uniform-voter vote-count pmfs for a threshold strategy.
std::pair<Pmf, Pmf> threshold_pmfs(int n, double z, const SignalParams& p) {
    const VoteProbs v = threshold_vote_probs(z, p);
    return {binomial_pmf(n, v.honest), binomial_pmf(n, v.malicious)};
}

// Direct evaluation of a stratum's success term: sum over vote levels of
// the honest-side order-statistic pmf times Pr[dishonest side < level].
// Mirrors the displayed sum shape, as an independent route to the
// failure-complement computation used by the implementation.
double stratum_success_direct(int a, int b, int T, int K, const Pmf& pmf_h,
                              const Pmf& pmf_m) {
    const auto Fh = pmf_h.cdf();
    const auto Fm = pmf_m.cdf();
    const int n = pmf_h.max_count();
    KahanSum acc;
    for (int x = 0; x <= n; ++x) {
        const double fX = detail::order_stat_pmf_from_values(
            Fh[std::size_t(x)], pmf_h.mass(x), a, a - T + 1);
        const double FY = detail::order_stat_cdf_from_value(
            Fm[std::size_t(x)], b, b - K + 1);
        const double fY = detail::order_stat_pmf_from_values(
            Fm[std::size_t(x)], pmf_m.mass(x), b, b - K + 1);
        acc.add(fX * (FY - fY));
    }
    return acc.value();
}

double success_direct(int m, int k, const ToleranceSpec& tol, double p,
                      const Pmf& pmf_h, const Pmf& pmf_m) {
    const int T = tol.honest_needed;
    const int K = tol.adversary_need;
    KahanSum total;
    for (int a = 0; a <= m; ++a) {
        const int b = m - a;
        if (a < T) continue;
        const double w = binom_term(m, a, p, 1.0 - p);
        if (b < K) {
            total.add(w);
        } else {
            total.add(w * stratum_success_direct(a, b, T, K, pmf_h, pmf_m));
        }
    }
    return total.value();
}

}  // namespace

TEST_CASE("tolerance spec thresholds", "[analytics]") {
    const auto third = Rational::parse("1/3");
    const auto t21 = ToleranceSpec::make(third, 21);
    CHECK(t21.honest_needed == 14);
    CHECK(t21.dishonest_cap == 7);
    CHECK(t21.adversary_need == 8);
    const auto t2 = ToleranceSpec::make(Rational::parse("1/2"), 2);
    CHECK(t2.honest_needed == 1);
    CHECK(t2.adversary_need == 2);
    const auto t1 = ToleranceSpec::make(third, 1);
    CHECK(t1.honest_needed == 1);
    CHECK(t1.adversary_need == 1);
    for (int k = 1; k <= 40; ++k) {
        const auto t = ToleranceSpec::make(third, k);
        REQUIRE(t.honest_needed + t.dishonest_cap >= k);
        REQUIRE(t.honest_needed + t.adversary_need == k + 1);
    }
}

TEST_CASE("success_threshold_exact basics", "[analytics]") {
    const auto tol = ToleranceSpec::make(Rational{1, 3}, 2);
    const auto [fh, fm] = threshold_pmfs(2, 0.5, kRef);
    SECTION("no honest candidates can exist: certain failure") {
        CHECK(success_threshold_exact(3, 2, tol, 0.0, fh, fm).value == 0.0);
    }
    SECTION("all candidates honest: certain success") {
        CHECK(success_threshold_exact(3, 2, tol, 1.0, fh, fm).value == 1.0);
    }
    SECTION("m < k is rejected") {
        CHECK_THROWS_AS(success_threshold_exact(1, 2, tol, 0.5, fh, fm),
                        config_error);
    }
    SECTION("mismatched pmf supports are rejected") {
        const Pmf other = binomial_pmf(3, 0.5);
        CHECK_THROWS_AS(success_threshold_exact(3, 2, tol, 0.5, fh, other),
                        config_error);
    }
    SECTION("monotone nondecreasing in the honesty prior") {
        double prev = 0.0;
        for (double p = 0.0; p <= 1.0; p += 0.05) {
            const double cur = success_threshold_exact(4, 2, tol, p, fh, fm).value;
            REQUIRE(cur >= prev - 1e-12);
            REQUIRE(cur >= 0.0);
            REQUIRE(cur <= 1.0);
            prev = cur;
        }
    }
}

TEST_CASE("success formula agrees with its enumeration oracle", "[analytics]") {
    for (const auto& rho : {Rational{1, 3}, Rational{1, 2}}) {
        for (int m = 2; m <= 4; ++m) {
            for (int k = 1; k <= std::min(3, m); ++k) {
                for (int n : {1, 3}) {
                    const auto tol = ToleranceSpec::make(rho, k);
                    const VoteProbs v = threshold_vote_probs(0.55, kRef);
                    const auto fh = binomial_pmf(n, v.honest);
                    const auto fm = binomial_pmf(n, v.malicious);
                    const double p = 0.7;
                    const double exact =
                        success_threshold_exact(m, k, tol, p, fh, fm).value;
                    const std::vector<double> qh(std::size_t(n), v.honest);
                    const std::vector<double> qm(std::size_t(n), v.malicious);
                    const double brute =
                        success_bruteforce(m, n, k, tol, p, qh, qm);
                    REQUIRE(exact == Catch::Approx(brute).margin(1e-10));
                    // Same value through the displayed success-sum shape.
                    const double direct = success_direct(m, k, tol, p, fh, fm);
                    REQUIRE(exact == Catch::Approx(direct).margin(1e-11));
                }
            }
        }
    }
}

TEST_CASE("success_bruteforce edge semantics", "[analytics]") {
    SECTION("k = m with p = 1 always succeeds") {
        const auto tol = ToleranceSpec::make(Rational{1, 3}, 3);
        const std::vector<double> q(2, 0.5);
        CHECK(success_bruteforce(3, 2, 3, tol, 1.0, q, q) ==
              Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("no voters: adversarial fill decides by candidate counts alone") {
        // With all scores zero the worst case seats as many dishonest as
        // exist, so success = Pr[#dishonest <= k - honest_needed].
        const int m = 4, k = 2;
        const auto tol = ToleranceSpec::make(Rational{1, 3}, k);
        const double p = 0.7;
        const double got = success_bruteforce(m, 0, k, tol, p, {}, {});
        KahanSum expect;
        for (int b = 0; b <= k - tol.honest_needed; ++b) {
            expect.add(binom_term(m, m - b, p, 1.0 - p));
        }
        CHECK(got == Catch::Approx(expect.value()).margin(1e-12));
    }
    SECTION("budget is enforced") {
        const auto tol = ToleranceSpec::make(Rational{1, 3}, 3);
        const std::vector<double> q(12, 0.5);
        CHECK_THROWS_AS(success_bruteforce(12, 12, 3, tol, 0.5, q, q),
                        budget_exceeded_error);
    }
}

TEST_CASE("asymptotic lower bound", "[analytics]") {
    SECTION("clamps at zero for uninformative sizes") {
        CHECK(asymptotic_lower_bound(10, 0, 0.3) == 0.0);
    }
    SECTION("closed form") {
        CHECK(asymptotic_lower_bound(10, 1000, 0.3) ==
              Catch::Approx(1.0 - 200.0 * std::exp(-45.0)).epsilon(1e-12));
    }
    SECTION("nondecreasing in n") {
        double prev = 0.0;
        for (int n = 0; n <= 2000; n += 100) {
            const double cur = asymptotic_lower_bound(10, n, 0.3);
            REQUIRE(cur >= prev);
            prev = cur;
        }
    }
    SECTION("the exact success dominates whenever the gap hypothesis holds") {
        // On small instances the bound is vacuous (clamped at zero); the
        // mid-size instance exercises a positive bound. Conditioning on
        // enough honest candidates matches the bound's hypothesis.
        const int m = 10, k = 3, n = 60;
        const auto tol = ToleranceSpec::make(Rational{1, 3}, k);
        const VoteProbs v = threshold_vote_probs(0.75, kRef);
        const double delta = v.honest - v.malicious;
        REQUIRE(delta > 0.0);
        const auto fh = binomial_pmf(n, v.honest);
        const auto fm = binomial_pmf(n, v.malicious);
        const double bound = asymptotic_lower_bound(m, n, delta);
        REQUIRE(bound > 0.0);
        const double cond = success_threshold_exact_conditional(m, k, tol, 0.75,
                                                                fh, fm);
        CHECK(cond >= bound);
    }
}

TEST_CASE("lottery success and failure", "[analytics]") {
    const Rational third{1, 3};
    SECTION("certain honesty in both modes") {
        const auto tol = ToleranceSpec::make(third, 10);
        CHECK(lottery_success(10, 1.0, tol, LotteryMode::exact) == 1.0);
        CHECK(lottery_success(10, 1.0, tol, LotteryMode::chernoff) < 1.0);
        CHECK(lottery_success(10, 1.0, tol, LotteryMode::chernoff) > 0.0);
    }
    SECTION("deep tail at committee size 1500") {
        const auto tol = ToleranceSpec::make(third, 1500);
        const double failure = 1.0 - lottery_success(1500, 0.8, tol,
                                                     LotteryMode::exact);
        CHECK(failure <= 1e-12);
        CHECK(failure >= 0.0);
    }
    SECTION("the exact success dominates the Chernoff bound") {
        for (int k = 10; k <= 2000; k += 97) {
            for (double p = 0.70; p <= 0.95; p += 0.05) {
                const auto tol = ToleranceSpec::make(third, k);
                const double exact = lottery_success(k, p, tol, LotteryMode::exact);
                const double bound =
                    lottery_success(k, p, tol, LotteryMode::chernoff);
                REQUIRE(exact >= bound);
            }
        }
    }
    SECTION("the bound refuses p <= 2/3 at rho = 1/3") {
        const auto tol = ToleranceSpec::make(third, 100);
        CHECK_THROWS_WITH(lottery_success(100, 0.6, tol, LotteryMode::chernoff),
                          Catch::Matchers::ContainsSubstring("bound-inapplicable"));
    }
}

TEST_CASE("lifetime fork bound", "[analytics]") {
    CHECK(lifetime_fork_bound(0.0, 2e8) == 0.0);
    CHECK(lifetime_fork_bound(1e-12, 2e8) == Catch::Approx(2e-4).epsilon(1e-12));
    CHECK(lifetime_fork_bound(0.5, 10) == 1.0);
    CHECK_THROWS_AS(lifetime_fork_bound(-1.0, 10), config_error);
}

TEST_CASE("two-voter cardinal dishonesty probabilities", "[analytics]") {
    SECTION("no dishonest candidates, no dishonest committee") {
        CHECK(two_voter_cardinal_dishonest(21, 21, 50, 21, 7, 0.0) == 0.0);
    }
    SECTION("an abstaining partner collapses to one binomial tail") {
        for (double q : {0.1, 0.25, 0.4}) {
            const double got = two_voter_cardinal_dishonest(21, 0, 50, 21, 7, q);
            const double expect = std::exp(
                log_binomial_tail(21, q, 8, TailDirection::at_least));
            REQUIRE(got == Catch::Approx(expect).epsilon(1e-12));
        }
    }
    SECTION("double-voting is strictly worse than abstention") {
        for (double q : {0.1, 0.2, 0.3}) {
            const double both = two_voter_cardinal_dishonest(21, 21, 50, 21, 7, q);
            const double solo = two_voter_cardinal_dishonest(21, 0, 50, 21, 7, q);
            REQUIRE(both > solo);
        }
    }
    SECTION("the regime precondition is enforced") {
        CHECK_THROWS_AS(two_voter_cardinal_dishonest(5, 5, 50, 21, 7, 0.2),
                        config_error);
    }
}

TEST_CASE("minimum lottery committee size", "[analytics]") {
    const Rational third{1, 3};
    SECTION("a trivial target is met by a single seat") {
        CHECK(min_committee_size_lottery(1.0, 0.8, third) == 1);
    }
    SECTION("the strong-failure target needs about five hundred seats") {
        const int k = min_committee_size_lottery(1e-12, 0.8, third);
        CHECK(k <= 1500);
        CHECK(k == 502);
        CHECK(lottery_failure(k, 0.8, third) <= 1e-12);
        CHECK(lottery_failure(k - 1, 0.8, third) > 1e-12);
    }
    SECTION("moderate target used by the committee-size comparison") {
        const int k = min_committee_size_lottery(1e-4, 0.8, third);
        CHECK(k == 139);
    }
    SECTION("unreachable targets are reported") {
        CHECK_THROWS_AS(min_committee_size_lottery(1e-12, 0.5, third, 2000),
                        config_error);
    }
}
