#pragma once

// Finite discrete-distribution machinery: the Poisson Binomial law of vote
// counts (exact pmf/cdf via two algorithms), Chernoff-Hoeffding tail
// bounds, order statistics of discrete iid samples, the two-population
// order-statistic CDF, and log-space binomial tails.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "apvote/errors.hpp"
#include "apvote/numeric.hpp"

namespace apvote {

struct PoissonBinomialParams {
    std::vector<double> probs;

    void validate() const {
        for (double p : probs) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw config_error("Poisson Binomial parameter outside [0,1]");
            }
        }
    }
};

// Finite pmf on counts 0..n. Masses below the flush threshold are zeroed;
// the total must stay within kMassTolerance of one.
struct Pmf {
    std::vector<double> masses;

    static constexpr double kMassTolerance = 1e-9;
    static constexpr double kFlushThreshold = 1e-300;

    int max_count() const { return int(masses.size()) - 1; }

    double mass(int x) const {
        return (x >= 0 && x < int(masses.size())) ? masses[std::size_t(x)] : 0.0;
    }

    std::vector<double> cdf() const {
        std::vector<double> out(masses.size());
        KahanSum acc;
        for (std::size_t i = 0; i < masses.size(); ++i) {
            acc.add(masses[i]);
            out[i] = std::min(1.0, acc.value());
        }
        return out;
    }

    void finalize() {
        KahanSum acc;
        for (double& v : masses) {
            if (v < 0.0) {
                if (v < -1e-15) {
                    throw numeric_instability_error(
                        "pmf mass below -1e-15: " + std::to_string(v));
                }
                v = 0.0;
            }
            if (v < kFlushThreshold) v = 0.0;
            acc.add(v);
        }
        if (std::abs(acc.value() - 1.0) > kMassTolerance) {
            throw numeric_instability_error(
                "pmf does not sum to 1 within tolerance: total " +
                std::to_string(acc.value()));
        }
    }
};

enum class PbdMethod { convolution, dft };

namespace detail {

inline Pmf pbd_pmf_convolution(std::vector<double> probs) {
    // Sorting first makes the result exactly invariant under permutation
    // of the parameters: identical doubles in, identical doubles out.
    std::sort(probs.begin(), probs.end());
    std::vector<double> pmf{1.0};
    pmf.reserve(probs.size() + 1);
    for (double p : probs) {
        const double q = 1.0 - p;
        pmf.push_back(p * pmf.back());
        for (std::size_t x = pmf.size() - 2; x > 0; --x) {
            pmf[x] = q * pmf[x] + p * pmf[x - 1];
        }
        pmf[0] *= q;
    }
    Pmf out{std::move(pmf)};
    out.finalize();
    return out;
}

inline Pmf pbd_pmf_dft(const std::vector<double>& probs) {
    using cd = std::complex<double>;
    const std::size_t n = probs.size();
    const std::size_t len = n + 1;
    const double theta = 2.0 * std::numbers::pi / double(len);
    std::vector<cd> factors(len);
    for (std::size_t j = 0; j < len; ++j) {
        const cd w(std::cos(theta * double(j)), std::sin(theta * double(j)));
        cd prod(1.0, 0.0);
        for (double p : probs) prod *= p * w + (1.0 - p);
        factors[j] = prod;
    }
    std::vector<double> pmf(len);
    double worst_residue = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
        cd acc(0.0, 0.0);
        for (std::size_t j = 0; j < len; ++j) {
            const double ang = -theta * double(j) * double(t);
            acc += cd(std::cos(ang), std::sin(ang)) * factors[j];
        }
        acc /= double(len);
        worst_residue = std::max(worst_residue, std::abs(acc.imag()));
        pmf[t] = acc.real();
    }
    if (worst_residue > 1e-8) {
        throw numeric_instability_error(
            "DFT pmf imaginary residue " + std::to_string(worst_residue) +
            " exceeds 1e-8; fall back to convolution");
    }
    Pmf out{std::move(pmf)};
    out.finalize();
    return out;
}

}  // namespace detail

// pmf of a sum of independent Bernoulli trials. The convolution dynamic
// program is the canonical path; the DFT characterization is kept as a
// cross-check and rejects itself when complex cancellation degrades.
inline Pmf pbd_pmf(const PoissonBinomialParams& params,
                   PbdMethod method = PbdMethod::convolution) {
    params.validate();
    if (method == PbdMethod::dft) return detail::pbd_pmf_dft(params.probs);
    return detail::pbd_pmf_convolution(params.probs);
}

// Pr[X <= t] by cumulative summation of the convolution pmf.
inline double pbd_cdf(const PoissonBinomialParams& params, int t) {
    params.validate();
    const int n = int(params.probs.size());
    if (t < 0 || t > n) {
        throw config_error("pbd_cdf: t=" + std::to_string(t) +
                           " outside support 0.." + std::to_string(n));
    }
    const Pmf pmf = pbd_pmf(params);
    KahanSum acc;
    for (int x = 0; x <= t; ++x) acc.add(pmf.mass(x));
    return std::min(1.0, acc.value());
}

struct TailBounds {
    double upper_tail = 1.0;  // bound on Pr[X > n*pbar + t]
    double lower_tail = 1.0;  // bound on Pr[X < n*pbar - t]
};

// Chernoff-Hoeffding: both tails bounded by exp(-2 t^2 / n).
inline TailBounds chernoff_bounds(const PoissonBinomialParams& params,
                                  double t) {
    params.validate();
    if (params.probs.empty()) {
        throw config_error("chernoff_bounds: empty parameter list");
    }
    if (t < 0.0) throw config_error("chernoff_bounds: t must be >= 0");
    const double n = double(params.probs.size());
    const double b = std::min(1.0, std::exp(-2.0 * t * t / n));
    return TailBounds{b, b};
}

namespace detail {

// CDF of the k-th smallest of n iid discrete draws, expressed through the
// parent CDF value F at the evaluation point.
inline double order_stat_cdf_from_value(double F, int n, int k) {
    KahanSum acc;
    for (int j = 0; j <= n - k; ++j) {
        acc.add(binom_term(n, j, 1.0 - F, F));
    }
    return std::min(1.0, std::max(0.0, acc.value()));
}

inline double order_stat_pmf_from_values(double F, double f, int n, int k) {
    KahanSum acc;
    for (int j = 0; j <= n - k; ++j) {
        acc.add(binom_term(n, j, 1.0 - F, F) -
                binom_term(n, j, 1.0 - F + f, F - f));
    }
    return std::min(1.0, std::max(0.0, acc.value()));
}

}  // namespace detail

// Order statistic (k-th smallest of n iid draws) of a discrete parent
// distribution given by aligned pmf/cdf tables over counts 0..N.
class DiscreteOrderStatistic {
  public:
    DiscreteOrderStatistic(std::vector<double> pmf, std::vector<double> cdf,
                           int k, int n)
        : pmf_(std::move(pmf)), cdf_(std::move(cdf)), k_(k), n_(n) {
        if (k_ < 1 || k_ > n_) {
            throw config_error("order statistic index k=" + std::to_string(k_) +
                               " outside 1.." + std::to_string(n_));
        }
        if (pmf_.size() != cdf_.size() || pmf_.empty()) {
            throw config_error("order statistic: pmf/cdf tables misaligned");
        }
        for (std::size_t x = 0; x < pmf_.size(); ++x) {
            const double prev = x == 0 ? 0.0 : cdf_[x - 1];
            if (std::abs(cdf_[x] - prev - pmf_[x]) > 1e-9) {
                throw config_error(
                    "order statistic: pmf and cdf inconsistent at x=" +
                    std::to_string(x));
            }
        }
    }

    double pmf_at(int x) const {
        if (x < 0 || x >= int(pmf_.size())) return 0.0;
        return detail::order_stat_pmf_from_values(cdf_[std::size_t(x)],
                                                  pmf_[std::size_t(x)], n_, k_);
    }

    double cdf_at(int x) const {
        if (x < 0) return 0.0;
        if (x >= int(cdf_.size())) return 1.0;
        return detail::order_stat_cdf_from_value(cdf_[std::size_t(x)], n_, k_);
    }

  private:
    std::vector<double> pmf_;
    std::vector<double> cdf_;
    int k_;
    int n_;
};

inline DiscreteOrderStatistic order_stat_discrete(std::vector<double> pmf,
                                                  std::vector<double> cdf,
                                                  int k, int n) {
    return DiscreteOrderStatistic(std::move(pmf), std::move(cdf), k, n);
}

namespace detail {

// log-space pmf table of Bin(n, q).
inline std::vector<double> binomial_pmf_vector(int n, double q) {
    std::vector<double> pmf(std::size_t(n) + 1);
    for (int j = 0; j <= n; ++j) {
        pmf[std::size_t(j)] = binom_term(n, j, q, 1.0 - q);
    }
    return pmf;
}

}  // namespace detail

// Exact Binomial(n, q) pmf as a Pmf carrier.
inline Pmf binomial_pmf(int n, double q) {
    if (n < 0 || !(q >= 0.0 && q <= 1.0)) {
        throw config_error("binomial_pmf: invalid parameters");
    }
    Pmf out{detail::binomial_pmf_vector(n, q)};
    out.finalize();
    return out;
}

// Pr[rank-th smallest of a pooled two-population iid sample <= x], given
// the population CDF values u = F1(x), v = F2(x). This is the single-rank
// two-population reduction of the joint order-statistic CDF: summing the
// lambda-constrained products regroups into a convolution of the two
// per-population binomial counts at level x.
inline double two_population_order_cdf_from_values(double u, double v, int n1,
                                                   int n2, int rank) {
    const int m = n1 + n2;
    if (rank < 1 || rank > m) {
        throw config_error("two-population order statistic: rank " +
                           std::to_string(rank) + " outside 1.." +
                           std::to_string(m));
    }
    const std::vector<double> pop1 = detail::binomial_pmf_vector(n1, u);
    const std::vector<double> pop2 = detail::binomial_pmf_vector(n2, v);
    KahanSum acc;
    for (int j = rank; j <= m; ++j) {
        for (int l1 = std::max(0, j - n2); l1 <= std::min(n1, j); ++l1) {
            acc.add(pop1[std::size_t(l1)] * pop2[std::size_t(j - l1)]);
        }
    }
    return std::min(1.0, std::max(0.0, acc.value()));
}

template <typename Cdf1, typename Cdf2>
double two_population_order_cdf(const Cdf1& F_pop1, const Cdf2& F_pop2, int n1,
                                int n2, int rank, double x) {
    return two_population_order_cdf_from_values(F_pop1(x), F_pop2(x), n1, n2,
                                                rank);
}

// Pr[exactly a overlaps when z1 draws are taken without replacement from a
// population of m with z0 distinguished items]. Out-of-range a yields 0.
inline double hypergeometric_pmf(int m, int z0, int z1, int a) {
    if (z0 < 0 || z0 > m || z1 < 0 || z1 > m) {
        throw config_error("hypergeometric_pmf: need 0 <= z0, z1 <= m");
    }
    if (a < std::max(0, z0 + z1 - m) || a > std::min(z0, z1)) return 0.0;
    return std::exp(log_choose(z0, a) + log_choose(m - z0, z1 - a) -
                    log_choose(m, z1));
}

// True iff Y stochastically dominates X: CDF_Y <= CDF_X pointwise.
// Supports of different lengths are compared on their union.
inline bool stochastic_dominance(const Pmf& pmf_x, const Pmf& pmf_y) {
    const std::size_t len = std::max(pmf_x.masses.size(), pmf_y.masses.size());
    KahanSum fx, fy;
    for (std::size_t i = 0; i < len; ++i) {
        fx.add(pmf_x.mass(int(i)));
        fy.add(pmf_y.mass(int(i)));
        if (fy.value() > fx.value() + 1e-12) return false;
    }
    return true;
}

enum class TailDirection { at_least, at_most };

// log Pr[Bin(k, p) >= threshold] (or <=), summed with max-shifted
// log-sum-exp so tails spanning hundreds of orders of magnitude stay exact
// to full double precision.
inline double log_binomial_tail(int k, double p, int threshold,
                                TailDirection direction) {
    if (threshold < 0 || threshold > k) {
        throw config_error("log_binomial_tail: threshold outside 0..k");
    }
    const double lp = p > 0.0 ? std::log(p) : kNegInf;
    const double lq = p < 1.0 ? std::log1p(-p) : kNegInf;
    std::vector<double> terms;
    const int lo = direction == TailDirection::at_least ? threshold : 0;
    const int hi = direction == TailDirection::at_least ? k : threshold;
    terms.reserve(std::size_t(hi - lo) + 1);
    for (int j = lo; j <= hi; ++j) {
        double t = log_choose(k, j);
        t += (j == 0) ? 0.0 : double(j) * lp;
        t += (j == k) ? 0.0 : double(k - j) * lq;
        if ((j > 0 && p == 0.0) || (j < k && p == 1.0)) t = kNegInf;
        terms.push_back(t);
    }
    return std::min(0.0, log_sum_exp(terms));
}

}  // namespace apvote
