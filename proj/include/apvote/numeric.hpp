#pragma once

// Shared numeric kernels: compensated summation, log-space combinatorics,
// the standard normal distribution and adaptive Simpson quadrature.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "apvote/errors.hpp"

namespace apvote {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Kahan-Neumaier compensated accumulator.
class KahanSum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// log(exp(a) + exp(b)) without overflow; tolerates -inf inputs.
inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

// Max-shifted log-sum-exp of a term list.
inline double log_sum_exp(std::span<const double> terms) {
    double m = kNegInf;
    for (double t : terms) m = std::max(m, t);
    if (m == kNegInf) return kNegInf;
    KahanSum s;
    for (double t : terms) s.add(std::exp(t - m));
    return m + std::log(s.value());
}

// log C(n, k) via log-gamma; 0 <= k <= n assumed by callers.
inline double log_choose(long long n, long long k) {
    if (k < 0 || k > n) return kNegInf;
    if (k == 0 || k == n) return 0.0;
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

// q^j computed through logs, with the 0^0 = 1 convention.
inline double pow_or_one(double q, long long j) {
    if (j == 0) return 1.0;
    if (q <= 0.0) return 0.0;
    return std::exp(double(j) * std::log(q));
}

// C(n,j) * u^j * v^(n-j), evaluated in log space. Every such term is a
// probability-like quantity in [0,1] when u + v <= 1.
inline double binom_term(long long n, long long j, double u, double v) {
    if (j < 0 || j > n) return 0.0;
    if (u <= 0.0) return j == 0 ? pow_or_one(v, n) : 0.0;
    if (v <= 0.0) return j == n ? pow_or_one(u, n) : 0.0;
    return std::exp(log_choose(n, j) + double(j) * std::log(u) +
                    double(n - j) * std::log(v));
}

inline double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

// 99% two-sided normal quantile used by Wilson intervals.
inline constexpr double kZ99 = 2.5758293035489004;

namespace detail {

inline double simpson_rule(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double m, double b,
                            double fa, double fm, double fb, double whole,
                            double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_rule(fa, flm, fm, m - a);
    const double right = simpson_rule(fm, frm, fb, b - m);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    if (depth <= 0) {
        throw numeric_instability_error(
            "adaptive quadrature failed to converge on [" + std::to_string(a) +
            ", " + std::to_string(b) + "], residual " + std::to_string(delta));
    }
    return adaptive_simpson_rec(f, a, lm, m, fa, flm, fm, left, tol / 2.0,
                                depth - 1) +
           adaptive_simpson_rec(f, m, rm, b, fm, frm, fb, right, tol / 2.0,
                                depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature with an absolute tolerance. The interval is
// pre-split so narrow features away from the midpoint are not missed.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double abs_tol,
                        int max_depth = 48, int initial_splits = 16) {
    if (!(b > a)) return 0.0;
    const double h = (b - a) / initial_splits;
    KahanSum total;
    for (int i = 0; i < initial_splits; ++i) {
        const double x0 = a + i * h;
        const double x1 = (i + 1 == initial_splits) ? b : x0 + h;
        const double xm = 0.5 * (x0 + x1);
        const double f0 = f(x0), fm = f(xm), f1 = f(x1);
        const double whole = detail::simpson_rule(f0, fm, f1, x1 - x0);
        total.add(detail::adaptive_simpson_rec(f, x0, xm, x1, f0, fm, f1,
                                               whole, abs_tol / initial_splits,
                                               max_depth));
    }
    return total.value();
}

}  // namespace apvote
