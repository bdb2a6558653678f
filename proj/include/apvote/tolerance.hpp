#pragma once

// Byzantine tolerance bookkeeping and the estimate carrier shared by the
// analytic and Monte Carlo paths.

#include <cmath>
#include <cstdint>
#include <string>

#include "apvote/errors.hpp"
#include "apvote/numeric.hpp"

namespace apvote {

// Exact rational, used for the tolerance fraction so that ceilings like
// ceil((1-rho)*k) never suffer floating-point fuzz (1/3 * 3 must be 1).
struct Rational {
    long long num = 1;
    long long den = 3;

    double value() const { return double(num) / double(den); }

    std::string str() const {
        return std::to_string(num) + "/" + std::to_string(den);
    }

    static Rational parse(const std::string& text) {
        const auto slash = text.find('/');
        try {
            if (slash != std::string::npos) {
                const long long n = std::stoll(text.substr(0, slash));
                const long long d = std::stoll(text.substr(slash + 1));
                if (d <= 0) throw config_error("rational denominator must be > 0");
                return Rational{n, d};
            }
            // Terminating decimal: scale by a power of ten.
            const auto dot = text.find('.');
            if (dot == std::string::npos) {
                return Rational{std::stoll(text), 1};
            }
            const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
            long long den = 1;
            for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
            return Rational{std::stoll(digits), den};
        } catch (const config_error&) {
            throw;
        } catch (const std::exception&) {
            throw config_error("cannot parse rational: '" + text + "'");
        }
    }
};

// Derived committee thresholds for tolerance fraction rho and size k:
//   honest_needed  = ceil((1-rho) * k)   members required for honesty
//   dishonest_cap  = ceil(rho * k)
//   adversary_need = floor(rho * k) + 1  seats that flip the committee
struct ToleranceSpec {
    Rational rho{1, 3};
    int committee_size = 0;
    int honest_needed = 0;
    int dishonest_cap = 0;
    int adversary_need = 0;

    static ToleranceSpec make(Rational rho, int k) {
        if (k < 1) throw config_error("committee size must be >= 1");
        if (!(rho.num > 0 && rho.num < rho.den)) {
            throw config_error("tolerance fraction must lie strictly in (0,1)");
        }
        ToleranceSpec t;
        t.rho = rho;
        t.committee_size = k;
        const long long floor_rk = (rho.num * k) / rho.den;
        t.honest_needed = int(k - floor_rk);
        t.dishonest_cap = int((rho.num * k + rho.den - 1) / rho.den);
        t.adversary_need = int(floor_rk + 1);
        return t;
    }
};

enum class EstimateMethod { exact, mc, bound };

inline std::string method_name(EstimateMethod m) {
    switch (m) {
        case EstimateMethod::exact: return "exact";
        case EstimateMethod::mc: return "mc";
        case EstimateMethod::bound: return "bound";
    }
    return "?";
}

// Point estimate with confidence interval; exact and bound methods carry a
// degenerate interval.
struct SuccessEstimate {
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    EstimateMethod method = EstimateMethod::exact;

    static SuccessEstimate exact(double v) {
        return SuccessEstimate{v, v, v, EstimateMethod::exact};
    }
    static SuccessEstimate bound(double v) {
        return SuccessEstimate{v, v, v, EstimateMethod::bound};
    }
};

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                double z = kZ99) {
    if (trials == 0) return Interval{0.0, 1.0};
    const double n = double(trials);
    const double phat = double(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = phat + z2 / (2.0 * n);
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    return Interval{std::max(0.0, (center - half) / denom),
                    std::min(1.0, (center + half) / denom)};
}

}  // namespace apvote
