#pragma once

// Signal generation and Bayesian posteriors. A voter observes, for each
// candidate producer, a Gaussian signal centered at a type-dependent base
// value; everything downstream works with the posterior probability that
// the producer is honest given the signal(s).

#include <cmath>
#include <span>
#include <string>

#include "apvote/errors.hpp"
#include "apvote/numeric.hpp"
#include "apvote/rng.hpp"

namespace apvote {

enum class ProducerType { honest, malicious };

struct SignalParams {
    double prior_honest = 0.5;   // p, a-priori honesty probability
    double base_honest = 1.0;    // signal center for honest producers
    double base_malicious = 0.0; // signal center for malicious producers
    double noise_sd = 1.0;       // per-voter noise scale

    void validate() const {
        if (!(prior_honest > 0.0 && prior_honest < 1.0)) {
            throw config_error("prior_honest must lie strictly in (0,1)");
        }
        if (!(noise_sd > 0.0)) {
            throw config_error("noise_sd must be > 0");
        }
        if (!(base_honest >= base_malicious)) {
            throw config_error("base_honest must be >= base_malicious");
        }
    }

    // base_honest == base_malicious is the degenerate regime where signals
    // carry no information.
    bool informative() const { return base_honest > base_malicious; }

    double base(ProducerType t) const {
        return t == ProducerType::honest ? base_honest : base_malicious;
    }

    SignalParams with_noise_sd(double sd) const {
        SignalParams out = *this;
        out.noise_sd = sd;
        return out;
    }
};

struct RawSignal {
    double value = 0.0;
};

struct PosteriorSignal {
    double value = 0.5;
};

// Posteriors are clamped strictly inside (0,1) so downstream log terms
// never hit a singularity.
inline constexpr double kPosteriorClamp = 1e-15;

inline double clamp_probability(double q) {
    return std::min(1.0 - kPosteriorClamp, std::max(kPosteriorClamp, q));
}

inline RawSignal sample_signal(ProducerType type, const SignalParams& params,
                               RandomStream& rng) {
    params.validate();
    return RawSignal{params.base(type) + params.noise_sd * rng.next_gaussian()};
}

namespace detail {

// Quadratic-difference exponent of the honest-vs-malicious likelihood
// ratio for one signal.
inline double likelihood_exponent(double s_star, const SignalParams& p,
                                  double noise_sd) {
    const double dh = s_star - p.base_honest;
    const double dm = s_star - p.base_malicious;
    return (dh * dh - dm * dm) / (2.0 * noise_sd * noise_sd);
}

// 1 / (1 + exp(L)) with a stable branch on the sign of L.
inline double stable_logistic(double log_odds_against) {
    if (log_odds_against >= 0.0) {
        const double e = std::exp(-log_odds_against);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(log_odds_against));
}

}  // namespace detail

// Posterior honesty probability given one raw signal. In the degenerate
// uninformative regime the prior is returned unchanged.
inline PosteriorSignal posterior(RawSignal s_star, const SignalParams& params) {
    params.validate();
    if (!params.informative()) {
        return PosteriorSignal{clamp_probability(params.prior_honest)};
    }
    const double log_prior_odds_against =
        std::log1p(-params.prior_honest) - std::log(params.prior_honest);
    const double exponent =
        detail::likelihood_exponent(s_star.value, params, params.noise_sd);
    return PosteriorSignal{
        clamp_probability(detail::stable_logistic(log_prior_odds_against + exponent))};
}

// Inverse of the signal -> posterior map. Only defined for informative
// parameters; the map is constant when base_honest == base_malicious.
inline RawSignal posterior_inverse(double q, const SignalParams& params) {
    params.validate();
    if (!params.informative()) {
        throw config_error(
            "uninformative-signals: posterior map is not invertible when "
            "base_honest == base_malicious");
    }
    if (!(q > 0.0 && q < 1.0)) {
        throw config_error("posterior_inverse: q must lie strictly in (0,1)");
    }
    const double p = params.prior_honest;
    const double ph = params.base_honest;
    const double pm = params.base_malicious;
    const double s2 = params.noise_sd * params.noise_sd;
    const double log_term =
        std::log(p) + std::log1p(-q) - std::log1p(-p) - std::log(q);
    return RawSignal{(ph * ph - pm * pm - 2.0 * s2 * log_term) /
                     (2.0 * (ph - pm))};
}

// pdf / cdf of the posterior conditioned on the producer's type.
class PosteriorConditional {
  public:
    PosteriorConditional(ProducerType type, const SignalParams& params)
        : type_(type), params_(params) {
        params_.validate();
        if (!params_.informative()) {
            throw config_error(
                "uninformative-signals: conditional posterior distribution "
                "degenerates to a point mass at the prior");
        }
    }

    double pdf(double x) const {
        check_domain(x);
        const double ph = params_.base_honest;
        const double pm = params_.base_malicious;
        const double sigma = params_.noise_sd;
        const double gap = ph - pm;
        const double log_term = prior_log_term(x);
        const double sign = type_ == ProducerType::honest ? 1.0 : -1.0;
        const double arg = (gap * gap + sign * 2.0 * sigma * sigma * log_term) /
                           (2.0 * std::numbers::sqrt2 * sigma * gap);
        return sigma /
               (std::sqrt(2.0 * std::numbers::pi) * x * (1.0 - x) * gap) *
               std::exp(-arg * arg);
    }

    double cdf(double x) const {
        check_domain(x);
        const double h_inv = posterior_inverse(x, params_).value;
        return normal_cdf((h_inv - params_.base(type_)) / params_.noise_sd);
    }

  private:
    void check_domain(double x) const {
        if (!(x > 0.0 && x < 1.0)) {
            throw config_error(
                "posterior conditional distribution: x outside (0,1)");
        }
    }

    double prior_log_term(double x) const {
        const double p = params_.prior_honest;
        return std::log(p) + std::log1p(-x) - std::log1p(-p) - std::log(x);
    }

    ProducerType type_;
    SignalParams params_;
};

inline PosteriorConditional posterior_conditional_distribution(
    ProducerType type, const SignalParams& params) {
    return PosteriorConditional(type, params);
}

// Posterior given several conditionally independent signals about the same
// producer, each with its own noise scale.
inline PosteriorSignal pooled_posterior(std::span<const RawSignal> raw_signals,
                                        std::span<const double> noise_sds,
                                        const SignalParams& params) {
    params.validate();
    if (raw_signals.empty()) {
        throw config_error("pooled_posterior: empty signal list");
    }
    if (raw_signals.size() != noise_sds.size()) {
        throw config_error("pooled_posterior: signal/noise lists differ in length");
    }
    if (!params.informative()) {
        return PosteriorSignal{clamp_probability(params.prior_honest)};
    }
    KahanSum exponent;
    for (std::size_t i = 0; i < raw_signals.size(); ++i) {
        if (!(noise_sds[i] > 0.0)) {
            throw config_error("pooled_posterior: noise_sd must be > 0");
        }
        exponent.add(
            detail::likelihood_exponent(raw_signals[i].value, params, noise_sds[i]));
    }
    const double log_prior_odds_against =
        std::log1p(-params.prior_honest) - std::log(params.prior_honest);
    return PosteriorSignal{clamp_probability(
        detail::stable_logistic(log_prior_odds_against + exponent.value()))};
}

}  // namespace apvote
