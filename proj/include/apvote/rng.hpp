#pragma once

// Counter-based random streams. A stream is keyed by (seed, trial, role),
// so any worker can reconstruct the generator for any trial without
// coordination; results are independent of scheduling and thread count.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace apvote {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::uint64_t trial, std::uint64_t role) {
        state_ = splitmix64(splitmix64(splitmix64(seed) ^ trial) ^
                            (role * 0xD1342543DE82EF95ULL));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    // Box-Muller without caching: two uniforms per draw, fixed consumption.
    double next_gaussian() {
        double u1 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t state_;
};

// Stream roles used by the election simulator.
enum class StreamRole : std::uint64_t {
    producer_types = 0,
    signals = 1,
    scores = 2,
};

inline RandomStream make_stream(std::uint64_t seed, std::uint64_t trial,
                                StreamRole role) {
    return RandomStream(seed, trial, static_cast<std::uint64_t>(role));
}

// Walker alias table: O(1) draws from a fixed discrete distribution.
// Used to sample per-candidate vote counts when their law is precomputed.
class AliasTable {
  public:
    explicit AliasTable(const std::vector<double>& pmf) {
        const std::size_t n = pmf.size();
        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        double total = 0.0;
        for (double w : pmf) total += w;
        std::vector<double> scaled(n);
        std::vector<std::size_t> small, large;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = pmf[i] / total * double(n);
            (scaled[i] < 1.0 ? small : large).push_back(i);
        }
        while (!small.empty() && !large.empty()) {
            const std::size_t s = small.back();
            small.pop_back();
            const std::size_t l = large.back();
            prob_[s] = scaled[s];
            alias_[s] = static_cast<std::uint32_t>(l);
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (std::size_t i : large) prob_[i] = 1.0;
        for (std::size_t i : small) prob_[i] = 1.0;
    }

    int sample(RandomStream& rng) const {
        const double u = rng.next_double() * double(prob_.size());
        auto i = static_cast<std::size_t>(u);
        if (i >= prob_.size()) i = prob_.size() - 1;
        const double frac = u - double(i);
        return frac < prob_[i] ? int(i) : int(alias_[i]);
    }

  private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

}  // namespace apvote
