#pragma once

// Worst-case committee resolution. Seats go to the k highest scores; every
// degree of freedom (ties at the cutoff, unfilled seats when fewer than k
// candidates received votes) is resolved against honesty. Candidates come
// from the existing pool only.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "apvote/errors.hpp"
#include "apvote/tolerance.hpp"

namespace apvote {

struct CommitteeResolution {
    std::vector<int> committee;  // seated candidate indices
    int honest_count = 0;
    bool is_honest = false;
};

// types[j] != 0 marks candidate j honest. Sorting by score descending
// with dishonest-first tie-breaking realizes the adversarial choice over
// all admissible top-k committees; zero-score fill falls out of the same
// ordering.
inline CommitteeResolution resolve_adversarial(std::span<const int> scores,
                                               std::span<const std::uint8_t> types,
                                               int k, const ToleranceSpec& tol) {
    const int m = int(scores.size());
    if (int(types.size()) != m) {
        throw config_error("resolve_adversarial: scores/types length mismatch");
    }
    if (k < 1 || k > m) {
        throw config_error("resolve_adversarial: need 1 <= k <= m");
    }
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[std::size_t(a)] != scores[std::size_t(b)]) {
            return scores[std::size_t(a)] > scores[std::size_t(b)];
        }
        if (types[std::size_t(a)] != types[std::size_t(b)]) {
            return types[std::size_t(a)] == 0;  // dishonest seated first on ties
        }
        return a < b;
    });

    CommitteeResolution out;
    out.committee.assign(order.begin(), order.begin() + k);
    std::sort(out.committee.begin(), out.committee.end());
    for (int j : out.committee) out.honest_count += types[std::size_t(j)] != 0;
    out.is_honest = out.honest_count >= tol.honest_needed;
    return out;
}

}  // namespace apvote
