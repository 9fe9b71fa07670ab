#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "tpg/core.hpp"
#include "tpg/dist.hpp"

namespace testing_support {

struct Instance {
    tpg::Params params;
    tpg::CostVector costs;
};

/// Random game: n in [3, 50], non-integer X with room for a pool, V in
/// [0, 6], p in [0, 0.8], costs from U[1,5], Beta(2,5) or Beta(5,2) on [1,5].
inline Instance random_instance(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 3 + static_cast<int>(rng() % 48);
    double X = 0.0;
    do {
        X = 1.0 + std::min(n - 2.0, 12.0) * u(rng) + 1e-3;
    } while (X == std::floor(X) || std::floor(X) + 1 > n);
    const double V = 6.0 * u(rng);
    const double p = 0.8 * u(rng) * u(rng);
    static const tpg::CostDistribution dists[] = {
        tpg::CostDistribution::uniform(1.0, 5.0),
        tpg::CostDistribution::scaled_beta(2.0, 5.0, 1.0, 5.0),
        tpg::CostDistribution::scaled_beta(5.0, 2.0, 1.0, 5.0),
    };
    const auto& dist = dists[rng() % 3];
    return {tpg::Params::make(n, X, V, p), dist.sample(rng, n)};
}

}  // namespace testing_support
