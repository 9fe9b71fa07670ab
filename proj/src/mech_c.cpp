#include "tpg/mech_c.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "tpg/primitives.hpp"

namespace tpg {

double g_tilde_raw(double a, const Params& params, const CostDistribution& dist) {
    const double mu0 = dist.floor_mean_tail(a, params.p);
    return (params.X - (params.n - 1 - params.m) * mu0) / (params.m + 1);
}

namespace {

bool in_band(double a, double g, double p) { return g > floor_contribution(a, p) && g <= 1.0; }

}  // namespace

double calibrate_g_tilde(double a, const Params& params, const CostDistribution& dist) {
    const double g = g_tilde_raw(a, params, dist);
    if (!in_band(a, g, params.p)) throw InvalidCutoff("participation contribution outside (floor, 1]");
    return g;
}

double pivotal_prob_q(double q, int n, int m) {
    const int others = n - 1;
    const int rest = others - m;
    if (m < 0 || rest < 0) return 0.0;
    if (q <= 0.0) return m == 0 ? 1.0 : 0.0;
    if (q >= 1.0) return rest == 0 ? 1.0 : 0.0;
    const double log_choose =
        std::lgamma(others + 1.0) - std::lgamma(m + 1.0) - std::lgamma(rest + 1.0);
    return std::exp(log_choose + m * std::log(q) + rest * std::log1p(-q));
}

double pivotal_prob(double a, const Params& params, const CostDistribution& dist) {
    return pivotal_prob_q(dist.cdf(a), params.n, params.m);
}

double phi_with_pivotal(double a, double pivotal, const Params& params,
                        const CostDistribution& dist) {
    const double g = calibrate_g_tilde(a, params, dist);
    return params.V * pivotal - gamma_star(a, params.p, g);
}

double phi(double a, const Params& params, const CostDistribution& dist) {
    return phi_with_pivotal(a, pivotal_prob(a, params, dist), params, dist);
}

double pivotal_prob_mc(double a, const Params& params, const CostDistribution& dist, int draws,
                       std::uint64_t seed) {
    if (draws <= 0) return 0.0;
    std::mt19937_64 rng(seed);
    int hits = 0;
    for (int r = 0; r < draws; ++r) {
        int below = 0;
        for (int j = 0; j < params.n - 1; ++j)
            if (dist.sample_one(rng) <= a) ++below;
        if (below == params.m) ++hits;
    }
    return static_cast<double>(hits) / draws;
}

double binomial_peak_cutoff(const Params& params, const CostDistribution& dist) {
    return dist.inv_cdf(static_cast<double>(params.m) / (params.n - 1));
}

std::optional<double> cutoff_root(const Params& params, const CostDistribution& dist) {
    // Outside the admissible band participation is impossible (g > 1) or
    // meaningless (g at or below the floor); both count as a negative gain.
    auto gain = [&](double a) {
        const double g = g_tilde_raw(a, params, dist);
        if (!in_band(a, g, params.p)) return -std::numeric_limits<double>::infinity();
        return params.V * pivotal_prob(a, params, dist) - gamma_star(a, params.p, g);
    };
    double lo = binomial_peak_cutoff(params, dist);
    double hi = std::nextafter(dist.high(), dist.low());
    if (!(lo < hi)) return std::nullopt;
    if (!(gain(lo) >= 0.0) || gain(hi) >= 0.0) return std::nullopt;
    for (int iter = 0; iter < 200 && hi - lo > 1e-14 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (gain(mid) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::optional<CutoffSolution> select_cutoff(const Params& params, const CostDistribution& dist,
                                            double b0, const CutoffSearch& search) {
    if (!(b0 > 0.0) || search.grid_size < 1) return std::nullopt;
    std::optional<CutoffSolution> best;
    for (int i = 1; i <= search.grid_size; ++i) {
        const double q = b0 * i / search.grid_size;
        if (q >= 1.0) continue;
        const double a = dist.inv_cdf(q);
        if (a >= dist.high()) continue;
        const double g = g_tilde_raw(a, params, dist);
        if (!in_band(a, g, params.p)) continue;
        const double pivotal =
            search.mode == PivotalMode::closed_form
                ? pivotal_prob(a, params, dist)
                : pivotal_prob_mc(a, params, dist, search.mc_draws,
                                  search.mc_seed + 0x9E3779B97F4A7C15ULL * i);
        const double value = params.V * pivotal - gamma_star(a, params.p, g);
        if (value >= 0.0 && (!best || value > best->phi_value))
            best = CutoffSolution{a, dist.cdf(a), g, value};
    }
    if (best && search.refine_root) {
        if (auto root = cutoff_root(params, dist)) {
            const double q = dist.cdf(*root);
            const double g = g_tilde_raw(*root, params, dist);
            if (q <= b0 && in_band(*root, g, params.p))
                best = CutoffSolution{*root, q, g, phi(*root, params, dist)};
        }
    }
    return best;
}

MechanismOutcome play_c(std::span<const double> costs,
                        const std::optional<CutoffSolution>& cutoff, const Params& params) {
    std::vector<double> e(costs.size());
    double floors = 0.0;
    for (std::size_t i = 0; i < costs.size(); ++i) {
        e[i] = floor_contribution(costs[i], params.p);
        floors += e[i];
    }
    if (!reaches_threshold(floors, params.X) && cutoff) {
        // A participant whose floor already exceeds the calibrated share keeps the floor.
        for (std::size_t i = 0; i < costs.size(); ++i)
            if (costs[i] <= cutoff->a_star) e[i] = std::max(cutoff->g_tilde, e[i]);
    }
    return make_outcome(costs, std::move(e), params, 0);
}

}  // namespace tpg
