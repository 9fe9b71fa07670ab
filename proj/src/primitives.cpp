#include "tpg/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tpg/core.hpp"

namespace tpg {

double floor_contribution(double c, double p) { return std::min(p / c, 1.0); }

double gamma_star(double c, double p, double d) {
    const double gap = c * d - p;
    return gap * gap / (2.0 * c);
}

double max_fill(double c, double V, double p) {
    return std::min(1.0, (p + std::sqrt(2.0 * c * V)) / c);
}

bool willing_to_retain(double c, double V, double p, double d) {
    return d <= max_fill(c, V, p) + kEpsNum;
}

namespace {

double clamp_to(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

double filled(const WaterFillProblem& pr, double level) {
    double total = 0.0;
    for (std::size_t j = 0; j < pr.costs.size(); ++j)
        total += clamp_to(level / pr.costs[j], pr.lower[j], pr.upper[j]);
    return total;
}

}  // namespace

WaterFillResult water_fill(const WaterFillProblem& pr) {
    const std::size_t k = pr.costs.size();
    if (pr.lower.size() != k || pr.upper.size() != k)
        throw std::invalid_argument("water_fill: bound arrays must match the cost array");
    double sum_lower = 0.0;
    double sum_upper = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (!(pr.costs[j] > 0.0)) throw std::invalid_argument("water_fill: costs must be positive");
        if (pr.lower[j] > pr.upper[j]) throw Infeasible("water_fill: lower bound above upper bound");
        sum_lower += pr.lower[j];
        sum_upper += pr.upper[j];
    }
    if (pr.demand < sum_lower - kEpsNum || pr.demand > sum_upper + kEpsNum)
        throw Infeasible("water_fill: demand outside [sum lower, sum upper]");

    WaterFillResult out;
    if (pr.demand <= sum_lower) {
        out.allocation = pr.lower;
        for (std::size_t j = 0; j < k; ++j) out.level = std::max(out.level, pr.costs[j] * pr.lower[j]);
        return out;
    }
    if (pr.demand >= sum_upper) {
        out.allocation = pr.upper;
        out.level = pr.costs.empty() ? 0.0 : pr.costs[0] * pr.upper[0];
        for (std::size_t j = 0; j < k; ++j) out.level = std::min(out.level, pr.costs[j] * pr.upper[j]);
        return out;
    }

    double lo = pr.costs[0] * pr.lower[0];
    double hi = pr.costs[0] * pr.upper[0];
    for (std::size_t j = 1; j < k; ++j) {
        lo = std::min(lo, pr.costs[j] * pr.lower[j]);
        hi = std::max(hi, pr.costs[j] * pr.upper[j]);
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (filled(pr, mid) < pr.demand)
            lo = mid;
        else
            hi = mid;
    }
    double level = 0.5 * (lo + hi);

    // Re-solve the level exactly on the free set found by bisection, so the
    // allocation sums to the demand up to rounding.
    double fixed = 0.0;
    double inv_cost_free = 0.0;
    std::vector<char> is_free(k, 0);
    for (std::size_t j = 0; j < k; ++j) {
        const double target = level / pr.costs[j];
        if (target > pr.lower[j] && target < pr.upper[j]) {
            is_free[j] = 1;
            inv_cost_free += 1.0 / pr.costs[j];
        } else {
            fixed += clamp_to(target, pr.lower[j], pr.upper[j]);
        }
    }
    if (inv_cost_free > 0.0) {
        const double exact = (pr.demand - fixed) / inv_cost_free;
        bool consistent = true;
        for (std::size_t j = 0; j < k && consistent; ++j) {
            const double target = exact / pr.costs[j];
            if (is_free[j])
                consistent = target >= pr.lower[j] - kEpsNum && target <= pr.upper[j] + kEpsNum;
            else if (level / pr.costs[j] <= pr.lower[j])
                consistent = target <= pr.lower[j] + kEpsNum;
            else
                consistent = target >= pr.upper[j] - kEpsNum;
        }
        if (consistent) level = exact;
    }

    out.level = level;
    out.allocation.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double bound_level = is_free[j] ? level : 0.5 * (lo + hi);
        out.allocation[j] = clamp_to(bound_level / pr.costs[j], pr.lower[j], pr.upper[j]);
    }
    // A single free coordinate takes the exact remainder.
    if (std::count(is_free.begin(), is_free.end(), 1) == 1) {
        const auto f = static_cast<std::size_t>(std::find(is_free.begin(), is_free.end(), 1) - is_free.begin());
        double others = 0.0;
        for (std::size_t j = 0; j < k; ++j)
            if (j != f) others += out.allocation[j];
        out.allocation[f] = clamp_to(pr.demand - others, pr.lower[f], pr.upper[f]);
    }
    return out;
}

}  // namespace tpg
