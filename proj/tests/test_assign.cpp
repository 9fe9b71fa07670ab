#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tpg/assign.hpp"
#include "tpg/dist.hpp"
#include "tpg/primitives.hpp"
#include "tpg/protocols.hpp"

using namespace tpg;

namespace {

const CostVector kGolden{10.0, 40.0, 100.0};

Params golden(double V = 3.5) { return Params::make(3, 1.2005, V, 0.05); }

}  // namespace

TEST_CASE("golden instance pool") {
    const auto plan = build_pool(kGolden, golden());
    CHECK(plan.kind == PlanKind::backstop);
    CHECK(plan.pool == std::vector<std::size_t>{0, 1});
    CHECK(plan.pool_size() == 2);
    CHECK(plan.residual == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(std::fabs(plan.residual - 1.2) < 1e-9);
    CHECK(residual_demand(kGolden, golden(), 1) == doctest::Approx(1.19875).epsilon(1e-12));
    CHECK(residual_demand(kGolden, golden(), 1) > 1.0);
    CHECK(plan.targets[2] == doctest::Approx(0.0005));

    // order is by cost, not by index
    const CostVector shuffled{100.0, 10.0, 40.0};
    const auto s = build_pool(shuffled, golden());
    CHECK(s.pool == std::vector<std::size_t>{1, 2});
}

TEST_CASE("floor-only and null plans") {
    const auto rich = Params::make(3, 1.2005, 1.0, 2.0);
    const auto fo = build_pool(CostVector{1.0, 1.5, 2.0}, rich);
    CHECK(fo.kind == PlanKind::floor_only);
    CHECK(fo.pool.empty());
    CHECK(fo.targets == fo.floors);

    const auto n = null_plan(4);
    CHECK_FALSE(n.positive());
    CHECK(n.targets == std::vector<double>(4, 0.0));
}

TEST_CASE("null screen") {
    const auto params = golden();
    auto plan = build_pool(kGolden, params);
    const auto preview = plan.targets;
    CHECK_FALSE(null_or_assign(plan, false, preview, params).positive());
    CHECK(null_or_assign(plan, true, preview, params).positive());

    // Golden instance: S is infeasible at V = 3.5, M is not.
    CHECK_FALSE(s_outcome(kGolden, params).plan.positive());
    CHECK(m_outcome(kGolden, params).plan.positive());

    // Provider profitability: pi V must cover p sum(e).
    auto screened = Params::make(3, 1.2005, 3.5, 0.05, 1.0, true);
    CHECK(null_or_assign(plan, true, preview, screened).positive());
    screened.pi = 0.0;  // bypasses validation on purpose
    CHECK_FALSE(null_or_assign(plan, true, preview, screened).positive());
    auto costly = Params::make(3, 1.2005, 0.01, 0.05, 1.0, true);
    CHECK_FALSE(null_or_assign(plan, true, std::vector<double>{0.84, 0.36, 0.0005}, costly).positive());
}

TEST_CASE("pool invariants on random draws") {
    std::mt19937_64 rng(5);
    const auto dist = CostDistribution::uniform(1.0, 5.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 5000; ++t) {
        const int n = 3 + static_cast<int>(rng() % 48);
        const double X = 1.0 + (n - 2) * u(rng) + 0.01;
        if (X == std::floor(X)) continue;
        const auto params = Params::make(n, X, 5.0 * u(rng), 0.7 * u(rng));
        const auto costs = dist.sample(rng, n);
        const auto plan = build_pool(costs, params);
        if (plan.kind != PlanKind::backstop) continue;
        const int k = plan.pool_size();
        CHECK(plan.residual <= k + 1e-12);
        CHECK(plan.residual > k - 1);
        if (k > 1) CHECK(residual_demand(costs, params, k - 1) > k - 1);
        CHECK(plan.residual + plan.outside_floor == doctest::Approx(X).epsilon(1e-12));
        // every pool member is no costlier than every outsider
        double worst_in = 0.0;
        for (auto i : plan.pool) worst_in = std::max(worst_in, costs[i]);
        for (std::size_t i = 0; i < costs.size(); ++i)
            if (std::find(plan.pool.begin(), plan.pool.end(), i) == plan.pool.end())
                CHECK(costs[i] >= worst_in);

        // Targets attached by a protocol sum to X exactly.
        const auto s = s_outcome(costs, params);
        if (s.plan.kind == PlanKind::backstop) {
            const double total = std::accumulate(s.plan.targets.begin(), s.plan.targets.end(), 0.0);
            CHECK(std::fabs(total - X) < 1e-9);
        }
        const auto m = m_outcome(costs, params);
        if (m.plan.kind == PlanKind::backstop) {
            const double total = std::accumulate(m.plan.targets.begin(), m.plan.targets.end(), 0.0);
            CHECK(std::fabs(total - X) < 1e-9);
        }
    }
}

TEST_CASE("adding a cheaper user never raises the residual demand") {
    std::mt19937_64 rng(6);
    const auto dist = CostDistribution::uniform(1.0, 5.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const int n = 5 + static_cast<int>(rng() % 40);
        const auto params = Params::make(n + 1, 3.5, 1.0, 0.6 * u(rng));
        auto costs = dist.sample(rng, n);
        const int k = 1 + static_cast<int>(rng() % 4);
        const double before = residual_demand(costs, params, k);
        const double cheapest = *std::min_element(costs.begin(), costs.end());
        costs.push_back(1.0 + (cheapest - 1.0) * u(rng));
        CHECK(residual_demand(costs, params, k) <= before + 1e-12);
    }
}
