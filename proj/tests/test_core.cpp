#include <doctest.h>

#include <cmath>
#include <random>

#include "tpg/core.hpp"

using namespace tpg;

namespace {

const CostVector kGoldenCosts{10.0, 40.0, 100.0};
const std::vector<double> kGoldenM{0.84166, 0.35834, 0.0005};

Params golden_params() { return Params::make(3, 1.2005, 3.5, 0.05); }

}  // namespace

TEST_CASE("params derive m and reject bad thresholds") {
    const auto p = Params::make(50, 10.5, 1.0, 0.1);
    CHECK(p.m == 10);
    CHECK(p.pi == 1.0);
    CHECK_FALSE(p.enforce_provider_profit);

    auto field_of = [](auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("none");
    };
    CHECK(field_of([] { Params::make(50, 10.0, 1.0, 0.1); }) == "X");
    CHECK(field_of([] { Params::make(50, 0.5, 1.0, 0.1); }) == "X");
    CHECK(field_of([] { Params::make(10, 10.5, 1.0, 0.1); }) == "n");
    CHECK(field_of([] { Params::make(50, 10.5, -1.0, 0.1); }) == "V");
    CHECK(field_of([] { Params::make(50, 10.5, 1.0, -0.1); }) == "p");
    CHECK(field_of([] { Params::make(50, 10.5, 1.0, 0.1, 0.0); }) == "pi");
    CHECK(Params::make(11, 10.5, 1.0, 0.1).n == 11);
}

TEST_CASE("user payoff") {
    CHECK(user_payoff(10.0, 0.0, false, 3.5, 0.05) == 0.0);
    const double expected = 3.5 + 0.05 * 0.84166 - 10.0 * 0.84166 * 0.84166 / 2.0;
    CHECK(user_payoff(10.0, 0.84166, true, 3.5, 0.05) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.00012).epsilon(0.05));
    // floor payoff p^2 / 2c
    CHECK(user_payoff(10.0, 0.005, false, 3.5, 0.05) == doctest::Approx(0.000125).epsilon(1e-12));
    CHECK_THROWS_AS(user_payoff(10.0, 1.5, true, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(user_payoff(10.0, -0.1, true, 1.0, 0.0), std::domain_error);
}

TEST_CASE("provider payoff") {
    const auto params = golden_params();
    CHECK(provider_payoff(null_outcome(kGoldenCosts, params), params) == 0.0);

    const auto m = make_outcome(kGoldenCosts, kGoldenM, params);
    CHECK(m.success);
    CHECK(m.provider_payoff == doctest::Approx(3.5 - 0.05 * 1.2005).epsilon(1e-12));
    CHECK(m.provider_payoff == doctest::Approx(3.43998).epsilon(1e-5));

    // floor profile with no provision leaks subsidy
    const auto leak = make_outcome(kGoldenCosts, {0.005, 0.00125, 0.0005}, params);
    CHECK_FALSE(leak.success);
    CHECK(leak.provider_payoff < 0.0);
    CHECK(leak.subsidy_paid == doctest::Approx(0.05 * 0.00675));
}

TEST_CASE("social welfare") {
    const auto params = golden_params();
    CHECK(social_welfare(kGoldenCosts, null_outcome(kGoldenCosts, params), params) == 0.0);

    const auto m = make_outcome(kGoldenCosts, kGoldenM, params);
    const double pc = 10.0 * 0.84166 * 0.84166 / 2 + 40.0 * 0.35834 * 0.35834 / 2 + 100.0 * 0.0005 * 0.0005 / 2;
    CHECK(m.privacy_cost_total == doctest::Approx(pc).epsilon(1e-12));
    CHECK(pc == doctest::Approx(6.1101).epsilon(1e-4));
    CHECK(social_welfare(kGoldenCosts, m, params) == doctest::Approx(4.3899).epsilon(1e-4));

    const auto zero_value = Params::make(3, 1.5, 0.0, 0.0);
    const auto full = make_outcome(kGoldenCosts, {1.0, 1.0, 0.0}, zero_value);
    CHECK(full.success);
    CHECK(social_welfare(kGoldenCosts, full, zero_value) < 0.0);
}

TEST_CASE("success flag uses the numerical slack") {
    CHECK(reaches_threshold(10.5, 10.5));
    CHECK(reaches_threshold(10.5 - 0.5e-9, 10.5));
    CHECK_FALSE(reaches_threshold(10.5 - 2e-9, 10.5));
}

TEST_CASE("transfers cancel in the welfare identity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const int n = 3 + static_cast<int>(rng() % 20);
        const double X = 1.0 + (n - 2) * u(rng) + 0.25;
        if (X == std::floor(X)) continue;
        const auto params = Params::make(n, X, 5.0 * u(rng), 0.7 * u(rng), 0.2 + 2.0 * u(rng));
        CostVector c(static_cast<std::size_t>(n));
        std::vector<double> e(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            c[static_cast<std::size_t>(i)] = 1.0 + 4.0 * u(rng);
            e[static_cast<std::size_t>(i)] = u(rng);
        }
        const auto out = make_outcome(c, e, params);
        double users = 0.0;
        for (double v : out.user_payoffs) users += v;
        const double benefit = out.success ? (n + params.pi) * params.V : 0.0;
        CHECK(users + out.provider_payoff ==
              doctest::Approx(benefit - privacy_cost(c, out.e)).epsilon(1e-10));
        CHECK(out.success == reaches_threshold(out.aggregate(), X));
    }
}
