#include "tpg/core.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numeric>
#include <set>

#include "tpg/log.hpp"

namespace tpg {

namespace {
std::atomic<bool> g_warnings{true};
std::mutex g_warn_mutex;
}  // namespace

void set_warnings_enabled(bool enabled) { g_warnings = enabled; }

void warn_once(const std::string& message) {
    static std::set<std::string> seen;
    std::lock_guard lock(g_warn_mutex);
    if (!seen.insert(message).second || !g_warnings) return;
    std::cerr << "tpg: warning: " << message << '\n';
}

Params Params::make(int n, double X, double V, double p, double pi,
                    bool enforce_provider_profit) {
    if (!std::isfinite(X) || X <= 1.0) throw ConfigError("X", "threshold must exceed 1");
    const double fl = std::floor(X);
    if (X == fl) throw ConfigError("X", "threshold must not be an integer");
    Params out;
    out.m = static_cast<int>(fl);
    if (n < 2) throw ConfigError("n", "need at least two users");
    if (n < out.m + 1) throw ConfigError("n", "need n >= floor(X) + 1");
    if (!(V >= 0.0) || !std::isfinite(V)) throw ConfigError("V", "value must be finite and >= 0");
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("p", "subsidy must be finite and >= 0");
    if (!(pi > 0.0) || !std::isfinite(pi)) throw ConfigError("pi", "value share must be > 0");
    out.n = n;
    out.X = X;
    out.V = V;
    out.p = p;
    out.pi = pi;
    out.enforce_provider_profit = enforce_provider_profit;
    return out;
}

Params Params::with_value(double v) const {
    return make(n, X, v, p, pi, enforce_provider_profit);
}

Params Params::with_subsidy(double sub) const {
    return make(n, X, V, sub, pi, enforce_provider_profit);
}

double MechanismOutcome::aggregate() const {
    return std::accumulate(e.begin(), e.end(), 0.0);
}

bool MechanismOutcome::is_null() const {
    for (double v : e)
        if (v != 0.0) return false;
    return true;
}

double user_payoff(double c, double e, bool success, double V, double p) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("contribution outside [0,1]");
    return (success ? V : 0.0) + p * e - c * e * e / 2.0;
}

double provider_payoff(const MechanismOutcome& outcome, const Params& params) {
    const double paid = params.p * outcome.aggregate();
    return (outcome.success ? params.pi * params.V : 0.0) - paid;
}

double privacy_cost(std::span<const double> costs, std::span<const double> e) {
    double total = 0.0;
    for (std::size_t i = 0; i < costs.size(); ++i) total += costs[i] * e[i] * e[i] / 2.0;
    return total;
}

double social_welfare(std::span<const double> costs, const MechanismOutcome& outcome,
                      const Params& params) {
    const double benefit = outcome.success ? params.n * params.V : 0.0;
    return benefit - privacy_cost(costs, outcome.e);
}

bool reaches_threshold(double aggregate, double X) { return aggregate >= X - kEpsNum; }

MechanismOutcome make_outcome(std::span<const double> costs, std::vector<double> e,
                              const Params& params, int pool_size) {
    MechanismOutcome out;
    out.e = std::move(e);
    const double agg = out.aggregate();
    out.success = reaches_threshold(agg, params.X);
    out.privacy_cost_total = privacy_cost(costs, out.e);
    out.user_payoffs.resize(costs.size());
    for (std::size_t i = 0; i < costs.size(); ++i)
        out.user_payoffs[i] = user_payoff(costs[i], out.e[i], out.success, params.V, params.p);
    out.subsidy_paid = params.p * agg;
    out.provider_payoff = provider_payoff(out, params);
    out.backstop_pool_size = pool_size;
    return out;
}

MechanismOutcome null_outcome(std::span<const double> costs, const Params& params) {
    return make_outcome(costs, std::vector<double>(costs.size(), 0.0), params, 0);
}

}  // namespace tpg
