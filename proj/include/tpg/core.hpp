#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tpg {

/// Slack used for every comparison against the provision threshold.
inline constexpr double kEpsNum = 1e-9;

/// Raised when a parameter or configuration value is out of range.
/// `field()` names the offending field so front ends can report it.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Game constants. X must lie strictly between two integers; the integer
/// part m is derived, never passed in.
struct Params {
    int n = 50;
    double X = 10.5;
    int m = 10;
    double V = 0.0;
    double p = 0.0;
    double pi = 1.0;
    bool enforce_provider_profit = false;

    /// Validated construction. Throws ConfigError.
    static Params make(int n, double X, double V, double p, double pi = 1.0,
                       bool enforce_provider_profit = false);

    Params with_value(double v) const;
    Params with_subsidy(double sub) const;
};

/// Private costs of the n users.
using CostVector = std::vector<double>;

/// Per-draw result of running any mechanism.
struct MechanismOutcome {
    std::vector<double> e;
    bool success = false;
    double privacy_cost_total = 0.0;
    std::vector<double> user_payoffs;
    double provider_payoff = 0.0;
    double subsidy_paid = 0.0;
    int backstop_pool_size = 0;

    double aggregate() const;
    bool is_null() const;
};

/// V 1{success} + p e - c e^2 / 2. Throws std::domain_error if e is outside [0,1].
double user_payoff(double c, double e, bool success, double V, double p);

/// pi V 1{success} - p sum(e).
double provider_payoff(const MechanismOutcome& outcome, const Params& params);

/// n V 1{success} - sum c e^2 / 2, recomputed from (c, e).
double social_welfare(std::span<const double> costs, const MechanismOutcome& outcome,
                      const Params& params);

double privacy_cost(std::span<const double> costs, std::span<const double> e);

bool reaches_threshold(double aggregate, double X);

/// Assemble a fully accounted outcome from final retentions.
MechanismOutcome make_outcome(std::span<const double> costs, std::vector<double> e,
                              const Params& params, int pool_size = 0);

/// The null assignment: nobody contributes, nobody is paid.
MechanismOutcome null_outcome(std::span<const double> costs, const Params& params);

}  // namespace tpg
