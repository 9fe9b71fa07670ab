#pragma once

#include <random>
#include <string>
#include <string_view>

#include "tpg/core.hpp"

namespace tpg {

/// Regularized incomplete beta function I_x(a, b), continued-fraction form.
double regularized_incomplete_beta(double a, double b, double x);

/// Common cost law F on [low, high]: either uniform or a Beta(alpha, beta)
/// rescaled affinely onto the support.
class CostDistribution {
public:
    enum class Kind { uniform, scaled_beta };

    static CostDistribution uniform(double low, double high);
    static CostDistribution scaled_beta(double alpha, double beta, double low, double high);

    /// Parses "uniform:LO,HI" or "beta:A,B:LO,HI" ("beta:A,B" defaults to [1,5]).
    /// Throws ConfigError naming the "dist" field.
    static CostDistribution parse(std::string_view text);
    std::string to_string() const;

    Kind kind() const noexcept { return kind_; }
    double low() const noexcept { return low_; }
    double high() const noexcept { return high_; }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

    double pdf(double c) const;
    double cdf(double c) const;
    /// Throws std::domain_error for q outside [0,1].
    double inv_cdf(double q) const;
    /// Maps a unit-interval draw onto the support.
    double rescale(double u) const noexcept { return low_ + (high_ - low_) * u; }

    double sample_one(std::mt19937_64& rng) const;
    CostVector sample(std::mt19937_64& rng, int n) const;

    /// mu0(a) = E[min(p/c, 1) | c > a]. Closed form for uniform, adaptive
    /// quadrature otherwise. Throws std::domain_error if a is outside [low, high).
    double floor_mean_tail(double a, double p) const;

private:
    CostDistribution(Kind kind, double alpha, double beta, double low, double high);

    Kind kind_;
    double alpha_;
    double beta_;
    double low_;
    double high_;
    double log_norm_ = 0.0;  // log B(alpha, beta)
};

}  // namespace tpg
