#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "tpg/core.hpp"
#include "tpg/dist.hpp"

namespace tpg {

// Subsidy-only mechanism C: floor profile, productive cutoff equilibrium
// search, and per-draw play.

class InvalidCutoff : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct CutoffSolution {
    double a_star = 0.0;   // cutoff cost
    double q_star = 0.0;   // participation probability F(a_star)
    double g_tilde = 0.0;  // participation contribution
    double phi_value = 0.0;
};

enum class PivotalMode { closed_form, monte_carlo };

struct CutoffSearch {
    int grid_size = 40;
    PivotalMode mode = PivotalMode::closed_form;
    int mc_draws = 10000;  // auxiliary draws per candidate in monte_carlo mode
    std::uint64_t mc_seed = 0;
    /// Replace the selected grid candidate by the exact root of Phi on the
    /// branch above the binomial peak, when that root lies within the belief cap.
    bool refine_root = false;
};

/// Participation contribution calibrated so the expected aggregate hits X
/// when exactly m others participate. No validity check.
double g_tilde_raw(double a, const Params& params, const CostDistribution& dist);

/// Same as g_tilde_raw but throws InvalidCutoff unless floor(a) < g <= 1.
double calibrate_g_tilde(double a, const Params& params, const CostDistribution& dist);

/// Binomial pmf C(n-1, m) q^m (1-q)^(n-1-m), evaluated in log space.
double pivotal_prob_q(double q, int n, int m);
double pivotal_prob(double a, const Params& params, const CostDistribution& dist);

/// Net participation gain V dB(a) - Gamma*(a, p, g(a)). Propagates InvalidCutoff.
double phi(double a, const Params& params, const CostDistribution& dist);
double phi_with_pivotal(double a, double pivotal, const Params& params,
                        const CostDistribution& dist);

/// Monte Carlo estimate of the pivotal probability: the fraction of
/// `draws` samples of n-1 costs in which exactly m fall at or below a.
double pivotal_prob_mc(double a, const Params& params, const CostDistribution& dist, int draws,
                       std::uint64_t seed);

/// Cost at which the binomial pivotal term peaks: F^{-1}(m / (n-1)).
double binomial_peak_cutoff(const Params& params, const CostDistribution& dist);

/// Root of Phi on (peak, high) by bisection, if Phi changes sign there.
std::optional<double> cutoff_root(const Params& params, const CostDistribution& dist);

/// Grid search over q in (0, b0]: the candidate with the largest
/// nonnegative Phi, or nullopt when none exists (always nullopt for b0 = 0).
std::optional<CutoffSolution> select_cutoff(const Params& params, const CostDistribution& dist,
                                            double b0, const CutoffSearch& search = {});

/// One draw of mechanism C. Floors succeed on their own when they reach X;
/// otherwise the cutoff profile is applied if a cutoff was selected.
MechanismOutcome play_c(std::span<const double> costs,
                        const std::optional<CutoffSolution>& cutoff, const Params& params);

}  // namespace tpg
