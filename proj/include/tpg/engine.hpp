#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tpg/core.hpp"
#include "tpg/dist.hpp"
#include "tpg/mech_c.hpp"
#include "tpg/protocols.hpp"

namespace tpg {

// Monte Carlo sweeps over the (V, p) grid. Every draw is seeded from
// (master_seed, v index, p index, draw index), so results do not depend on
// the number of worker threads or on the order cells are visited.

struct SweepConfig {
    int n = 50;
    double X = 10.5;
    double pi = 1.0;
    bool enforce_provider_profit = false;
    std::vector<double> v_grid;
    std::vector<double> p_grid;
    int n_mc = 1000;
    std::uint64_t master_seed = 0;
    CostDistribution dist = CostDistribution::uniform(1.0, 5.0);
    double b0 = 0.15;
    double tau = 0.0;
    std::vector<Protocol> mechanisms{Protocol::C, Protocol::S, Protocol::M};
    CutoffSearch cutoff;
    /// Masked cost-efficiency (needs S and M) and Pareto (needs C and M) statistics.
    bool diagnostics = false;
    /// Minimum common-success draws before the masked cost gap is reported.
    int min_common = 30;
    /// Keep every k-th draw's record (0 keeps none).
    int record_stride = 0;
    /// Worker threads for sweep(); 0 means hardware concurrency.
    int threads = 1;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    Params params_at(double v, double p) const;
};

/// Counter-based stream derivation: SplitMix64 finalizer folded over the keys.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                       std::uint64_t d = 0);

/// Multiplicative lognormal observation noise c exp(eta), eta ~ N(0, tau^2).
/// tau = 0 returns the input unchanged without touching the stream.
CostVector apply_noise(std::span<const double> costs_true, double tau, std::mt19937_64& stream);

struct MechStats {
    Protocol mechanism = Protocol::C;
    int n_mc = 0;
    int successes = 0;
    double success_prob = 0.0;
    double se = 0.0;
    double ci95_half = 0.0;
    double welfare_mean = 0.0;
    double welfare_se = 0.0;
    double mean_subsidy = 0.0;
    double mean_privacy_cost = 0.0;
    /// Draws that failed yet collected contributions (subsidy leakage when p > 0).
    int failed_with_contribution = 0;
    /// pool_hist[k] = draws whose provider built a pool of size k.
    std::vector<int> pool_hist;
};

/// Success probability estimate and its standard errors from a count.
void set_success_estimates(MechStats& stats, int successes, int n_mc);

struct PairedDiff {
    Protocol first = Protocol::M;
    Protocol second = Protocol::S;
    double success_diff = 0.0;  // first minus second
    double success_se = 0.0;
    double welfare_diff = 0.0;
    double welfare_se = 0.0;
};

struct CostEffDraw {
    bool s_success = false;
    bool m_success = false;
    int pool_size = 0;
    double privacy_cost_s = 0.0;
    double privacy_cost_m = 0.0;
};

struct CostEfficiency {
    double prob_s_multi = 0.0;  // Pr(S succeeds, k >= 2)
    double prob_m_multi = 0.0;  // Pr(M succeeds, k >= 2)
    std::optional<double> gap;  // mean(PC_M - PC_S) on common successes
    int common_count = 0;
};

CostEfficiency masked_cost_efficiency(std::span<const CostEffDraw> draws, int min_common);

struct ParetoDraw {
    std::vector<double> payoff_c;
    std::vector<double> payoff_m;
};

struct ParetoStats {
    double frac_no_worse = 0.0;
    double mean_share_worse = 0.0;
    double mean_compensation = 0.0;
};

ParetoStats pareto_diagnostics(std::span<const ParetoDraw> draws);

struct DrawRecord {
    int draw = 0;
    CostVector costs;
    CostVector observed;
    /// Indexed by Protocol; empty for mechanisms not evaluated.
    std::array<std::optional<MechanismOutcome>, 4> outcomes;
    std::array<double, 4> welfare{};
};

struct CellStats {
    int v_index = 0;
    int p_index = 0;
    double v = 0.0;
    double p = 0.0;
    int n_mc = 0;
    std::optional<CutoffSolution> cutoff;
    std::vector<MechStats> mechs;
    std::vector<PairedDiff> pairs;
    std::optional<CostEfficiency> cost_efficiency;
    std::optional<ParetoStats> pareto;
    std::vector<DrawRecord> records;

    const MechStats* find(Protocol mechanism) const;
    const MechStats& at(Protocol mechanism) const;
};

CellStats run_cell(int v_index, int p_index, const SweepConfig& config);

/// Row-major over v then p.
std::vector<CellStats> sweep(const SweepConfig& config);

}  // namespace tpg
