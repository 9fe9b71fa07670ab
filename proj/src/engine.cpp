#include "tpg/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace tpg {

namespace {

constexpr std::uint64_t kNoiseStream = 0x6E6F697365ULL;  // "noise"

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::size_t slot(Protocol mechanism) { return static_cast<std::size_t>(mechanism); }

// Streaming sample mean and variance.
struct Moments {
    long long count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }
    double se() const {
        if (count < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(count - 1)) / std::sqrt(static_cast<double>(count));
    }
};

struct MechAccumulator {
    int successes = 0;
    Moments welfare;
    double subsidy = 0.0;
    double privacy = 0.0;
    int failed_with_contribution = 0;
    std::vector<int> pool_hist;
};

}  // namespace

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                       std::uint64_t d) {
    std::uint64_t h = splitmix(master);
    h = splitmix(h ^ a);
    h = splitmix(h ^ b);
    h = splitmix(h ^ c);
    return splitmix(h ^ d);
}

void SweepConfig::validate() const {
    Params::make(n, X, 0.0, 0.0, pi, enforce_provider_profit);
    if (v_grid.empty()) throw ConfigError("grid-v", "grid is empty");
    if (p_grid.empty()) throw ConfigError("grid-p", "grid is empty");
    for (std::size_t i = 1; i < v_grid.size(); ++i)
        if (!(v_grid[i] > v_grid[i - 1])) throw ConfigError("grid-v", "grid must be strictly increasing");
    for (std::size_t i = 1; i < p_grid.size(); ++i)
        if (!(p_grid[i] > p_grid[i - 1])) throw ConfigError("grid-p", "grid must be strictly increasing");
    if (v_grid.front() < 0.0) throw ConfigError("grid-v", "values must be >= 0");
    if (p_grid.front() < 0.0) throw ConfigError("grid-p", "subsidies must be >= 0");
    if (n_mc < 1) throw ConfigError("draws", "need at least one draw per cell");
    if (!(b0 >= 0.0 && b0 <= 1.0)) throw ConfigError("b0", "belief cap must lie in [0,1]");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ConfigError("tau", "noise level must be >= 0");
    if (mechanisms.empty()) throw ConfigError("mech", "no mechanisms selected");
    if (cutoff.grid_size < 1) throw ConfigError("cutoff-grid", "grid size must be >= 1");
    if (threads < 0) throw ConfigError("threads", "thread count must be >= 0");
    if (min_common < 1) throw ConfigError("min-common", "must be >= 1");
}

Params SweepConfig::params_at(double v, double p) const {
    return Params::make(n, X, v, p, pi, enforce_provider_profit);
}

CostVector apply_noise(std::span<const double> costs_true, double tau, std::mt19937_64& stream) {
    CostVector out(costs_true.begin(), costs_true.end());
    if (tau == 0.0) return out;
    std::normal_distribution<double> eta(0.0, tau);
    for (auto& c : out) c *= std::exp(eta(stream));
    return out;
}

void set_success_estimates(MechStats& stats, int successes, int n_mc) {
    stats.n_mc = n_mc;
    stats.successes = successes;
    stats.success_prob = static_cast<double>(successes) / n_mc;
    stats.se = std::sqrt(stats.success_prob * (1.0 - stats.success_prob) / n_mc);
    stats.ci95_half = 1.96 * stats.se;
}

CostEfficiency masked_cost_efficiency(std::span<const CostEffDraw> draws, int min_common) {
    CostEfficiency out;
    if (draws.empty()) return out;
    int s_multi = 0;
    int m_multi = 0;
    double gap_sum = 0.0;
    for (const auto& d : draws) {
        if (d.pool_size >= 2) {
            s_multi += d.s_success;
            m_multi += d.m_success;
        }
        if (d.s_success && d.m_success) {
            ++out.common_count;
            gap_sum += d.privacy_cost_m - d.privacy_cost_s;
        }
    }
    const auto total = static_cast<double>(draws.size());
    out.prob_s_multi = s_multi / total;
    out.prob_m_multi = m_multi / total;
    if (out.common_count > 0 && out.common_count >= min_common) out.gap = gap_sum / out.common_count;
    return out;
}

ParetoStats pareto_diagnostics(std::span<const ParetoDraw> draws) {
    ParetoStats out;
    if (draws.empty()) return out;
    double no_worse = 0.0;
    double share = 0.0;
    double comp = 0.0;
    for (const auto& d : draws) {
        const std::size_t n = d.payoff_c.size();
        int worse = 0;
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (d.payoff_m[i] < d.payoff_c[i]) {
                ++worse;
                loss += d.payoff_c[i] - d.payoff_m[i];
            }
        }
        no_worse += worse == 0 ? 1.0 : 0.0;
        share += static_cast<double>(worse) / static_cast<double>(n);
        comp += loss / static_cast<double>(n);
    }
    const auto total = static_cast<double>(draws.size());
    out.frac_no_worse = no_worse / total;
    out.mean_share_worse = share / total;
    out.mean_compensation = comp / total;
    return out;
}

const MechStats* CellStats::find(Protocol mechanism) const {
    for (const auto& m : mechs)
        if (m.mechanism == mechanism) return &m;
    return nullptr;
}

const MechStats& CellStats::at(Protocol mechanism) const {
    if (const auto* m = find(mechanism)) return *m;
    throw std::out_of_range("mechanism not evaluated in this cell");
}

CellStats run_cell(int v_index, int p_index, const SweepConfig& config) {
    CellStats cell;
    cell.v_index = v_index;
    cell.p_index = p_index;
    cell.v = config.v_grid.at(static_cast<std::size_t>(v_index));
    cell.p = config.p_grid.at(static_cast<std::size_t>(p_index));
    cell.n_mc = config.n_mc;
    const Params params = config.params_at(cell.v, cell.p);

    std::array<bool, 4> wanted{};
    for (auto m : config.mechanisms) wanted[slot(m)] = true;

    if (wanted[slot(Protocol::C)]) {
        CutoffSearch search = config.cutoff;
        search.mc_seed = mix_seed(config.master_seed, static_cast<std::uint64_t>(v_index),
                                  static_cast<std::uint64_t>(p_index), ~0ULL, config.cutoff.mc_seed);
        cell.cutoff = select_cutoff(params, config.dist, config.b0, search);
    }

    std::array<MechAccumulator, 4> acc;
    for (auto& a : acc) a.pool_hist.assign(static_cast<std::size_t>(config.n) + 1, 0);
    std::array<std::vector<char>, 4> success_by_draw;
    std::array<std::vector<double>, 4> welfare_by_draw;
    for (std::size_t s = 0; s < 4; ++s) {
        if (!wanted[s]) continue;
        success_by_draw[s].resize(static_cast<std::size_t>(config.n_mc));
        welfare_by_draw[s].resize(static_cast<std::size_t>(config.n_mc));
    }

    const bool cost_diag = config.diagnostics && wanted[slot(Protocol::S)] && wanted[slot(Protocol::M)];
    const bool pareto_diag = config.diagnostics && wanted[slot(Protocol::C)] && wanted[slot(Protocol::M)];
    std::vector<CostEffDraw> cost_draws;
    std::vector<ParetoDraw> pareto_draws;

    for (int r = 0; r < config.n_mc; ++r) {
        std::mt19937_64 stream(mix_seed(config.master_seed, static_cast<std::uint64_t>(v_index),
                                        static_cast<std::uint64_t>(p_index),
                                        static_cast<std::uint64_t>(r)));
        const CostVector costs = config.dist.sample(stream, config.n);
        CostVector observed;
        if (config.tau > 0.0) {
            std::mt19937_64 noise(mix_seed(config.master_seed, static_cast<std::uint64_t>(v_index),
                                           static_cast<std::uint64_t>(p_index),
                                           static_cast<std::uint64_t>(r), kNoiseStream));
            observed = apply_noise(costs, config.tau, noise);
        }

        std::array<std::optional<MechanismOutcome>, 4> outcomes;
        for (auto m : config.mechanisms) {
            auto& slot_outcome = outcomes[slot(m)];
            if (slot_outcome) continue;
            if (m == Protocol::C) {
                slot_outcome = play_c(costs, cell.cutoff, params);
            } else if (config.tau > 0.0) {
                slot_outcome = noisy_plan_outcome(costs, observed, params, m).to_mechanism_outcome(costs, params);
            } else {
                slot_outcome = protocol_outcome(m, costs, params).to_mechanism_outcome(costs, params);
            }
        }

        DrawRecord record;
        const bool keep = config.record_stride > 0 && r % config.record_stride == 0;
        for (std::size_t s = 0; s < 4; ++s) {
            if (!outcomes[s]) continue;
            const auto& out = *outcomes[s];
            auto& a = acc[s];
            const double w = social_welfare(costs, out, params);
            a.successes += out.success;
            a.welfare.add(w);
            a.subsidy += out.subsidy_paid;
            a.privacy += out.privacy_cost_total;
            if (!out.success && !out.is_null()) ++a.failed_with_contribution;
            a.pool_hist[static_cast<std::size_t>(out.backstop_pool_size)]++;
            success_by_draw[s][static_cast<std::size_t>(r)] = out.success;
            welfare_by_draw[s][static_cast<std::size_t>(r)] = w;
            if (keep) record.welfare[s] = w;
        }
        if (cost_diag) {
            const auto& s_out = *outcomes[slot(Protocol::S)];
            const auto& m_out = *outcomes[slot(Protocol::M)];
            cost_draws.push_back({s_out.success, m_out.success, s_out.backstop_pool_size,
                                  s_out.privacy_cost_total, m_out.privacy_cost_total});
        }
        if (pareto_diag) {
            pareto_draws.push_back({outcomes[slot(Protocol::C)]->user_payoffs,
                                    outcomes[slot(Protocol::M)]->user_payoffs});
        }
        if (keep) {
            record.draw = r;
            record.costs = costs;
            record.observed = observed;
            record.outcomes = std::move(outcomes);
            cell.records.push_back(std::move(record));
        }
    }

    const auto n_mc = static_cast<double>(config.n_mc);
    for (std::size_t s = 0; s < 4; ++s) {
        if (!wanted[s]) continue;
        MechStats stats;
        stats.mechanism = static_cast<Protocol>(s);
        set_success_estimates(stats, acc[s].successes, config.n_mc);
        stats.welfare_mean = acc[s].welfare.mean;
        stats.welfare_se = acc[s].welfare.se();
        stats.mean_subsidy = acc[s].subsidy / n_mc;
        stats.mean_privacy_cost = acc[s].privacy / n_mc;
        stats.failed_with_contribution = acc[s].failed_with_contribution;
        stats.pool_hist = std::move(acc[s].pool_hist);
        cell.mechs.push_back(std::move(stats));
    }

    for (std::size_t b = 0; b < 4; ++b) {
        for (std::size_t a = b + 1; a < 4; ++a) {
            if (!wanted[a] || !wanted[b]) continue;
            PairedDiff diff;
            diff.first = static_cast<Protocol>(a);
            diff.second = static_cast<Protocol>(b);
            Moments ds;
            Moments dw;
            for (std::size_t r = 0; r < static_cast<std::size_t>(config.n_mc); ++r) {
                ds.add(static_cast<double>(success_by_draw[a][r]) - success_by_draw[b][r]);
                dw.add(welfare_by_draw[a][r] - welfare_by_draw[b][r]);
            }
            diff.success_diff = cell.at(diff.first).success_prob - cell.at(diff.second).success_prob;
            diff.success_se = ds.se();
            diff.welfare_diff = dw.mean;
            diff.welfare_se = dw.se();
            cell.pairs.push_back(diff);
        }
    }

    if (cost_diag) cell.cost_efficiency = masked_cost_efficiency(cost_draws, config.min_common);
    if (pareto_diag) cell.pareto = pareto_diagnostics(pareto_draws);
    return cell;
}

std::vector<CellStats> sweep(const SweepConfig& config) {
    config.validate();
    const std::size_t nv = config.v_grid.size();
    const std::size_t np = config.p_grid.size();
    const std::size_t total = nv * np;
    std::vector<CellStats> cells(total);

    unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t idx = next++; idx < total; idx = next++) {
            cells[idx] = run_cell(static_cast<int>(idx / np), static_cast<int>(idx % np), config);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    }
    return cells;
}

}  // namespace tpg
