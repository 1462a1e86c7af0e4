#pragma once

#include "fbrl/dataset.hpp"
#include "fbrl/dp.hpp"
#include "fbrl/env.hpp"
#include "fbrl/policy.hpp"

#include <string>
#include <vector>

namespace fbrl {

enum class CoverageKind { density_ratio, forward_policy, perf_diff };

std::string to_string(CoverageKind k);

struct CoverageReport {
    CoverageKind kind = CoverageKind::density_ratio;
    /// Largest ratio at each horizon; +inf where the reference misses reachable mass.
    std::vector<double> per_horizon;
    /// Max of the finite per-horizon values.
    double aggregate = 0.0;
    bool infinite = false;
    /// First (horizon, state) with positive target mass and zero reference mass.
    int witness_h = -1, witness_s = -1;
    /// Performance-difference kind: index of the maximizing comparator.
    long witness_policy = -1;
};

/// max_s target_h(s) / reference_h(s) per horizon; 0/0 counts as 0.
CoverageReport coverage_density_ratio(const Occupancy& target, const Occupancy& reference,
                                      CoverageKind kind = CoverageKind::density_ratio);

CoverageReport coverage_density_ratio(const LatentMdp& mdp, const Policy& target, const Occupancy& reference,
                                      const ObsFn& obs = {});

/// Latent marginals of an offline dataset (rich samples are decoded).
Occupancy dataset_marginals(const StateOnlyDataset& d, const Environment& env);

/// Every deterministic latent policy on [1..H]; throws ConfigError past `cap`.
std::vector<Policy> enumerate_deterministic_policies(const LatentMdp& mdp, long cap = 1000000);

/// max over comparators pi' of sum_h E_{target_h}[max_a A^{pi'}_h] / sum_h E_{reference_h}[max_a A^{pi'}_h].
/// 0/0 counts as 1; an empty comparator list enumerates the deterministic policies.
CoverageReport coverage_perf_diff(const LatentMdp& mdp, const Policy& target, const Occupancy& reference,
                                  std::vector<Policy> comparators = {});

struct TvMinimizer {
    /// Weights over the first-step actions.
    std::vector<double> weights;
    /// Deterministic set: the chosen action.
    int action = -1;
    double tv = 0.0;
};

/// Minimizes TV between the horizon-2 marginal and mu over deterministic first actions.
TvMinimizer tv_minimizing_policy(const LatentMdp& mdp, const std::vector<double>& mu);

/// Same over mixtures of two actions, p on action 0, on the grid {0, r, 2r, ..., 1}.
TvMinimizer tv_minimizing_mixture(const LatentMdp& mdp, const std::vector<double>& mu, double resolution);

/// Empirical success rate divided by the optimal rate.
double relative_success(const Environment& env, const Policy& pi, int episodes, double optimal_rate, std::uint64_t seed);

struct Divergences {
    double tv = 0.0;
    double js = 0.0;
};

/// Half L1 distance and Jensen-Shannon divergence in nats.
Divergences divergences(const std::vector<double>& p, const std::vector<double>& q);

} // namespace fbrl
