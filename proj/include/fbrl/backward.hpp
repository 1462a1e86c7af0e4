#pragma once

#include "fbrl/dataset.hpp"
#include "fbrl/env.hpp"
#include "fbrl/policy.hpp"
#include "fbrl/qfunc.hpp"
#include "fbrl/stationary.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace fbrl {

struct BackwardConfig {
    /// Regression samples per horizon.
    int N = 5000;
    /// Regressor family; a finite class is fit by selecting its best member.
    QClass q;
};

struct BackwardResult {
    /// Greedy policy on [1..H].
    Policy policy;
    /// q[h-1] is the fitted regressor of horizon h.
    std::vector<QPtr> q;
    long episodes = 0;
    long queries = 0;
};

/// Called after horizon h is fit, with the learned suffix [h..H] and the samples spent so far.
using BackwardHook = std::function<void(int h, const Policy& suffix, long samples)>;

/// Regression range for returns collected from horizon h onward.
FitShape backward_shape(const Environment& env, int h);

/// PSDP with a roll-in policy: states at h come from rolling in `roll_in`, then one uniform action,
/// then the learned suffix; the Monte-Carlo return is regressed and the greedy rule kept.
BackwardResult psdp_trace(const Environment& env, const Policy& roll_in, const BackwardConfig& cfg, std::uint64_t seed,
                          const BackwardHook& hook = {});

/// PSDP with reset access: states at h are drawn from the offline samples of horizon h.
BackwardResult psdp_reset(const Environment& env, const StateOnlyDataset& off, const BackwardConfig& cfg, std::uint64_t seed,
                          const BackwardHook& hook = {});

struct CpiConfig {
    /// Threshold on the normalized advantage (1-gamma) A / (r_max - r_min).
    double eps = 0.1;
    double gamma = 0.9;
    /// Mixing step; 0 picks (1-gamma) A_n / (4 gamma) from the measured advantage.
    double alpha = 0.0;
    int max_iters = 10000;
    /// States drawn per advantage estimate.
    int budget = 2000;
    /// Truncation of the Monte-Carlo returns; 0 means ceil(5 / (1-gamma)).
    int horizon = 0;
    /// Use exact advantages instead of samples.
    bool exact = false;
};

struct CpiIteration {
    int t = 0;
    int candidate = -1;
    /// Normalized advantage of the selected candidate, measured on a fresh batch.
    double advantage = 0.0;
    double alpha = 0.0;
    long samples = 0;
};

struct CpiResult {
    /// State-wise mixture of all components.
    StationaryPolicy policy;
    std::vector<StationaryPolicy> components;
    std::vector<double> weights;
    int iterations = 0;
    bool terminated = false;
    std::vector<CpiIteration> log;
    long samples = 0;
};

/// ceil(8 gamma / eps^2).
int cpi_iteration_bound(double gamma, double eps);

/// E_{s ~ d}[sum_a (cand(a|s) - base(a|s)) Q^base(s,a)] normalized by (1-gamma)/(r_max - r_min), where d is the
/// discounted occupancy of `base` started from the discounted occupancy of `roll_in`.
double exact_advantage(const StationaryMdp& m, const StationaryPolicy& roll_in, const StationaryPolicy& base,
                       const StationaryPolicy& cand, double gamma);

struct AdvantageSample {
    int s = 0;
    int a = 0;
    double q = 0.0;
};

/// States from the geometric roll-in, uniform actions and truncated discounted returns of `base`.
std::vector<AdvantageSample> sample_advantage_data(const StationaryMdp& m, const StationaryPolicy& roll_in,
                                                   const StationaryPolicy& base, double gamma, int budget, int horizon,
                                                   Rng& rng);

/// Importance-weighted estimate of the normalized advantage from sampled data.
double estimate_advantage(const std::vector<AdvantageSample>& data, const StationaryMdp& m, const StationaryPolicy& base,
                          const StationaryPolicy& cand, double gamma);

double estimate_advantage(const StationaryMdp& m, const StationaryPolicy& roll_in, const StationaryPolicy& base,
                          const StationaryPolicy& cand, double gamma, int budget, int horizon, Rng& rng);

/// Conservative policy iteration with geometric roll-ins from `roll_in`; candidates are searched exhaustively.
CpiResult cpi_trace(const StationaryMdp& m, const StationaryPolicy& roll_in, const std::vector<StationaryPolicy>& candidates,
                    const StationaryPolicy& init, const CpiConfig& cfg, std::uint64_t seed);

} // namespace fbrl
