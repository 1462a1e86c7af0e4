#pragma once

#include "fbrl/mdp.hpp"
#include "fbrl/policy.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace fbrl {

/// occ[h-1][s] = probability of being in s at horizon h.
using Occupancy = std::vector<std::vector<double>>;
/// q[h-1](s, a).
using QTables = std::vector<Eigen::MatrixXd>;
/// How exact oracles present latent state s at horizon h to a policy.
using ObsFn = std::function<Obs(int h, int s)>;

ObsFn latent_obs_fn(const LatentMdp& mdp);

/// State marginals of `pi` (active from horizon 1) for horizons 1..min(H, last+1).
Occupancy exact_occupancy(const LatentMdp& mdp, const Policy& pi, const ObsFn& obs = {});

/// Q^pi_h(s,a) for a non-mixture policy active on [h0..H]; horizons before h0 are left empty.
QTables exact_q(const LatentMdp& mdp, const Policy& pi, const ObsFn& obs = {});

/// V^pi_h(s) = E_{a~pi} Q^pi_h(s,a).
std::vector<Eigen::VectorXd> exact_v(const LatentMdp& mdp, const Policy& pi, const ObsFn& obs = {});

/// Expected return from P_0.
double policy_value(const LatentMdp& mdp, const Policy& pi, const ObsFn& obs = {});

/// Probability that the final-step reward reaches `level`.
double success_probability(const LatentMdp& mdp, const Policy& pi, double level = 1.0, const ObsFn& obs = {});

struct OptimalSolution {
    QTables q;
    Policy policy;
    double value = 0.0;
};

/// Optimal Q and greedy deterministic policy, lowest action index on ties.
OptimalSolution solve_optimal(const LatentMdp& mdp);

/// Largest achievable success probability.
double optimal_success_probability(const LatentMdp& mdp, double level = 1.0);

/// Success event probability of (h=H, s, a).
double success_event(const Reward& r, double level);

/// Lowest index attaining the maximum.
int argmax_lowest(const double* v, int n);

} // namespace fbrl
