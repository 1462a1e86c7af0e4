#pragma once

#include "fbrl/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace fbrl {

/// Stationary policy: row s is the action distribution at state s.
using StationaryPolicy = Eigen::MatrixXd;

/// Discounted tabular MDP with deterministic mean rewards.
class StationaryMdp {
public:
    StationaryMdp(int states, int actions, double reward_min, double reward_max);

    int num_states() const { return s_; }
    int num_actions() const { return a_; }
    double reward_min() const { return rmin_; }
    double reward_max() const { return rmax_; }

    void set_transition(int s, int a, const Eigen::VectorXd& next);
    void set_reward(int s, int a, double r);
    void set_initial(const Eigen::VectorXd& p0);

    const Eigen::VectorXd& next(int s, int a) const { return p_[static_cast<std::size_t>(s) * a_ + a]; }
    double reward(int s, int a) const { return r_(s, a); }
    const Eigen::VectorXd& initial() const { return p0_; }

    /// P_pi(s, s') under a stationary policy.
    Eigen::MatrixXd transition_matrix(const StationaryPolicy& pi) const;

    int step(int s, int a, Rng& rng) const;

private:
    int s_, a_;
    double rmin_, rmax_;
    std::vector<Eigen::VectorXd> p_;
    Eigen::MatrixXd r_;
    Eigen::VectorXd p0_;
};

/// (1-gamma) sum_t gamma^t Pr(s_t = . | s_0 ~ start, pi).
Eigen::VectorXd discounted_occupancy(const StationaryMdp& m, const StationaryPolicy& pi, double gamma,
                                     const Eigen::VectorXd& start);

/// Solves (I - gamma P_pi) V = r_pi and returns Q(s, a).
Eigen::MatrixXd stationary_q(const StationaryMdp& m, const StationaryPolicy& pi, double gamma);
Eigen::VectorXd stationary_v(const StationaryMdp& m, const StationaryPolicy& pi, double gamma);

/// Expected discounted return from `start` (unnormalized).
double stationary_value(const StationaryMdp& m, const StationaryPolicy& pi, double gamma, const Eigen::VectorXd& start);

/// Every deterministic stationary policy, in lexicographic order of actions.
std::vector<StationaryPolicy> enumerate_deterministic(int states, int actions);

/// Uniform stationary policy.
StationaryPolicy uniform_stationary(int states, int actions);

/// Geometric roll-in: follow `first`, switch to `second` with prob 1-gamma at each step,
/// then stop with prob 1-gamma at each step. Returns the stopping state.
int geometric_rollin(const StationaryMdp& m, const StationaryPolicy& first, const StationaryPolicy& second, double gamma,
                     Rng& rng);

/// State after following `pi` for a Geom(1-gamma) number of steps from P_0.
int geometric_state(const StationaryMdp& m, const StationaryPolicy& pi, double gamma, Rng& rng);

/// Discounted return of `pi` from s after forcing `a`, truncated after `horizon` steps.
double discounted_return(const StationaryMdp& m, const StationaryPolicy& pi, int s, int a, double gamma, int horizon,
                         Rng& rng);

/// Small stationary lock: good states 0 and 1 advance on their own correct action and pay 1,
/// anything else drops to the absorbing bad state 2 which pays 0.
StationaryMdp make_stationary_lock(int actions, std::uint64_t seed, std::vector<int>* correct = nullptr);

} // namespace fbrl
