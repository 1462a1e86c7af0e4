#pragma once

#include "fbrl/dataset.hpp"
#include "fbrl/env.hpp"
#include "fbrl/policy.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace fbrl {

/// Combination lock: per horizon good states 0 and 1, absorbing bad state 2.
struct CombLock {
    Environment env;
    /// correct[h-1][i] is the action that keeps good state i on track at horizon h.
    std::vector<std::array<int, 2>> correct;
    Policy optimal;
};

constexpr int kLockActions = 10;
constexpr double kLockPenalty = -0.1;
constexpr double kLockPenaltyProb = 0.5;

CombLock make_comb_lock(int H, std::uint64_t seed, ObsMode mode, int actions = kLockActions);

/// Lock whose first transition carries the one-step hardness instance: the correct action reaches
/// state 0 w.p. 0.1 and state 1 w.p. 0.9, a wrong action reaches state 1 w.p. 0.05 and state 2 otherwise;
/// at horizon 2 state 1 behaves like the bad state.
CombLock make_adversarial_lock(int H, std::uint64_t seed, ObsMode mode, int actions = kLockActions);

/// Full binary (or A-ary) tree with deterministic transitions and reward 1 at one leaf.
struct HardnessTree {
    Environment env;
    int branching = 2;
    /// Node index of the optimal path at each horizon.
    std::vector<int> path;
    /// Distractor node at each horizon (the root at h=1).
    std::vector<int> distractor;
    Policy optimal;
    /// Two samples per horizon: the path node and the distractor.
    StateOnlyDataset dataset;
};

/// Node index of the child reached from `node` by action a.
inline int tree_child(int node, int a, int branching) { return node * branching + a; }

HardnessTree make_binary_tree(int H, std::uint64_t seed, int branching = 2);

/// Two-step instance: s0 at horizon 1, {s1,s2,s3} at horizon 2, reward 1 at s3.
struct OneStepHardness {
    Environment env;
    std::vector<double> mu;
    Policy optimal;
};

OneStepHardness make_one_step_hardness();

} // namespace fbrl
