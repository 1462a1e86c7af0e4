#pragma once

#include "fbrl/dataset.hpp"
#include "fbrl/discriminators.hpp"
#include "fbrl/env.hpp"
#include "fbrl/kernel.hpp"
#include "fbrl/policy.hpp"
#include "fbrl/stationary.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace fbrl {

/// Online transition: observation, uniformly drawn action, next observation.
struct OnlineTuple {
    Obs s;
    int a = 0;
    Obs next;
};

struct GameRecord {
    int t = 0;
    /// Index of the discriminator best response (-1 for the kernel witness).
    int disc = -1;
    double u = 0.0;
    /// Squared MMD of the current iterate (kernel games only).
    double mmd2 = 0.0;
};

struct GameTranscript {
    std::vector<GameRecord> rows;
    /// Returned iterate.
    int best = -1;
    /// Iterates before this index are not eligible for return.
    int first_eligible = 0;
    double best_u() const { return rows.at(best).u; }
};

struct GameResult {
    RulePtr rule;
    GameTranscript transcript;
    /// Finite games: class weights of every iterate.
    std::vector<Eigen::VectorXd> iterates;
};

/// u(pi, g) = (A/n) sum_i pi(a_i|s_i) g(s'_i) - (1/m) sum_j g(off_j).
double game_loss(const DecisionRule& pi, const TestFn& g, const std::vector<OnlineTuple>& on, const std::vector<Obs>& off);

/// U(k, j) = u(policy k, test function j).
Eigen::MatrixXd game_matrix(const std::vector<RulePtr>& policies, const FiniteDiscriminators& disc,
                            const std::vector<OnlineTuple>& on, const std::vector<Obs>& off);

/// Finite policy class against a finite discriminator class: exact best responses and multiplicative
/// weights with learning rate sqrt(8 ln K / T) / range(U).
GameResult minmax_finite(const std::vector<RulePtr>& policies, const FiniteDiscriminators& disc,
                         const std::vector<OnlineTuple>& on, const std::vector<Obs>& off, int T);

/// min over the simplex of max_j (w^T U)_j, by grid search with the given resolution (K <= 4).
double brute_force_minimax(const Eigen::MatrixXd& U, int grid = 200);

/// Softmax policy network over the features.
struct PolicyNetSpec {
    std::vector<int> hidden;
    double lr = 0.05;
    int steps = 1;
};

struct MmdGameConfig {
    int T = 1000;
    PolicyNetSpec policy;
    KernelSpec kernel;
    /// Cap on online and offline points entering the kernel computations.
    int max_points = 1000;
};

/// Kernel game: the discriminator is the normalized MMD witness, so u^t is the MMD of the iterate;
/// the policy takes Adam steps on u(pi, g^t).
GameResult minmax_mmd(const std::vector<OnlineTuple>& on, const std::vector<Obs>& off, int actions, const MmdGameConfig& cfg,
                      Rng& rng);

enum class ForwardMode { mmd, finite };

struct ForwardConfig {
    ForwardMode mode = ForwardMode::mmd;
    /// Online episodes per horizon.
    int N = 2000;
    MmdGameConfig game;
    /// Finite mode: candidate rules at horizon h and test functions on horizon h states.
    std::function<std::vector<RulePtr>(int h)> policy_class;
    std::function<FiniteDiscriminators(int h)> disc_class;
};

struct ForwardResult {
    /// Active on [1..H]; the last horizon is uniform.
    Policy policy;
    /// transcripts[h-1] belongs to the rule at horizon h, for h < H.
    std::vector<GameTranscript> transcripts;
    long episodes = 0;
};

/// Called after the rule at horizon h is fixed, with the learned prefix [1..h].
using ForwardHook = std::function<void(int h, const Policy& prefix, const GameTranscript& tr, long episodes)>;

/// FAIL: for h = 1..H-1, roll in the learned prefix, take one uniform action at h and match the next-state
/// distribution to the offline samples of horizon h+1.
ForwardResult fail_forward(const Environment& env, const StateOnlyDataset& off, const ForwardConfig& cfg, std::uint64_t seed,
                           const ForwardHook& hook = {});

struct InterFailConfig {
    double gamma = 0.9;
    int T = 3000;
    double lr = 0.05;
};

struct InterFailResult {
    StationaryPolicy policy;
    GameTranscript transcript;
    long episodes = 0;
};

/// Inter-FAIL on a tabular stationary MDP with a kernel discriminator over one-hot states.
/// Iterates from the first half are not eligible for return.
InterFailResult inter_fail(const StationaryMdp& mdp, InteractiveOfflineOracle& oracle, const InterFailConfig& cfg,
                           std::uint64_t seed);

} // namespace fbrl
