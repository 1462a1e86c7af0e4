#pragma once

#include "fbrl/env.hpp"
#include "fbrl/policy.hpp"
#include "fbrl/rng.hpp"

#include <vector>

namespace fbrl {

struct StepResult {
    double reward = 0.0;
    Obs next;
    bool done = false;
};

/// Episodic access: reset to P_0, then step H times.
class TraceSim {
public:
    TraceSim(const Environment& env, Rng rng);

    Obs reset();
    StepResult step(int a);

    const Environment& env() const { return env_; }
    /// Horizon of the current state (1-based).
    int h() const { return h_; }
    /// Latent state, for diagnostics only.
    int latent() const { return s_; }
    bool in_episode() const { return active_; }
    long episodes() const { return episodes_; }
    long steps() const { return steps_; }

private:
    const Environment& env_;
    Rng rng_;
    int h_ = 0, s_ = -1;
    bool active_ = false;
    long episodes_ = 0, steps_ = 0;
};

/// Generative access at any (h, s, a).
class ResetSim {
public:
    struct Result {
        double reward = 0.0;
        int next = -1;
        Obs next_obs;
    };

    ResetSim(const Environment& env, Rng rng);

    Result query(int h, int s, int a);
    /// Rewards collected from (h, s) onward following `pi`, where `a` is forced at h when >= 0.
    double rollout_from(int h, int s, int a, const Policy& pi, Rng& policy_rng);

    const Environment& env() const { return env_; }
    long queries() const { return queries_; }

private:
    const Environment& env_;
    Rng rng_;
    long queries_ = 0;
};

struct Trajectory {
    std::vector<Obs> obs;
    std::vector<int> states;
    std::vector<int> actions;
    std::vector<double> rewards;
    double ret() const;
    /// Final-step reward reached the environment's success level.
    bool success = false;
};

/// Full episode; mixtures pick one component for the whole episode.
Trajectory rollout(TraceSim& sim, const Policy& pi, Rng& policy_rng);

/// Reward draw for a two-point reward.
double draw_reward(const Reward& r, Rng& rng);

/// Fraction of successful episodes.
double success_rate(const Environment& env, const Policy& pi, int episodes, std::uint64_t seed);

} // namespace fbrl
