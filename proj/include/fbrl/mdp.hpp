#pragma once

#include <iosfwd>
#include <vector>

namespace fbrl {

/// Stored probabilities must sum to one within this tolerance.
constexpr double kProbTol = 1e-9;

struct Transition {
    int next;
    double prob;
};

/// Two-point reward: `value` with probability `prob`, otherwise 0.
struct Reward {
    double value = 0.0;
    double prob = 1.0;
    double mean() const { return value * prob; }
};

/// Finite-horizon tabular MDP. Horizons are 1-based; horizon H has no transitions.
class LatentMdp {
public:
    LatentMdp(int horizon, std::vector<int> states, int actions, double reward_min, double reward_max);

    int horizon() const { return horizon_; }
    int num_actions() const { return actions_; }
    int num_states(int h) const;
    const std::vector<int>& states() const { return states_; }
    double reward_min() const { return rmin_; }
    double reward_max() const { return rmax_; }

    /// Replaces the next-state row of (h, s, a); throws unless it is a distribution.
    void set_transition(int h, int s, int a, std::vector<Transition> row);
    void set_reward(int h, int s, int a, Reward r);
    void set_initial(std::vector<double> p0);

    const std::vector<Transition>& transition(int h, int s, int a) const;
    const Reward& reward(int h, int s, int a) const;
    const std::vector<double>& initial() const { return p0_; }

    /// Dense next-state distribution of (h, s, a).
    std::vector<double> next_distribution(int h, int s, int a) const;

    /// Checks every invariant; throws std::invalid_argument with the first violation.
    void validate() const;

private:
    void check_index(int h, int s, int a) const;
    std::size_t slot(int h, int s, int a) const;

    int horizon_;
    std::vector<int> states_;
    int actions_;
    double rmin_, rmax_;
    std::vector<std::vector<std::vector<Transition>>> trans_;
    std::vector<std::vector<Reward>> rewards_;
    std::vector<double> p0_;
};

/// Plain-text schema:
///   fbrl-mdp 1
///   horizon H
///   actions A
///   states S_1 ... S_H
///   reward_range lo hi
///   initial p_1 ... p_{S_1}
///   then one line per (h, s, a) in row-major order:
///   row h s a reward_value reward_prob k next_1 prob_1 ... next_k prob_k
///   end
void save_mdp(const LatentMdp& mdp, std::ostream& os);
LatentMdp load_mdp(std::istream& is);

} // namespace fbrl
