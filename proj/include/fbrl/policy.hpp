#pragma once

#include "fbrl/rng.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <vector>

namespace fbrl {

/// What a policy sees: the latent id (-1 when hidden) and a feature vector.
struct Obs {
    int id = -1;
    Eigen::VectorXd x;
};

/// Latent observation with one-hot features over `num_states`.
Obs latent_obs(int s, int num_states);

/// Per-horizon map from observations to action distributions.
class DecisionRule {
public:
    virtual ~DecisionRule() = default;
    virtual int num_actions() const = 0;
    /// Writes the action distribution for `o` into out[0..num_actions).
    virtual void probs(const Obs& o, double* out) const = 0;
    virtual bool deterministic() const { return false; }
};

using RulePtr = std::shared_ptr<const DecisionRule>;

class UniformRule : public DecisionRule {
public:
    explicit UniformRule(int actions) : actions_(actions) {}
    int num_actions() const override { return actions_; }
    void probs(const Obs&, double* out) const override;

private:
    int actions_;
};

/// Table indexed by latent id.
class TabularRule : public DecisionRule {
public:
    TabularRule(int states, int actions, std::vector<double> table);
    static std::shared_ptr<TabularRule> from_actions(const std::vector<int>& actions, int num_actions);
    static std::shared_ptr<TabularRule> from_rule(const DecisionRule& rule, int states);

    int num_actions() const override { return actions_; }
    int num_states() const { return states_; }
    void probs(const Obs& o, double* out) const override;
    bool deterministic() const override;
    double prob(int s, int a) const { return table_[static_cast<std::size_t>(s) * actions_ + a]; }
    const std::vector<double>& table() const { return table_; }

private:
    int states_, actions_;
    std::vector<double> table_;
};

/// Pointwise average of several rules.
class MixtureRule : public DecisionRule {
public:
    MixtureRule(std::vector<RulePtr> parts, std::vector<double> weights);
    int num_actions() const override { return parts_.front()->num_actions(); }
    void probs(const Obs& o, double* out) const override;

private:
    std::vector<RulePtr> parts_;
    std::vector<double> weights_;
};

enum class PolicyKind { deterministic, stochastic, mixture };

/// Partial policy on an active interval [first..last], or a per-episode mixture of such policies.
class Policy {
public:
    Policy() = default;
    Policy(int first, std::vector<RulePtr> rules);
    static Policy mixture(std::vector<Policy> parts, std::vector<double> weights);
    static Policy uniform(int first, int last, int actions);

    bool empty() const { return rules_.empty() && parts_.empty(); }
    int first() const;
    int last() const;
    int num_actions() const;
    PolicyKind kind() const;
    bool is_mixture() const { return !parts_.empty(); }

    const RulePtr& rule(int h) const;
    void probs(int h, const Obs& o, double* out) const;
    int act(int h, const Obs& o, Rng& rng) const;

    /// Component used for one episode; the policy itself unless it is a mixture.
    const Policy& pick(Rng& rng) const;
    const std::vector<Policy>& parts() const { return parts_; }
    const std::vector<double>& weights() const { return weights_; }

    /// Restriction to [l..r].
    Policy slice(int l, int r) const;

private:
    int first_ = 1;
    std::vector<RulePtr> rules_;
    std::vector<Policy> parts_;
    std::vector<double> weights_;
};

/// Follows `prefix` before h and `suffix` from h on.
Policy compose(const Policy& prefix, int h, const Policy& suffix);

/// Latent tabular form of a non-mixture policy on [first..last]:
///   fbrl-policy 1
///   first l last r actions A
///   then per horizon: "h <h> <S_h>" and S_h lines of A probabilities
void save_policy(const Policy& pi, const std::vector<int>& states, std::ostream& os);
Policy load_policy(std::istream& is);

} // namespace fbrl
