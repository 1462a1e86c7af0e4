#include "fbrl/policy.hpp"

#include "fbrl/errors.hpp"
#include "fbrl/mdp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace fbrl {

Obs latent_obs(int s, int num_states) {
    Obs o;
    o.id = s;
    o.x = Eigen::VectorXd::Zero(num_states);
    if (s >= 0 && s < num_states) o.x[s] = 1.0;
    return o;
}

void UniformRule::probs(const Obs&, double* out) const {
    for (int a = 0; a < actions_; ++a) out[a] = 1.0 / actions_;
}

TabularRule::TabularRule(int states, int actions, std::vector<double> table)
    : states_(states), actions_(actions), table_(std::move(table)) {
    if (static_cast<int>(table_.size()) != states_ * actions_) throw std::invalid_argument("tabular rule has wrong size");
    for (int s = 0; s < states_; ++s) {
        double t = 0.0;
        for (int a = 0; a < actions_; ++a) {
            double p = prob(s, a);
            if (!(p >= 0.0)) throw std::invalid_argument("negative action probability");
            t += p;
        }
        if (std::abs(t - 1.0) > kProbTol) throw std::invalid_argument("action distribution does not sum to 1");
    }
}

std::shared_ptr<TabularRule> TabularRule::from_actions(const std::vector<int>& actions, int num_actions) {
    std::vector<double> t(actions.size() * num_actions, 0.0);
    for (std::size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] < 0 || actions[s] >= num_actions) throw std::invalid_argument("action out of range");
        t[s * num_actions + actions[s]] = 1.0;
    }
    return std::make_shared<TabularRule>(static_cast<int>(actions.size()), num_actions, std::move(t));
}

std::shared_ptr<TabularRule> TabularRule::from_rule(const DecisionRule& rule, int states) {
    int A = rule.num_actions();
    std::vector<double> t(static_cast<std::size_t>(states) * A);
    for (int s = 0; s < states; ++s) {
        rule.probs(latent_obs(s, states), &t[static_cast<std::size_t>(s) * A]);
        double tot = 0.0;
        for (int a = 0; a < A; ++a) tot += t[s * A + a];
        for (int a = 0; a < A; ++a) t[s * A + a] /= tot;
    }
    return std::make_shared<TabularRule>(states, A, std::move(t));
}

void TabularRule::probs(const Obs& o, double* out) const {
    if (o.id < 0 || o.id >= states_) throw PolicyDomainError("tabular rule has no entry for state " + std::to_string(o.id));
    const double* row = &table_[static_cast<std::size_t>(o.id) * actions_];
    for (int a = 0; a < actions_; ++a) out[a] = row[a];
}

bool TabularRule::deterministic() const {
    for (double p : table_)
        if (p != 0.0 && p != 1.0) return false;
    return true;
}

MixtureRule::MixtureRule(std::vector<RulePtr> parts, std::vector<double> weights)
    : parts_(std::move(parts)), weights_(std::move(weights)) {
    if (parts_.empty() || parts_.size() != weights_.size()) throw std::invalid_argument("mixture rule needs one weight per part");
}

void MixtureRule::probs(const Obs& o, double* out) const {
    int A = num_actions();
    std::vector<double> tmp(A);
    for (int a = 0; a < A; ++a) out[a] = 0.0;
    for (std::size_t k = 0; k < parts_.size(); ++k) {
        if (weights_[k] == 0.0) continue;
        parts_[k]->probs(o, tmp.data());
        for (int a = 0; a < A; ++a) out[a] += weights_[k] * tmp[a];
    }
}

Policy::Policy(int first, std::vector<RulePtr> rules) : first_(first), rules_(std::move(rules)) {
    if (first_ < 1) throw std::invalid_argument("policy interval must start at 1 or later");
    for (const auto& r : rules_)
        if (!r) throw std::invalid_argument("null decision rule");
    for (const auto& r : rules_)
        if (r->num_actions() != rules_.front()->num_actions()) throw std::invalid_argument("rules disagree on action count");
}

Policy Policy::mixture(std::vector<Policy> parts, std::vector<double> weights) {
    if (parts.empty() || parts.size() != weights.size()) throw std::invalid_argument("mixture needs one weight per component");
    double t = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("negative mixture weight");
        t += w;
    }
    if (std::abs(t - 1.0) > kProbTol) throw std::invalid_argument("mixture weights do not sum to 1");
    for (const auto& p : parts)
        if (p.empty() || p.first() != parts.front().first() || p.last() != parts.front().last())
            throw IntervalError("mixture components must share an active interval");
    Policy out;
    out.parts_ = std::move(parts);
    out.weights_ = std::move(weights);
    out.first_ = out.parts_.front().first();
    return out;
}

Policy Policy::uniform(int first, int last, int actions) {
    auto r = std::make_shared<UniformRule>(actions);
    return Policy(first, std::vector<RulePtr>(last - first + 1, r));
}

int Policy::first() const { return first_; }

int Policy::last() const {
    if (!parts_.empty()) return parts_.front().last();
    return first_ + static_cast<int>(rules_.size()) - 1;
}

int Policy::num_actions() const {
    if (!parts_.empty()) return parts_.front().num_actions();
    if (rules_.empty()) return 0;
    return rules_.front()->num_actions();
}

PolicyKind Policy::kind() const {
    if (!parts_.empty()) return PolicyKind::mixture;
    for (const auto& r : rules_)
        if (!r->deterministic()) return PolicyKind::stochastic;
    return PolicyKind::deterministic;
}

const RulePtr& Policy::rule(int h) const {
    if (!parts_.empty()) throw std::logic_error("a mixture has no single rule per horizon");
    if (h < first_ || h > last()) throw PolicyDomainError("policy is not active at horizon " + std::to_string(h));
    return rules_[h - first_];
}

void Policy::probs(int h, const Obs& o, double* out) const { rule(h)->probs(o, out); }

int Policy::act(int h, const Obs& o, Rng& rng) const {
    const auto& r = rule(h);
    int A = r->num_actions();
    double buf[64];
    std::vector<double> big;
    double* p = buf;
    if (A > 64) {
        big.resize(A);
        p = big.data();
    }
    r->probs(o, p);
    return sample_discrete(p, A, rng);
}

const Policy& Policy::pick(Rng& rng) const {
    if (parts_.empty()) return *this;
    int k = sample_discrete(weights_.data(), static_cast<int>(weights_.size()), rng);
    return parts_[k].pick(rng);
}

Policy Policy::slice(int l, int r) const {
    if (l > r) return Policy();
    if (!parts_.empty()) {
        std::vector<Policy> ps;
        for (const auto& p : parts_) ps.push_back(p.slice(l, r));
        return mixture(std::move(ps), weights_);
    }
    if (l < first_ || r > last()) throw IntervalError("slice outside the active interval");
    return Policy(l, std::vector<RulePtr>(rules_.begin() + (l - first_), rules_.begin() + (r - first_ + 1)));
}

Policy compose(const Policy& prefix, int h, const Policy& suffix) {
    if (prefix.empty() && suffix.empty()) return Policy();
    if (prefix.empty()) {
        if (suffix.first() != h) throw IntervalError("suffix must start at the composition horizon");
        return suffix;
    }
    if (prefix.last() != h - 1) throw IntervalError("prefix must end right before the composition horizon");
    if (suffix.empty()) return prefix;
    if (suffix.first() != h) throw IntervalError("suffix must start at the composition horizon");
    if (prefix.is_mixture() || suffix.is_mixture()) throw IntervalError("cannot compose per-episode mixtures horizon-wise");
    if (prefix.num_actions() != suffix.num_actions()) throw std::invalid_argument("action counts differ");
    std::vector<RulePtr> rules;
    for (int t = prefix.first(); t <= prefix.last(); ++t) rules.push_back(prefix.rule(t));
    for (int t = suffix.first(); t <= suffix.last(); ++t) rules.push_back(suffix.rule(t));
    return Policy(prefix.first(), std::move(rules));
}

void save_policy(const Policy& pi, const std::vector<int>& states, std::ostream& os) {
    if (pi.empty() || pi.is_mixture()) throw std::invalid_argument("only non-mixture policies are serializable");
    if (static_cast<int>(states.size()) < pi.last()) throw std::invalid_argument("state counts do not cover the policy");
    int A = pi.num_actions();
    auto old = os.precision(17);
    os << "fbrl-policy 1\nfirst " << pi.first() << " last " << pi.last() << " actions " << A << "\n";
    std::vector<double> p(A);
    for (int h = pi.first(); h <= pi.last(); ++h) {
        int S = states[h - 1];
        os << "h " << h << ' ' << S << "\n";
        for (int s = 0; s < S; ++s) {
            pi.probs(h, latent_obs(s, S), p.data());
            for (int a = 0; a < A; ++a) os << (a ? " " : "") << p[a];
            os << "\n";
        }
    }
    os << "end\n";
    os.precision(old);
}

Policy load_policy(std::istream& is) {
    std::string tag, w1, w2, w3;
    int version = 0, first = 0, last = 0, A = 0;
    if (!(is >> tag >> version) || tag != "fbrl-policy" || version != 1) throw LoadError("not a policy file");
    if (!(is >> w1 >> first >> w2 >> last >> w3 >> A) || w1 != "first" || w2 != "last" || w3 != "actions" || first < 1 ||
        last < first || A < 1)
        throw LoadError("bad policy header");
    std::vector<RulePtr> rules;
    for (int h = first; h <= last; ++h) {
        int hh = 0, S = 0;
        if (!(is >> tag >> hh >> S) || tag != "h" || hh != h || S < 1) throw LoadError("bad policy block at horizon " + std::to_string(h));
        std::vector<double> table(static_cast<std::size_t>(S) * A);
        for (double& x : table)
            if (!(is >> x)) throw LoadError("truncated policy at horizon " + std::to_string(h));
        try {
            rules.push_back(std::make_shared<TabularRule>(S, A, std::move(table)));
        } catch (const std::exception& e) {
            throw LoadError("invalid policy at horizon " + std::to_string(h) + ": " + e.what());
        }
    }
    if (!(is >> tag) || tag != "end") throw LoadError("missing policy end marker");
    return Policy(first, std::move(rules));
}

} // namespace fbrl
