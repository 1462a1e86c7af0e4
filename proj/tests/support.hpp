#pragma once

#include "fbrl/dp.hpp"
#include "fbrl/env.hpp"
#include "fbrl/mdp.hpp"
#include "fbrl/policy.hpp"
#include "fbrl/rng.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace fbrl::test {

/// Random dense MDP with rewards in [0,1], some of them Bernoulli.
inline LatentMdp random_mdp(int H, std::vector<int> states, int A, std::uint64_t seed) {
    Rng rng = make_rng(seed, "test-mdp");
    LatentMdp m(H, states, A, 0.0, 1.0);
    auto simplex = [&](int n) {
        std::vector<double> p(n);
        double t = 0.0;
        for (auto& x : p) t += (x = uniform01(rng) + 0.05);
        for (auto& x : p) x /= t;
        return p;
    };
    m.set_initial(simplex(states[0]));
    for (int h = 1; h <= H; ++h)
        for (int s = 0; s < states[h - 1]; ++s)
            for (int a = 0; a < A; ++a) {
                m.set_reward(h, s, a, {uniform01(rng), uniform01(rng) < 0.5 ? 1.0 : 0.5});
                if (h == H) continue;
                auto p = simplex(states[h]);
                std::vector<Transition> row;
                for (int k = 0; k < states[h]; ++k) row.push_back({k, p[k]});
                m.set_transition(h, s, a, row);
            }
    return m;
}

inline Environment latent_env(LatentMdp m, std::string id = "test") {
    Environment e;
    e.id = std::move(id);
    e.mdp = std::make_shared<const LatentMdp>(std::move(m));
    return e;
}

/// Random stochastic latent policy on [1..H].
inline Policy random_policy(const LatentMdp& m, std::uint64_t seed) {
    Rng rng = make_rng(seed, "test-policy");
    std::vector<RulePtr> rules;
    int A = m.num_actions();
    for (int h = 1; h <= m.horizon(); ++h) {
        int S = m.num_states(h);
        std::vector<double> t(static_cast<std::size_t>(S) * A);
        for (int s = 0; s < S; ++s) {
            double z = 0.0;
            for (int a = 0; a < A; ++a) z += (t[s * A + a] = uniform01(rng) + 0.1);
            for (int a = 0; a < A; ++a) t[s * A + a] /= z;
        }
        rules.push_back(std::make_shared<TabularRule>(S, A, t));
    }
    return Policy(1, std::move(rules));
}

inline Policy deterministic(const std::vector<std::vector<int>>& acts, int A, int first = 1) {
    std::vector<RulePtr> rules;
    for (const auto& a : acts) rules.push_back(TabularRule::from_actions(a, A));
    return Policy(first, std::move(rules));
}

inline double tv(const std::vector<double>& p, const std::vector<double>& q) {
    double t = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) t += std::abs(p[i] - q[i]);
    return 0.5 * t;
}

} // namespace fbrl::test
