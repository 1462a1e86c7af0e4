#include "fbrl/envs.hpp"

#include "fbrl/errors.hpp"

#include <memory>
#include <string>

namespace fbrl {

namespace {

std::shared_ptr<const HadamardEncoder> encoder_for(int H, ObsMode mode) {
    if (mode == ObsMode::latent) return nullptr;
    return std::make_shared<const HadamardEncoder>(H, 3, 0.1);
}

std::vector<std::array<int, 2>> draw_correct(int H, std::uint64_t seed, int A) {
    Rng rng = make_rng(seed, "lock-actions");
    std::vector<std::array<int, 2>> c(H);
    for (auto& p : c) {
        p[0] = uniform_int(rng, A);
        p[1] = uniform_int(rng, A);
    }
    return c;
}

Policy lock_optimal(const std::vector<std::array<int, 2>>& c, int A, const std::shared_ptr<const HadamardEncoder>& enc) {
    std::vector<RulePtr> rules;
    for (const auto& p : c) {
        auto t = TabularRule::from_actions({p[0], p[1], 0}, A);
        if (enc) rules.push_back(std::make_shared<DecodingRule>(enc, t));
        else rules.push_back(t);
    }
    return Policy(1, std::move(rules));
}

LatentMdp lock_mdp(int H, const std::vector<std::array<int, 2>>& c, int A) {
    LatentMdp m(H, std::vector<int>(H, 3), A, kLockPenalty, 1.0);
    m.set_initial({0.5, 0.5, 0.0});
    for (int h = 1; h <= H; ++h)
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < A; ++a) {
                bool good = s < 2;
                if (h == H) {
                    if (good) m.set_reward(h, s, a, {1.0, 1.0});
                    continue;
                }
                if (good && a == c[h - 1][s]) {
                    m.set_transition(h, s, a, {{0, 0.5}, {1, 0.5}});
                } else {
                    m.set_transition(h, s, a, {{2, 1.0}});
                    if (good) m.set_reward(h, s, a, {kLockPenalty, kLockPenaltyProb});
                }
            }
    return m;
}

} // namespace

CombLock make_comb_lock(int H, std::uint64_t seed, ObsMode mode, int actions) {
    if (H < 2) throw std::invalid_argument("combination lock needs H >= 2");
    CombLock out;
    out.correct = draw_correct(H, seed, actions);
    out.env.id = "lock";
    out.env.mdp = std::make_shared<const LatentMdp>(lock_mdp(H, out.correct, actions));
    out.env.encoder = encoder_for(H, mode);
    out.optimal = lock_optimal(out.correct, actions, out.env.encoder);
    return out;
}

CombLock make_adversarial_lock(int H, std::uint64_t seed, ObsMode mode, int actions) {
    if (H < 3) throw std::invalid_argument("adversarial lock needs H >= 3");
    CombLock out;
    out.correct = draw_correct(H, seed, actions);
    LatentMdp m = lock_mdp(H, out.correct, actions);
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < actions; ++a) {
            if (a == out.correct[0][s]) {
                m.set_transition(1, s, a, {{0, 0.1}, {1, 0.9}});
            } else {
                m.set_transition(1, s, a, {{1, 0.05}, {2, 0.95}});
                m.set_reward(1, s, a, {kLockPenalty, kLockPenaltyProb * 0.95});
            }
        }
    for (int a = 0; a < actions; ++a) {
        m.set_transition(2, 1, a, {{2, 1.0}});
        m.set_reward(2, 1, a, {0.0, 1.0});
    }
    out.env.id = "lock-adversarial";
    out.env.mdp = std::make_shared<const LatentMdp>(std::move(m));
    out.env.encoder = encoder_for(H, mode);
    out.optimal = lock_optimal(out.correct, actions, out.env.encoder);
    return out;
}

HardnessTree make_binary_tree(int H, std::uint64_t seed, int branching) {
    if (H < 2 || H > 24) throw std::invalid_argument("tree depth must be in [2, 24]");
    if (branching < 2) throw std::invalid_argument("tree branching must be at least 2");
    int A = branching;
    std::vector<int> states(H);
    long long n = 1;
    for (int h = 1; h <= H; ++h) {
        if (n > (1LL << 26)) throw std::invalid_argument("tree too large");
        states[h - 1] = static_cast<int>(n);
        n *= A;
    }
    Rng rng = make_rng(seed, "tree");
    HardnessTree out;
    out.branching = A;
    out.path.assign(H, 0);
    out.distractor.assign(H, 0);
    std::vector<int> acts(H, 0);
    for (int h = 1; h < H; ++h) {
        acts[h - 1] = uniform_int(rng, A);
        out.path[h] = tree_child(out.path[h - 1], acts[h - 1], A);
    }
    // Distractors live outside the subtree of the first optimal action.
    for (int h = 2; h <= H; ++h) {
        long long width = states[h - 1] / A;
        int root_child = acts[0];
        std::vector<int> eligible;
        for (long long k = 0; k < states[h - 1]; ++k) {
            int node = static_cast<int>(k);
            if (node / width == root_child) continue;
            if (h >= 4 && node / A == out.distractor[h - 2]) continue;
            eligible.push_back(node);
        }
        out.distractor[h - 1] = eligible[uniform_int(rng, static_cast<int>(eligible.size()))];
    }
    LatentMdp m(H, states, A, 0.0, 1.0);
    m.set_initial({1.0});
    for (int h = 1; h < H; ++h)
        for (int s = 0; s < states[h - 1]; ++s)
            for (int a = 0; a < A; ++a) m.set_transition(h, s, a, {{tree_child(s, a, A), 1.0}});
    for (int a = 0; a < A; ++a) m.set_reward(H, out.path[H - 1], a, {1.0, 1.0});
    out.env.id = "tree";
    out.env.mdp = std::make_shared<const LatentMdp>(std::move(m));
    std::vector<RulePtr> rules;
    for (int h = 1; h <= H; ++h) {
        std::vector<int> a(states[h - 1], 0);
        if (h < H) a[out.path[h - 1]] = acts[h - 1];
        rules.push_back(TabularRule::from_actions(a, A));
    }
    out.optimal = Policy(1, std::move(rules));
    out.dataset.env_id = "tree";
    out.dataset.horizon = H;
    out.dataset.provenance = Provenance::tree_construction;
    out.dataset.seed = seed;
    for (int h = 1; h <= H; ++h) out.dataset.data.push_back({latent_obs(out.path[h - 1], states[h - 1]), latent_obs(out.distractor[h - 1], states[h - 1])});
    return out;
}

OneStepHardness make_one_step_hardness() {
    LatentMdp m(2, {1, 3}, 2, 0.0, 1.0);
    m.set_initial({1.0});
    m.set_transition(1, 0, 0, {{0, 0.95}, {1, 0.05}, {2, 0.0}});
    m.set_transition(1, 0, 1, {{0, 0.0}, {1, 0.9}, {2, 0.1}});
    m.set_reward(2, 2, 0, {1.0, 1.0});
    m.set_reward(2, 2, 1, {1.0, 1.0});
    OneStepHardness out;
    out.env.id = "onestep";
    out.env.mdp = std::make_shared<const LatentMdp>(std::move(m));
    out.mu = {0.85, 0.05, 0.1};
    out.optimal = Policy(1, {TabularRule::from_actions({1}, 2), TabularRule::from_actions({0, 0, 0}, 2)});
    return out;
}

} // namespace fbrl
