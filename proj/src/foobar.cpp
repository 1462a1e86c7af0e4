#include "fbrl/foobar.hpp"

#include "fbrl/errors.hpp"
#include "fbrl/simulator.hpp"

#include <string>

namespace fbrl {

FoobarRun run_foobar(const Environment& env, const StateOnlyDataset& off, const FoobarConfig& cfg, std::uint64_t seed,
                     const FoobarHooks& hooks) {
    int H = env.horizon(), A = env.num_actions();
    FoobarRun run;
    run.seed = seed;
    ForwardConfig fwd = cfg.forward;
    if (fwd.mode == ForwardMode::finite) {
        if (!cfg.backward.q.finite()) throw ConfigError("finite forward mode needs a finite value class");
        for (int h = 1; h <= H; ++h) run.discriminators.push_back(build_discriminators(cfg.backward.q, h, A));
        auto discs = run.discriminators;
        fwd.disc_class = [discs](int h) { return discs.at(h - 1); };
        if (!fwd.policy_class) {
            QClass q = cfg.backward.q;
            fwd.policy_class = [q](int h) {
                std::vector<RulePtr> rules;
                for (const auto& f : q.members.at(h - 1)) rules.push_back(std::make_shared<GreedyRule>(f));
                return rules;
            };
        }
    }
    try {
        run.forward = fail_forward(env, off, fwd, derive_seed(seed, "foobar-forward"), hooks.forward);
    } catch (const std::exception& e) {
        throw PhaseError("forward", e.what());
    }
    try {
        run.backward = psdp_trace(env, run.forward.policy, cfg.backward, derive_seed(seed, "foobar-backward"), hooks.backward);
    } catch (const std::exception& e) {
        throw PhaseError("backward", e.what());
    }
    return run;
}

Policy mixed_policy(const FoobarRun& run, int h) {
    int H = run.forward.policy.last();
    if (h < 1 || h > H + 1) throw std::out_of_range("evaluation horizon " + std::to_string(h) + " outside [1..H+1]");
    Policy prefix = h > 1 ? run.forward.policy.slice(1, h - 1) : Policy();
    Policy suffix = h <= H ? run.backward.policy.slice(h, H) : Policy();
    return compose(prefix, h, suffix);
}

double evaluate_mixed(const FoobarRun& run, int h, const Environment& env, int episodes, std::uint64_t seed) {
    return success_rate(env, mixed_policy(run, h), episodes, seed);
}

} // namespace fbrl
