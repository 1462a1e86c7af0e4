#include "fbrl/backward.hpp"

#include "fbrl/errors.hpp"
#include "fbrl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fbrl {

FitShape backward_shape(const Environment& env, int h) {
    const LatentMdp& m = *env.mdp;
    int steps = m.horizon() - h + 1;
    return {m.num_states(h), env.feature_dim(h), m.num_actions(), steps * std::min(0.0, m.reward_min()),
            steps * std::max(0.0, m.reward_max())};
}

namespace {

QPtr fit_horizon(const std::vector<QSample>& data, const BackwardConfig& cfg, const FitShape& shape, int h, Rng& rng) {
    if (cfg.q.finite()) {
        if (static_cast<int>(cfg.q.members.size()) < h) throw ConfigError("finite value class misses horizon " + std::to_string(h));
        return select_least_squares(data, cfg.q.members[h - 1], shape.lo, shape.hi);
    }
    return fit_least_squares(data, cfg.q.spec, shape, rng);
}

void check_backward(const Environment& env, const BackwardConfig& cfg) {
    if (cfg.N < 1) throw ConfigError("backward phase needs N >= 1");
    if (env.rich() && !cfg.q.finite() && cfg.q.spec.kind == QKind::tabular)
        throw ConfigError("tabular regressors need latent observations");
}

} // namespace

BackwardResult psdp_trace(const Environment& env, const Policy& roll_in, const BackwardConfig& cfg, std::uint64_t seed,
                          const BackwardHook& hook) {
    check_backward(env, cfg);
    int H = env.horizon(), A = env.num_actions();
    if (H > 1 && (roll_in.empty() || roll_in.first() != 1 || roll_in.last() < H - 1))
        throw PolicyDomainError("roll-in policy must cover [1..H-1]");
    TraceSim sim(env, make_rng(seed, "backward-env"));
    Rng prng = make_rng(seed, "backward-policy");
    Rng frng = make_rng(seed, "backward-fit");
    BackwardResult out;
    out.q.assign(H, nullptr);
    std::vector<RulePtr> rules(H);
    for (int h = H; h >= 1; --h) {
        Policy suffix = h < H ? Policy(h + 1, std::vector<RulePtr>(rules.begin() + h, rules.end())) : Policy();
        std::vector<QSample> data;
        data.reserve(cfg.N);
        for (int n = 0; n < cfg.N; ++n) {
            const Policy& in = roll_in.pick(prng);
            Obs o = sim.reset();
            for (int t = 1; t < h; ++t) o = sim.step(in.act(t, o, prng)).next;
            int a = uniform_int(prng, A);
            Obs s = o;
            StepResult r = sim.step(a);
            double y = r.reward;
            for (int t = h + 1; t <= H; ++t) {
                r = sim.step(suffix.act(t, r.next, prng));
                y += r.reward;
            }
            data.push_back({std::move(s), a, y});
        }
        out.episodes += cfg.N;
        out.q[h - 1] = fit_horizon(data, cfg, backward_shape(env, h), h, frng);
        rules[h - 1] = std::make_shared<GreedyRule>(out.q[h - 1]);
        if (hook) hook(h, Policy(h, std::vector<RulePtr>(rules.begin() + (h - 1), rules.end())), out.episodes);
    }
    out.policy = Policy(1, std::move(rules));
    return out;
}

BackwardResult psdp_reset(const Environment& env, const StateOnlyDataset& off, const BackwardConfig& cfg, std::uint64_t seed,
                          const BackwardHook& hook) {
    check_backward(env, cfg);
    int H = env.horizon(), A = env.num_actions();
    if (off.horizon != H) throw ConfigError("offline data horizon does not match the environment");
    off.validate();
    ResetSim sim(env, make_rng(seed, "backward-env"));
    Rng prng = make_rng(seed, "backward-policy");
    Rng frng = make_rng(seed, "backward-fit");
    BackwardResult out;
    out.q.assign(H, nullptr);
    std::vector<RulePtr> rules(H);
    for (int h = H; h >= 1; --h) {
        Policy suffix = h < H ? Policy(h + 1, std::vector<RulePtr>(rules.begin() + h, rules.end())) : Policy();
        const auto& pool = off.at(h);
        std::vector<QSample> data;
        data.reserve(cfg.N);
        for (int n = 0; n < cfg.N; ++n) {
            const Obs& o = pool[uniform_int(prng, static_cast<int>(pool.size()))];
            int s = env.decode(h, o);
            if (s < 0 || s >= env.mdp->num_states(h))
                throw std::out_of_range("offline state " + std::to_string(s) + " invalid at horizon " + std::to_string(h));
            int a = uniform_int(prng, A);
            data.push_back({o, a, sim.rollout_from(h, s, a, suffix, prng)});
        }
        out.episodes += cfg.N;
        out.q[h - 1] = fit_horizon(data, cfg, backward_shape(env, h), h, frng);
        rules[h - 1] = std::make_shared<GreedyRule>(out.q[h - 1]);
        if (hook) hook(h, Policy(h, std::vector<RulePtr>(rules.begin() + (h - 1), rules.end())), out.episodes);
    }
    out.queries = sim.queries();
    out.policy = Policy(1, std::move(rules));
    return out;
}

int cpi_iteration_bound(double gamma, double eps) { return static_cast<int>(std::ceil(8.0 * gamma / (eps * eps) - 1e-12)); }

namespace {

double advantage_scale(const StationaryMdp& m, double gamma) {
    double range = m.reward_max() - m.reward_min();
    if (!(range > 0.0)) range = 1.0;
    return (1.0 - gamma) / range;
}

} // namespace

double exact_advantage(const StationaryMdp& m, const StationaryPolicy& roll_in, const StationaryPolicy& base,
                       const StationaryPolicy& cand, double gamma) {
    Eigen::VectorXd start = discounted_occupancy(m, roll_in, gamma, m.initial());
    Eigen::VectorXd d = discounted_occupancy(m, base, gamma, start);
    Eigen::MatrixXd q = stationary_q(m, base, gamma);
    double adv = 0.0;
    for (int s = 0; s < m.num_states(); ++s) adv += d[s] * (cand.row(s) - base.row(s)).dot(q.row(s));
    return adv * advantage_scale(m, gamma);
}

std::vector<AdvantageSample> sample_advantage_data(const StationaryMdp& m, const StationaryPolicy& roll_in,
                                                   const StationaryPolicy& base, double gamma, int budget, int horizon,
                                                   Rng& rng) {
    if (budget < 1) throw ConfigError("advantage estimation needs a budget >= 1");
    if (horizon <= 0) horizon = static_cast<int>(std::ceil(5.0 / (1.0 - gamma)));
    std::vector<AdvantageSample> out;
    out.reserve(budget);
    for (int i = 0; i < budget; ++i) {
        int s = geometric_rollin(m, roll_in, base, gamma, rng);
        int a = uniform_int(rng, m.num_actions());
        out.push_back({s, a, discounted_return(m, base, s, a, gamma, horizon, rng)});
    }
    return out;
}

double estimate_advantage(const std::vector<AdvantageSample>& data, const StationaryMdp& m, const StationaryPolicy& base,
                          const StationaryPolicy& cand, double gamma) {
    if (data.empty()) throw ConfigError("advantage estimation needs samples");
    double A = m.num_actions(), sum = 0.0;
    for (const auto& d : data) sum += A * d.q * (cand(d.s, d.a) - base(d.s, d.a));
    return sum / data.size() * advantage_scale(m, gamma);
}

double estimate_advantage(const StationaryMdp& m, const StationaryPolicy& roll_in, const StationaryPolicy& base,
                          const StationaryPolicy& cand, double gamma, int budget, int horizon, Rng& rng) {
    return estimate_advantage(sample_advantage_data(m, roll_in, base, gamma, budget, horizon, rng), m, base, cand, gamma);
}

CpiResult cpi_trace(const StationaryMdp& m, const StationaryPolicy& roll_in, const std::vector<StationaryPolicy>& candidates,
                    const StationaryPolicy& init, const CpiConfig& cfg, std::uint64_t seed) {
    if (!(cfg.eps > 0.0)) throw ConfigError("CPI needs eps > 0");
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw ConfigError("alpha must lie in (0,1]");
    if (cfg.max_iters < 1) throw ConfigError("CPI needs max_iters >= 1");
    if (candidates.empty()) throw ConfigError("empty policy class");
    Rng rng = make_rng(seed, "cpi");
    CpiResult res;
    res.policy = init;
    res.components = {init};
    res.weights = {1.0};
    for (int t = 1; t <= cfg.max_iters; ++t) {
        CpiIteration it;
        it.t = t;
        std::vector<double> score(candidates.size());
        std::vector<AdvantageSample> pick_data;
        if (!cfg.exact) pick_data = sample_advantage_data(m, roll_in, res.policy, cfg.gamma, cfg.budget, cfg.horizon, rng);
        for (std::size_t j = 0; j < candidates.size(); ++j)
            score[j] = cfg.exact ? exact_advantage(m, roll_in, res.policy, candidates[j], cfg.gamma)
                                 : estimate_advantage(pick_data, m, res.policy, candidates[j], cfg.gamma);
        it.candidate = static_cast<int>(std::max_element(score.begin(), score.end()) - score.begin());
        const StationaryPolicy& cand = candidates[it.candidate];
        if (cfg.exact) {
            it.advantage = score[it.candidate];
        } else {
            it.advantage = estimate_advantage(m, roll_in, res.policy, cand, cfg.gamma, cfg.budget, cfg.horizon, rng);
            res.samples += 2L * cfg.budget;
        }
        it.samples = res.samples;
        res.iterations = t;
        if (it.advantage <= cfg.eps) {
            res.log.push_back(it);
            res.terminated = true;
            break;
        }
        double alpha = cfg.alpha > 0.0 ? cfg.alpha : std::min(1.0, (1.0 - cfg.gamma) * it.advantage / (4.0 * cfg.gamma));
        it.alpha = alpha;
        res.log.push_back(it);
        res.policy = (1.0 - alpha) * res.policy + alpha * cand;
        for (double& w : res.weights) w *= 1.0 - alpha;
        res.components.push_back(cand);
        res.weights.push_back(alpha);
    }
    return res;
}

} // namespace fbrl
