#include "fbrl/simulator.hpp"

#include "fbrl/errors.hpp"

#include <stdexcept>

namespace fbrl {

double draw_reward(const Reward& r, Rng& rng) {
    if (r.prob >= 1.0) return r.value;
    if (r.prob <= 0.0) return 0.0;
    return uniform01(rng) < r.prob ? r.value : 0.0;
}

namespace {

int draw_next(const std::vector<Transition>& row, Rng& rng) {
    if (row.size() == 1) return row[0].next;
    double u = uniform01(rng), acc = 0.0;
    int last = row.front().next;
    for (const auto& e : row) {
        if (e.prob <= 0.0) continue;
        acc += e.prob;
        last = e.next;
        if (u < acc) return e.next;
    }
    return last;
}

} // namespace

TraceSim::TraceSim(const Environment& env, Rng rng) : env_(env), rng_(std::move(rng)) {}

Obs TraceSim::reset() {
    const auto& p0 = env_.mdp->initial();
    s_ = sample_discrete(p0.data(), static_cast<int>(p0.size()), rng_);
    h_ = 1;
    active_ = true;
    ++episodes_;
    return env_.observe(1, s_, rng_);
}

StepResult TraceSim::step(int a) {
    if (!active_) throw std::logic_error("step called outside an episode");
    const LatentMdp& m = *env_.mdp;
    if (a < 0 || a >= m.num_actions()) throw std::out_of_range("action out of range");
    ++steps_;
    StepResult out;
    out.reward = draw_reward(m.reward(h_, s_, a), rng_);
    if (h_ == m.horizon()) {
        active_ = false;
        out.done = true;
        return out;
    }
    s_ = draw_next(m.transition(h_, s_, a), rng_);
    ++h_;
    out.next = env_.observe(h_, s_, rng_);
    return out;
}

ResetSim::ResetSim(const Environment& env, Rng rng) : env_(env), rng_(std::move(rng)) {}

ResetSim::Result ResetSim::query(int h, int s, int a) {
    const LatentMdp& m = *env_.mdp;
    if (h < 1 || h > m.horizon() || s < 0 || s >= m.num_states(h) || a < 0 || a >= m.num_actions())
        throw std::out_of_range("reset query outside the state space");
    ++queries_;
    Result r;
    r.reward = draw_reward(m.reward(h, s, a), rng_);
    if (h < m.horizon()) {
        r.next = draw_next(m.transition(h, s, a), rng_);
        r.next_obs = env_.observe(h + 1, r.next, rng_);
    }
    return r;
}

double ResetSim::rollout_from(int h, int s, int a, const Policy& pi, Rng& policy_rng) {
    const LatentMdp& m = *env_.mdp;
    const Policy& p = pi.pick(policy_rng);
    double total = 0.0;
    Obs o = env_.observe(h, s, rng_);
    for (int t = h; t <= m.horizon(); ++t) {
        int act = (t == h && a >= 0) ? a : p.act(t, o, policy_rng);
        Result r = query(t, s, act);
        total += r.reward;
        if (t == m.horizon()) break;
        s = r.next;
        o = std::move(r.next_obs);
    }
    return total;
}

double Trajectory::ret() const {
    double t = 0.0;
    for (double r : rewards) t += r;
    return t;
}

Trajectory rollout(TraceSim& sim, const Policy& pi, Rng& policy_rng) {
    int H = sim.env().horizon();
    if (pi.empty() || pi.first() != 1 || pi.last() < H) throw PolicyDomainError("rollout needs a policy active on [1..H]");
    const Policy& p = pi.pick(policy_rng);
    Trajectory tr;
    Obs o = sim.reset();
    for (int h = 1; h <= H; ++h) {
        tr.states.push_back(sim.latent());
        int a = p.act(h, o, policy_rng);
        StepResult r = sim.step(a);
        tr.obs.push_back(std::move(o));
        tr.actions.push_back(a);
        tr.rewards.push_back(r.reward);
        if (r.done) break;
        o = std::move(r.next);
    }
    tr.success = !tr.rewards.empty() && tr.rewards.back() >= sim.env().success_level - 1e-12;
    return tr;
}

double success_rate(const Environment& env, const Policy& pi, int episodes, std::uint64_t seed) {
    if (episodes < 1) throw std::invalid_argument("need at least one episode");
    TraceSim sim(env, make_rng(seed, "eval-env"));
    Rng prng = make_rng(seed, "eval-policy");
    int wins = 0;
    for (int e = 0; e < episodes; ++e) wins += rollout(sim, pi, prng).success ? 1 : 0;
    return static_cast<double>(wins) / episodes;
}

} // namespace fbrl
