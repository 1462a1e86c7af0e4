#include "fbrl/dp.hpp"

#include "fbrl/errors.hpp"

namespace fbrl {

ObsFn latent_obs_fn(const LatentMdp& mdp) {
    return [&mdp](int h, int s) { return latent_obs(s, mdp.num_states(h)); };
}

int argmax_lowest(const double* v, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

double success_event(const Reward& r, double level) { return r.value >= level - 1e-12 ? r.prob : 0.0; }

namespace {

const ObsFn& pick_obs(const LatentMdp& mdp, const ObsFn& obs, ObsFn& holder) {
    if (obs) return obs;
    holder = latent_obs_fn(mdp);
    return holder;
}

/// pi_h(.|s) for every state, as a dense S x A matrix.
Eigen::MatrixXd rule_matrix(const LatentMdp& mdp, const Policy& pi, int h, const ObsFn& obs) {
    int S = mdp.num_states(h), A = mdp.num_actions();
    Eigen::MatrixXd m(S, A);
    std::vector<double> buf(A);
    const auto& r = pi.rule(h);
    for (int s = 0; s < S; ++s) {
        r->probs(obs(h, s), buf.data());
        for (int a = 0; a < A; ++a) m(s, a) = buf[a];
    }
    return m;
}

} // namespace

Occupancy exact_occupancy(const LatentMdp& mdp, const Policy& pi, const ObsFn& obs_in) {
    ObsFn holder;
    const ObsFn& obs = pick_obs(mdp, obs_in, holder);
    int H = mdp.horizon();
    if (pi.is_mixture()) {
        Occupancy out;
        for (std::size_t k = 0; k < pi.parts().size(); ++k) {
            Occupancy part = exact_occupancy(mdp, pi.parts()[k], obs);
            if (out.empty()) {
                out = part;
                for (auto& v : out)
                    for (double& x : v) x = 0.0;
            }
            for (std::size_t h = 0; h < out.size(); ++h)
                for (std::size_t s = 0; s < out[h].size(); ++s) out[h][s] += pi.weights()[k] * part[h][s];
        }
        return out;
    }
    Occupancy occ;
    occ.push_back(mdp.initial());
    if (pi.empty()) return occ;
    if (pi.first() != 1) throw PolicyDomainError("occupancy needs a policy starting at horizon 1");
    int upto = std::min(H, pi.last() + 1);
    for (int h = 1; h < upto; ++h) {
        Eigen::MatrixXd m = rule_matrix(mdp, pi, h, obs);
        std::vector<double> next(mdp.num_states(h + 1), 0.0);
        const auto& cur = occ.back();
        for (int s = 0; s < mdp.num_states(h); ++s) {
            if (cur[s] == 0.0) continue;
            for (int a = 0; a < mdp.num_actions(); ++a) {
                double w = cur[s] * m(s, a);
                if (w == 0.0) continue;
                for (const auto& e : mdp.transition(h, s, a)) next[e.next] += w * e.prob;
            }
        }
        occ.push_back(std::move(next));
    }
    return occ;
}

QTables exact_q(const LatentMdp& mdp, const Policy& pi, const ObsFn& obs_in) {
    if (pi.is_mixture()) throw std::invalid_argument("exact_q is undefined for per-episode mixtures");
    ObsFn holder;
    const ObsFn& obs = pick_obs(mdp, obs_in, holder);
    int H = mdp.horizon(), A = mdp.num_actions();
    if (pi.empty() || pi.last() < H) throw PolicyDomainError("exact_q needs a policy active through horizon H");
    QTables q(H);
    Eigen::VectorXd vnext;
    for (int h = H; h >= pi.first(); --h) {
        int S = mdp.num_states(h);
        q[h - 1].resize(S, A);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                double v = mdp.reward(h, s, a).mean();
                if (h < H)
                    for (const auto& e : mdp.transition(h, s, a)) v += e.prob * vnext[e.next];
                q[h - 1](s, a) = v;
            }
        if (h > 1) vnext = (rule_matrix(mdp, pi, h, obs).cwiseProduct(q[h - 1])).rowwise().sum();
    }
    return q;
}

std::vector<Eigen::VectorXd> exact_v(const LatentMdp& mdp, const Policy& pi, const ObsFn& obs_in) {
    ObsFn holder;
    const ObsFn& obs = pick_obs(mdp, obs_in, holder);
    QTables q = exact_q(mdp, pi, obs);
    std::vector<Eigen::VectorXd> v(mdp.horizon());
    for (int h = pi.first(); h <= mdp.horizon(); ++h)
        v[h - 1] = (rule_matrix(mdp, pi, h, obs).cwiseProduct(q[h - 1])).rowwise().sum();
    return v;
}

double policy_value(const LatentMdp& mdp, const Policy& pi, const ObsFn& obs) {
    if (pi.is_mixture()) {
        double t = 0.0;
        for (std::size_t k = 0; k < pi.parts().size(); ++k) t += pi.weights()[k] * policy_value(mdp, pi.parts()[k], obs);
        return t;
    }
    if (pi.empty() || pi.first() != 1) throw PolicyDomainError("policy_value needs a policy active from horizon 1");
    auto v = exact_v(mdp, pi, obs);
    double t = 0.0;
    for (int s = 0; s < mdp.num_states(1); ++s) t += mdp.initial()[s] * v[0][s];
    return t;
}

double success_probability(const LatentMdp& mdp, const Policy& pi, double level, const ObsFn& obs_in) {
    ObsFn holder;
    const ObsFn& obs = pick_obs(mdp, obs_in, holder);
    if (pi.is_mixture()) {
        double t = 0.0;
        for (std::size_t k = 0; k < pi.parts().size(); ++k)
            t += pi.weights()[k] * success_probability(mdp, pi.parts()[k], level, obs);
        return t;
    }
    int H = mdp.horizon();
    if (pi.empty() || pi.first() != 1 || pi.last() < H) throw PolicyDomainError("success_probability needs a policy on [1..H]");
    Occupancy occ = exact_occupancy(mdp, pi, obs);
    Eigen::MatrixXd m = rule_matrix(mdp, pi, H, obs);
    double t = 0.0;
    for (int s = 0; s < mdp.num_states(H); ++s)
        for (int a = 0; a < mdp.num_actions(); ++a) t += occ[H - 1][s] * m(s, a) * success_event(mdp.reward(H, s, a), level);
    return t;
}

OptimalSolution solve_optimal(const LatentMdp& mdp) {
    int H = mdp.horizon(), A = mdp.num_actions();
    OptimalSolution sol;
    sol.q.resize(H);
    std::vector<RulePtr> rules(H);
    Eigen::VectorXd vnext;
    for (int h = H; h >= 1; --h) {
        int S = mdp.num_states(h);
        Eigen::MatrixXd& q = sol.q[h - 1];
        q.resize(S, A);
        Eigen::VectorXd v(S);
        std::vector<int> acts(S);
        for (int s = 0; s < S; ++s) {
            std::vector<double> row(A);
            for (int a = 0; a < A; ++a) {
                double x = mdp.reward(h, s, a).mean();
                if (h < H)
                    for (const auto& e : mdp.transition(h, s, a)) x += e.prob * vnext[e.next];
                q(s, a) = row[a] = x;
            }
            acts[s] = argmax_lowest(row.data(), A);
            v[s] = row[acts[s]];
        }
        rules[h - 1] = TabularRule::from_actions(acts, A);
        vnext = std::move(v);
    }
    sol.policy = Policy(1, std::move(rules));
    sol.value = 0.0;
    for (int s = 0; s < mdp.num_states(1); ++s) sol.value += mdp.initial()[s] * vnext[s];
    return sol;
}

double optimal_success_probability(const LatentMdp& mdp, double level) {
    int H = mdp.horizon(), A = mdp.num_actions();
    Eigen::VectorXd vnext;
    for (int h = H; h >= 1; --h) {
        Eigen::VectorXd v(mdp.num_states(h));
        for (int s = 0; s < mdp.num_states(h); ++s) {
            double best = 0.0;
            for (int a = 0; a < A; ++a) {
                double x = 0.0;
                if (h == H) {
                    x = success_event(mdp.reward(h, s, a), level);
                } else {
                    for (const auto& e : mdp.transition(h, s, a)) x += e.prob * vnext[e.next];
                }
                best = std::max(best, x);
            }
            v[s] = best;
        }
        vnext = std::move(v);
    }
    double t = 0.0;
    for (int s = 0; s < mdp.num_states(1); ++s) t += mdp.initial()[s] * vnext[s];
    return t;
}

} // namespace fbrl
