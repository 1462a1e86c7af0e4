#include "fbrl/stationary.hpp"

#include "fbrl/mdp.hpp"

#include <cmath>
#include <stdexcept>

namespace fbrl {

StationaryMdp::StationaryMdp(int states, int actions, double reward_min, double reward_max)
    : s_(states), a_(actions), rmin_(reward_min), rmax_(reward_max),
      p_(static_cast<std::size_t>(states) * actions, Eigen::VectorXd::Zero(states)), r_(Eigen::MatrixXd::Zero(states, actions)),
      p0_(Eigen::VectorXd::Zero(states)) {
    if (states < 1 || actions < 1) throw std::invalid_argument("empty stationary MDP");
    p0_[0] = 1.0;
    for (int s = 0; s < states; ++s)
        for (int a = 0; a < actions; ++a) p_[static_cast<std::size_t>(s) * a_ + a][s] = 1.0;
}

namespace {

void check_dist(const Eigen::VectorXd& p, int n, const char* what) {
    if (p.size() != n) throw std::invalid_argument(std::string(what) + " has wrong size");
    if ((p.array() < 0.0).any()) throw std::invalid_argument(std::string(what) + " has negative entries");
    if (std::abs(p.sum() - 1.0) > kProbTol) throw std::invalid_argument(std::string(what) + " does not sum to 1");
}

} // namespace

void StationaryMdp::set_transition(int s, int a, const Eigen::VectorXd& next) {
    check_dist(next, s_, "transition row");
    p_[static_cast<std::size_t>(s) * a_ + a] = next;
}

void StationaryMdp::set_reward(int s, int a, double r) {
    if (r < rmin_ || r > rmax_) throw std::invalid_argument("reward outside declared range");
    r_(s, a) = r;
}

void StationaryMdp::set_initial(const Eigen::VectorXd& p0) {
    check_dist(p0, s_, "initial distribution");
    p0_ = p0;
}

Eigen::MatrixXd StationaryMdp::transition_matrix(const StationaryPolicy& pi) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s_, s_);
    for (int s = 0; s < s_; ++s)
        for (int a = 0; a < a_; ++a) m.row(s) += pi(s, a) * next(s, a).transpose();
    return m;
}

int StationaryMdp::step(int s, int a, Rng& rng) const {
    const Eigen::VectorXd& p = next(s, a);
    return sample_discrete(p.data(), s_, rng);
}

Eigen::VectorXd discounted_occupancy(const StationaryMdp& m, const StationaryPolicy& pi, double gamma,
                                     const Eigen::VectorXd& start) {
    Eigen::MatrixXd p = m.transition_matrix(pi);
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(m.num_states(), m.num_states()) - gamma * p.transpose();
    return (1.0 - gamma) * lhs.partialPivLu().solve(start);
}

Eigen::VectorXd stationary_v(const StationaryMdp& m, const StationaryPolicy& pi, double gamma) {
    Eigen::MatrixXd p = m.transition_matrix(pi);
    Eigen::VectorXd r(m.num_states());
    for (int s = 0; s < m.num_states(); ++s) {
        r[s] = 0.0;
        for (int a = 0; a < m.num_actions(); ++a) r[s] += pi(s, a) * m.reward(s, a);
    }
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(m.num_states(), m.num_states()) - gamma * p;
    return lhs.partialPivLu().solve(r);
}

Eigen::MatrixXd stationary_q(const StationaryMdp& m, const StationaryPolicy& pi, double gamma) {
    Eigen::VectorXd v = stationary_v(m, pi, gamma);
    Eigen::MatrixXd q(m.num_states(), m.num_actions());
    for (int s = 0; s < m.num_states(); ++s)
        for (int a = 0; a < m.num_actions(); ++a) q(s, a) = m.reward(s, a) + gamma * m.next(s, a).dot(v);
    return q;
}

double stationary_value(const StationaryMdp& m, const StationaryPolicy& pi, double gamma, const Eigen::VectorXd& start) {
    return start.dot(stationary_v(m, pi, gamma));
}

std::vector<StationaryPolicy> enumerate_deterministic(int states, int actions) {
    std::vector<StationaryPolicy> out;
    std::vector<int> idx(states, 0);
    while (true) {
        StationaryPolicy p = StationaryPolicy::Zero(states, actions);
        for (int s = 0; s < states; ++s) p(s, idx[s]) = 1.0;
        out.push_back(std::move(p));
        int k = states - 1;
        while (k >= 0 && ++idx[k] == actions) idx[k--] = 0;
        if (k < 0) break;
    }
    return out;
}

StationaryPolicy uniform_stationary(int states, int actions) {
    return StationaryPolicy::Constant(states, actions, 1.0 / actions);
}

namespace {

int act(const StationaryPolicy& pi, int s, Rng& rng) {
    Eigen::VectorXd row = pi.row(s).transpose();
    return sample_discrete(row.data(), static_cast<int>(row.size()), rng);
}

} // namespace

int geometric_rollin(const StationaryMdp& m, const StationaryPolicy& first, const StationaryPolicy& second, double gamma,
                     Rng& rng) {
    const Eigen::VectorXd& p0 = m.initial();
    int s = sample_discrete(p0.data(), m.num_states(), rng);
    while (uniform01(rng) < gamma) s = m.step(s, act(first, s, rng), rng);
    while (uniform01(rng) < gamma) s = m.step(s, act(second, s, rng), rng);
    return s;
}

int geometric_state(const StationaryMdp& m, const StationaryPolicy& pi, double gamma, Rng& rng) {
    const Eigen::VectorXd& p0 = m.initial();
    int s = sample_discrete(p0.data(), m.num_states(), rng);
    while (uniform01(rng) < gamma) s = m.step(s, act(pi, s, rng), rng);
    return s;
}

double discounted_return(const StationaryMdp& m, const StationaryPolicy& pi, int s, int a, double gamma, int horizon,
                         Rng& rng) {
    double total = 0.0, disc = 1.0;
    for (int t = 0; t < horizon; ++t) {
        if (t > 0) a = act(pi, s, rng);
        total += disc * m.reward(s, a);
        s = m.step(s, a, rng);
        disc *= gamma;
    }
    return total;
}

StationaryMdp make_stationary_lock(int actions, std::uint64_t seed, std::vector<int>* correct) {
    if (actions < 2) throw std::invalid_argument("stationary lock needs at least two actions");
    Rng rng = make_rng(seed, "stationary-lock");
    std::vector<int> c = {uniform_int(rng, actions), uniform_int(rng, actions)};
    StationaryMdp m(3, actions, 0.0, 1.0);
    Eigen::VectorXd good(3), bad(3);
    good << 0.5, 0.5, 0.0;
    bad << 0.0, 0.0, 1.0;
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < actions; ++a) {
            m.set_transition(s, a, a == c[s] ? good : bad);
            m.set_reward(s, a, a == c[s] ? 1.0 : 0.0);
        }
    for (int a = 0; a < actions; ++a) m.set_transition(2, a, bad);
    Eigen::VectorXd p0(3);
    p0 << 0.5, 0.5, 0.0;
    m.set_initial(p0);
    if (correct) *correct = c;
    return m;
}

} // namespace fbrl
