#include "fbrl/mdp.hpp"

#include "fbrl/errors.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fbrl {

namespace {

std::string where(int h, int s, int a) {
    std::ostringstream os;
    os << "(h=" << h << ", s=" << s << ", a=" << a << ")";
    return os.str();
}

double row_sum(const std::vector<Transition>& row) {
    double t = 0.0;
    for (const auto& e : row) t += e.prob;
    return t;
}

} // namespace

LatentMdp::LatentMdp(int horizon, std::vector<int> states, int actions, double reward_min, double reward_max)
    : horizon_(horizon), states_(std::move(states)), actions_(actions), rmin_(reward_min), rmax_(reward_max) {
    if (horizon_ < 1) throw std::invalid_argument("horizon must be positive");
    if (static_cast<int>(states_.size()) != horizon_) throw std::invalid_argument("need one state count per horizon");
    if (actions_ < 1) throw std::invalid_argument("action count must be positive");
    if (!(rmin_ <= rmax_)) throw std::invalid_argument("empty reward range");
    for (int n : states_)
        if (n < 1) throw std::invalid_argument("state count must be positive");
    trans_.resize(horizon_);
    rewards_.resize(horizon_);
    for (int h = 1; h <= horizon_; ++h) {
        std::size_t n = static_cast<std::size_t>(states_[h - 1]) * actions_;
        if (h < horizon_) trans_[h - 1].resize(n);
        rewards_[h - 1].assign(n, Reward{0.0, 1.0});
    }
    p0_.assign(states_[0], 0.0);
    p0_[0] = 1.0;
}

int LatentMdp::num_states(int h) const {
    if (h < 1 || h > horizon_) throw std::out_of_range("horizon out of range");
    return states_[h - 1];
}

void LatentMdp::check_index(int h, int s, int a) const {
    if (h < 1 || h > horizon_ || s < 0 || s >= states_[h - 1] || a < 0 || a >= actions_)
        throw std::out_of_range("index out of range " + where(h, s, a));
}

std::size_t LatentMdp::slot(int, int s, int a) const {
    return static_cast<std::size_t>(s) * actions_ + a;
}

void LatentMdp::set_transition(int h, int s, int a, std::vector<Transition> row) {
    check_index(h, s, a);
    if (h == horizon_) throw std::invalid_argument("no transitions out of the last horizon");
    for (const auto& e : row) {
        if (e.next < 0 || e.next >= states_[h]) throw std::invalid_argument("next state out of range " + where(h, s, a));
        if (!(e.prob >= 0.0)) throw std::invalid_argument("negative probability " + where(h, s, a));
    }
    if (std::abs(row_sum(row) - 1.0) > kProbTol) throw std::invalid_argument("transition row does not sum to 1 " + where(h, s, a));
    trans_[h - 1][slot(h, s, a)] = std::move(row);
}

void LatentMdp::set_reward(int h, int s, int a, Reward r) {
    check_index(h, s, a);
    if (r.prob < 0.0 || r.prob > 1.0) throw std::invalid_argument("reward probability outside [0,1] " + where(h, s, a));
    if (r.value < rmin_ || r.value > rmax_) throw std::invalid_argument("reward outside declared range " + where(h, s, a));
    if (r.prob < 1.0 && (0.0 < rmin_ || 0.0 > rmax_)) throw std::invalid_argument("zero reward outside declared range " + where(h, s, a));
    rewards_[h - 1][slot(h, s, a)] = r;
}

void LatentMdp::set_initial(std::vector<double> p0) {
    if (static_cast<int>(p0.size()) != states_[0]) throw std::invalid_argument("initial distribution has wrong size");
    double t = 0.0;
    for (double p : p0) {
        if (!(p >= 0.0)) throw std::invalid_argument("negative initial probability");
        t += p;
    }
    if (std::abs(t - 1.0) > kProbTol) throw std::invalid_argument("initial distribution does not sum to 1");
    p0_ = std::move(p0);
}

const std::vector<Transition>& LatentMdp::transition(int h, int s, int a) const {
    check_index(h, s, a);
    if (h == horizon_) throw std::out_of_range("no transitions out of the last horizon");
    return trans_[h - 1][slot(h, s, a)];
}

const Reward& LatentMdp::reward(int h, int s, int a) const {
    check_index(h, s, a);
    return rewards_[h - 1][slot(h, s, a)];
}

std::vector<double> LatentMdp::next_distribution(int h, int s, int a) const {
    std::vector<double> out(states_[h], 0.0);
    for (const auto& e : transition(h, s, a)) out[e.next] += e.prob;
    return out;
}

void LatentMdp::validate() const {
    for (int h = 1; h < horizon_; ++h)
        for (int s = 0; s < states_[h - 1]; ++s)
            for (int a = 0; a < actions_; ++a)
                if (std::abs(row_sum(trans_[h - 1][slot(h, s, a)]) - 1.0) > kProbTol)
                    throw std::invalid_argument("transition row unset or unnormalized " + where(h, s, a));
}

void save_mdp(const LatentMdp& mdp, std::ostream& os) {
    auto old = os.precision(17);
    os << "fbrl-mdp 1\n";
    os << "horizon " << mdp.horizon() << "\n";
    os << "actions " << mdp.num_actions() << "\n";
    os << "states";
    for (int n : mdp.states()) os << ' ' << n;
    os << "\nreward_range " << mdp.reward_min() << ' ' << mdp.reward_max() << "\n";
    os << "initial";
    for (double p : mdp.initial()) os << ' ' << p;
    os << "\n";
    for (int h = 1; h <= mdp.horizon(); ++h)
        for (int s = 0; s < mdp.num_states(h); ++s)
            for (int a = 0; a < mdp.num_actions(); ++a) {
                const Reward& r = mdp.reward(h, s, a);
                os << "row " << h << ' ' << s << ' ' << a << ' ' << r.value << ' ' << r.prob;
                if (h < mdp.horizon()) {
                    const auto& row = mdp.transition(h, s, a);
                    os << ' ' << row.size();
                    for (const auto& e : row) os << ' ' << e.next << ' ' << e.prob;
                } else {
                    os << " 0";
                }
                os << "\n";
            }
    os << "end\n";
    os.precision(old);
}

namespace {

void expect(std::istream& is, const std::string& key) {
    std::string tok;
    if (!(is >> tok) || tok != key) throw LoadError("expected '" + key + "'" + (tok.empty() ? "" : ", got '" + tok + "'"));
}

template <class T>
T read(std::istream& is, const char* what) {
    T v;
    if (!(is >> v)) throw LoadError(std::string("truncated input reading ") + what);
    return v;
}

/// Renormalizes rows within 1e-6 of one; rejects the rest.
void renormalize(std::vector<double>& p, const std::string& ctx) {
    double t = 0.0;
    for (double x : p) t += x;
    if (std::abs(t - 1.0) > 1e-6) throw LoadError("distribution does not sum to 1 at " + ctx);
    if (std::abs(t - 1.0) > kProbTol)
        for (double& x : p) x /= t;
}

} // namespace

LatentMdp load_mdp(std::istream& is) {
    expect(is, "fbrl-mdp");
    if (read<int>(is, "version") != 1) throw LoadError("unsupported mdp schema version");
    expect(is, "horizon");
    int H = read<int>(is, "horizon");
    expect(is, "actions");
    int A = read<int>(is, "actions");
    if (H < 1 || A < 1) throw LoadError("bad header");
    expect(is, "states");
    std::vector<int> states(H);
    for (int& n : states) n = read<int>(is, "state counts");
    expect(is, "reward_range");
    double lo = read<double>(is, "reward range");
    double hi = read<double>(is, "reward range");
    LatentMdp mdp(H, states, A, lo, hi);
    expect(is, "initial");
    std::vector<double> p0(states[0]);
    for (double& p : p0) p = read<double>(is, "initial distribution");
    renormalize(p0, "initial distribution");
    mdp.set_initial(p0);
    for (int h = 1; h <= H; ++h)
        for (int s = 0; s < states[h - 1]; ++s)
            for (int a = 0; a < A; ++a) {
                std::string ctx = "horizon " + std::to_string(h) + " state " + std::to_string(s) + " action " + std::to_string(a);
                std::string tok;
                if (!(is >> tok) || tok != "row") throw LoadError("missing row at " + ctx);
                int rh = read<int>(is, "row"), rs = read<int>(is, "row"), ra = read<int>(is, "row");
                if (rh != h || rs != s || ra != a) throw LoadError("rows out of order at " + ctx);
                Reward r{read<double>(is, "reward"), read<double>(is, "reward")};
                int k = read<int>(is, "row length");
                std::vector<int> next(k);
                std::vector<double> prob(k);
                for (int i = 0; i < k; ++i) {
                    next[i] = read<int>(is, "transition");
                    prob[i] = read<double>(is, "transition");
                }
                try {
                    mdp.set_reward(h, s, a, r);
                    if (h < H) {
                        renormalize(prob, ctx);
                        std::vector<Transition> row(k);
                        for (int i = 0; i < k; ++i) row[i] = {next[i], prob[i]};
                        mdp.set_transition(h, s, a, std::move(row));
                    } else if (k != 0) {
                        throw LoadError("transitions listed at the last horizon");
                    }
                } catch (const std::invalid_argument& e) {
                    throw LoadError(std::string(e.what()) + " at " + ctx);
                }
            }
    expect(is, "end");
    return mdp;
}

} // namespace fbrl
