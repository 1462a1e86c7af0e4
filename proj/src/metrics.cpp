#include "fbrl/metrics.hpp"

#include "fbrl/errors.hpp"
#include "fbrl/simulator.hpp"

#include <cmath>
#include <limits>

namespace fbrl {

std::string to_string(CoverageKind k) {
    switch (k) {
    case CoverageKind::density_ratio: return "density-ratio";
    case CoverageKind::forward_policy: return "forward-policy";
    case CoverageKind::perf_diff: return "performance-difference";
    }
    return "?";
}

CoverageReport coverage_density_ratio(const Occupancy& target, const Occupancy& reference, CoverageKind kind) {
    CoverageReport r;
    r.kind = kind;
    std::size_t H = std::min(target.size(), reference.size());
    if (H == 0) throw std::invalid_argument("coverage needs at least one horizon");
    for (std::size_t h = 0; h < H; ++h) {
        if (target[h].size() != reference[h].size()) throw std::invalid_argument("state counts differ at horizon " + std::to_string(h + 1));
        double best = 0.0;
        bool inf = false;
        for (std::size_t s = 0; s < target[h].size(); ++s) {
            double num = target[h][s], den = reference[h][s];
            if (den > 0.0) {
                best = std::max(best, num / den);
            } else if (num > 0.0) {
                if (!inf && !r.infinite) {
                    r.witness_h = static_cast<int>(h) + 1;
                    r.witness_s = static_cast<int>(s);
                }
                inf = true;
            }
        }
        r.infinite = r.infinite || inf;
        r.per_horizon.push_back(inf ? std::numeric_limits<double>::infinity() : best);
        if (!inf) r.aggregate = std::max(r.aggregate, best);
    }
    return r;
}

CoverageReport coverage_density_ratio(const LatentMdp& mdp, const Policy& target, const Occupancy& reference, const ObsFn& obs) {
    return coverage_density_ratio(exact_occupancy(mdp, target, obs), reference);
}

Occupancy dataset_marginals(const StateOnlyDataset& d, const Environment& env) {
    d.validate();
    Occupancy out;
    for (int h = 1; h <= d.horizon; ++h) {
        std::vector<double> m(env.mdp->num_states(h), 0.0);
        for (const auto& o : d.at(h)) {
            int s = env.decode(h, o);
            if (s < 0 || s >= static_cast<int>(m.size())) throw std::out_of_range("dataset state out of range at horizon " + std::to_string(h));
            m[s] += 1.0;
        }
        for (double& x : m) x /= d.at(h).size();
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<Policy> enumerate_deterministic_policies(const LatentMdp& mdp, long cap) {
    int H = mdp.horizon(), A = mdp.num_actions();
    double count = 1.0;
    for (int h = 1; h <= H; ++h) count *= std::pow(static_cast<double>(A), mdp.num_states(h));
    if (count > static_cast<double>(cap)) throw ConfigError("too many deterministic policies to enumerate");
    // One digit per (h, s); the last digit varies fastest.
    std::vector<std::pair<int, int>> slots;
    for (int h = 1; h <= H; ++h)
        for (int s = 0; s < mdp.num_states(h); ++s) slots.push_back({h, s});
    std::vector<int> digits(slots.size(), 0);
    std::vector<Policy> out;
    while (true) {
        std::vector<RulePtr> rules;
        std::size_t k = 0;
        for (int h = 1; h <= H; ++h) {
            std::vector<int> acts(mdp.num_states(h));
            for (int s = 0; s < mdp.num_states(h); ++s) acts[s] = digits[k++];
            rules.push_back(TabularRule::from_actions(acts, A));
        }
        out.emplace_back(1, std::move(rules));
        int i = static_cast<int>(digits.size()) - 1;
        while (i >= 0 && ++digits[i] == A) digits[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

CoverageReport coverage_perf_diff(const LatentMdp& mdp, const Policy& target, const Occupancy& reference,
                                  std::vector<Policy> comparators) {
    if (comparators.empty()) comparators = enumerate_deterministic_policies(mdp);
    int H = mdp.horizon();
    Occupancy d = exact_occupancy(mdp, target);
    if (static_cast<int>(reference.size()) < H || static_cast<int>(d.size()) < H)
        throw std::invalid_argument("coverage needs marginals for every horizon");
    CoverageReport r;
    r.kind = CoverageKind::perf_diff;
    bool any = false;
    for (std::size_t k = 0; k < comparators.size(); ++k) {
        QTables q = exact_q(mdp, comparators[k]);
        std::vector<Eigen::VectorXd> v = exact_v(mdp, comparators[k]);
        double num = 0.0, den = 0.0;
        for (int h = 1; h <= H; ++h)
            for (int s = 0; s < mdp.num_states(h); ++s) {
                double adv = q[h - 1].row(s).maxCoeff() - v[h - 1][s];
                num += d[h - 1][s] * adv;
                den += reference[h - 1][s] * adv;
            }
        double ratio;
        if (den > 1e-15) {
            ratio = num / den;
        } else if (num > 1e-15) {
            if (!r.infinite) r.witness_policy = static_cast<long>(k);
            r.infinite = true;
            continue;
        } else {
            ratio = 1.0;
        }
        if (!any || ratio > r.aggregate) {
            r.aggregate = ratio;
            if (!r.infinite) r.witness_policy = static_cast<long>(k);
        }
        any = true;
    }
    r.per_horizon = {r.infinite ? std::numeric_limits<double>::infinity() : r.aggregate};
    return r;
}

namespace {

std::vector<double> second_marginal(const LatentMdp& mdp, const std::vector<double>& w) {
    if (mdp.horizon() < 2 || mdp.num_states(1) != 1) throw std::invalid_argument("single-decision MDP expected");
    std::vector<double> d(mdp.num_states(2), 0.0);
    for (int a = 0; a < mdp.num_actions(); ++a) {
        if (w[a] == 0.0) continue;
        auto p = mdp.next_distribution(1, 0, a);
        for (std::size_t s = 0; s < d.size(); ++s) d[s] += w[a] * p[s];
    }
    return d;
}

} // namespace

TvMinimizer tv_minimizing_policy(const LatentMdp& mdp, const std::vector<double>& mu) {
    TvMinimizer best;
    int A = mdp.num_actions();
    for (int a = 0; a < A; ++a) {
        std::vector<double> w(A, 0.0);
        w[a] = 1.0;
        double tv = divergences(second_marginal(mdp, w), mu).tv;
        if (best.action < 0 || tv < best.tv) best = {w, a, tv};
    }
    return best;
}

TvMinimizer tv_minimizing_mixture(const LatentMdp& mdp, const std::vector<double>& mu, double resolution) {
    if (mdp.num_actions() != 2) throw std::invalid_argument("mixture grid needs two actions");
    if (!(resolution > 0.0 && resolution <= 1.0)) throw std::invalid_argument("grid resolution must lie in (0,1]");
    long n = std::lround(1.0 / resolution);
    TvMinimizer best;
    best.tv = std::numeric_limits<double>::infinity();
    for (long i = 0; i <= n; ++i) {
        double p = static_cast<double>(i) / n;
        std::vector<double> w = {p, 1.0 - p};
        double tv = divergences(second_marginal(mdp, w), mu).tv;
        if (tv < best.tv) best = {w, p == 1.0 ? 0 : (p == 0.0 ? 1 : -1), tv};
    }
    return best;
}

double relative_success(const Environment& env, const Policy& pi, int episodes, double optimal_rate, std::uint64_t seed) {
    if (!(optimal_rate > 0.0)) throw std::invalid_argument("optimal success rate must be positive");
    return success_rate(env, pi, episodes, seed) / optimal_rate;
}

Divergences divergences(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("distributions have different supports");
    Divergences d;
    auto kl_half = [](double a, double m) { return a > 0.0 ? a * std::log(a / m) : 0.0; };
    for (std::size_t i = 0; i < p.size(); ++i) {
        d.tv += std::abs(p[i] - q[i]);
        double m = 0.5 * (p[i] + q[i]);
        d.js += 0.5 * (kl_half(p[i], m) + kl_half(q[i], m));
    }
    d.tv *= 0.5;
    d.js = std::max(0.0, d.js);
    return d;
}

} // namespace fbrl
