#include "fbrl/separation.hpp"

#include "fbrl/errors.hpp"
#include "fbrl/simulator.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace fbrl {

SearchStrategy parse_search_strategy(const std::string& s) {
    if (s == "random") return SearchStrategy::random;
    if (s == "breadth") return SearchStrategy::breadth;
    throw ConfigError("unknown search strategy '" + s + "'");
}

std::string to_string(SearchStrategy s) { return s == SearchStrategy::random ? "random" : "breadth"; }

SeparationReport trace_search_demo(const HardnessTree& tree, long budget, SearchStrategy strategy, std::uint64_t seed) {
    if (budget < 0) throw ConfigError("budget must be nonnegative");
    const Environment& env = tree.env;
    int H = env.horizon(), A = tree.branching;
    std::map<int, double> target;
    for (const auto& o : tree.dataset.at(H)) target[o.id] += 1.0 / tree.dataset.size(H);
    TraceSim sim(env, make_rng(seed, "trace-search-env"));
    Rng rng = make_rng(seed, "trace-search");
    SeparationReport rep;
    std::map<int, long> counts;
    long leaves = env.mdp->num_states(H);
    for (long n = 0; n < budget; ++n) {
        sim.reset();
        long code = n % leaves;
        for (int h = 1; h <= H; ++h) {
            int a;
            if (h == H) {
                a = 0;
            } else if (strategy == SearchStrategy::random) {
                a = uniform_int(rng, A);
            } else {
                long place = 1;
                for (int k = h + 1; k < H; ++k) place *= A;
                a = static_cast<int>((code / place) % A);
            }
            if (h == H) counts[sim.latent()] += 1;
            sim.step(a);
        }
        rep.episodes = n + 1;
        double k = static_cast<double>(n + 1);
        double overlap = 0.0;
        for (const auto& [s, q] : target) {
            auto it = counts.find(s);
            if (it != counts.end()) overlap += std::min(q, it->second / k);
        }
        rep.tv = std::min(rep.tv, 1.0 - overlap);
    }
    return rep;
}

SeparationReport reset_solver_demo(const HardnessTree& tree, const StateOnlyDataset& dataset, std::uint64_t seed) {
    const Environment& env = tree.env;
    int H = env.horizon(), A = env.num_actions();
    if (dataset.horizon != H) throw ConfigError("dataset horizon does not match the tree");
    ResetSim sim(env, make_rng(seed, "reset-solver"));
    std::vector<std::set<int>> nodes(H);
    for (int h = 1; h <= H; ++h)
        for (const auto& o : dataset.at(h)) nodes[h - 1].insert(o.id);
    // Chains: for each offline node, the action sequence from horizon 1 that reaches it through offline nodes.
    std::map<int, std::vector<int>> chains;
    for (int s : nodes[0]) chains[s] = {};
    SeparationReport rep;
    for (int h = 1; h < H && rep.diagnostic_h < 0; ++h) {
        std::map<int, std::vector<int>> next;
        for (int s : nodes[h - 1])
            for (int a = 0; a < A; ++a) {
                int child = sim.query(h, s, a).next;
                if (chains.count(s) && nodes[h].count(child) && !next.count(child)) {
                    next[child] = chains[s];
                    next[child].push_back(a);
                }
            }
        if (next.empty()) rep.diagnostic_h = h + 1;
        chains = std::move(next);
    }
    if (rep.diagnostic_h < 0) {
        int leaf = -1;
        if (chains.size() == 1) {
            leaf = chains.begin()->first;
        } else {
            for (const auto& [s, acts] : chains)
                if (sim.query(H, s, 0).reward >= env.success_level) {
                    leaf = s;
                    break;
                }
        }
        if (leaf >= 0) {
            rep.actions = chains[leaf];
            rep.success = leaf == tree.path[H - 1];
        } else {
            rep.diagnostic_h = H;
        }
    }
    if (!rep.success)
        for (int h = 1; h <= H; ++h)
            if (!nodes[h - 1].count(tree.path[h - 1])) {
                rep.diagnostic_h = h;
                break;
            }
    rep.queries = sim.queries();
    return rep;
}

} // namespace fbrl
