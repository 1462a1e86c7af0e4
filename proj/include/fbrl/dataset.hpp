#pragma once

#include "fbrl/env.hpp"
#include "fbrl/policy.hpp"
#include "fbrl/stationary.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fbrl {

enum class Provenance { eps_greedy, benign_inadmissible, adversarial, tree_construction, custom };

std::string to_string(Provenance p);
Provenance parse_provenance(const std::string& s);

/// Per-horizon state samples without actions or rewards.
struct StateOnlyDataset {
    std::string env_id;
    int horizon = 0;
    ObsMode mode = ObsMode::latent;
    /// Feature length of rich observations; 0 in latent mode.
    int dim = 0;
    Provenance provenance = Provenance::custom;
    std::uint64_t seed = 0;
    /// data[h-1] holds the samples of horizon h.
    std::vector<std::vector<Obs>> data;

    const std::vector<Obs>& at(int h) const;
    std::size_t size(int h) const { return at(h).size(); }
    /// Throws unless every horizon is present and nonempty.
    void validate() const;
};

/// Text schema:
///   fbrl-dataset 1
///   env <id>
///   horizon H
///   mode latent|rich
///   dim d
///   provenance <tag>
///   seed <n>
///   sizes N_1 ... N_H
///   then for each horizon: "h <h>" followed by N_h lines, each a latent id or d decimals
///   end
void save_dataset(const StateOnlyDataset& d, std::ostream& os);
/// A positive `expected_horizon` must match the header.
StateOnlyDataset load_dataset(std::istream& is, int expected_horizon = 0);

/// Normalized counts of latent ids at horizon h.
std::vector<double> empirical_marginal(const StateOnlyDataset& d, int h, int num_states);

/// Per-step mixture of a policy with the uniform policy.
Policy eps_greedy(const Policy& pi, double eps);

/// N trajectories of the eps-greedy version of pi_star, keeping only the states.
StateOnlyDataset collect_eps_greedy(const Environment& env, const Policy& pi_star, double eps, int N, std::uint64_t seed);

/// Marginal (good 0, good 1, bad) of the k-th step of the inadmissible construction, k >= 1:
/// (0.1, 0.05, 0.85) for k = 1 and (0.05k, 0.05k, 1 - 0.1k) after.
std::vector<double> inadmissible_marginal(int k);

/// Inadmissible lock data sampled i.i.d. per horizon: horizon 1 follows the lock's initial distribution
/// and horizon h >= 2 follows inadmissible_marginal(h - 1).
StateOnlyDataset collect_inadmissible(const Environment& env, int N, std::uint64_t seed, Provenance tag);
StateOnlyDataset collect_benign_inadmissible(const Environment& env, int N, std::uint64_t seed);
StateOnlyDataset collect_adversarial(const Environment& env, int N, std::uint64_t seed);

/// Samples exactly the listed counts per state (rounded), shuffled; for exact-marginal tests.
StateOnlyDataset dataset_from_marginals(const Environment& env, const std::vector<std::vector<double>>& marginals, int N,
                                        std::uint64_t seed, Provenance tag = Provenance::custom);

/// Observation-only oracle: query(s) returns s' ~ P(s, a) with a ~ mu(s) kept private.
class InteractiveOfflineOracle {
public:
    InteractiveOfflineOracle(const StationaryMdp& mdp, StationaryPolicy mu, Rng rng);
    int query(int s);
    long queries() const { return queries_; }

private:
    const StationaryMdp& mdp_;
    StationaryPolicy mu_;
    Rng rng_;
    long queries_ = 0;
};

} // namespace fbrl
