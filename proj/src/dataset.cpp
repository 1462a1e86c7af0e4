#include "fbrl/dataset.hpp"

#include "fbrl/errors.hpp"
#include "fbrl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace fbrl {

std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::eps_greedy: return "eps-greedy";
    case Provenance::benign_inadmissible: return "benign-inadmissible";
    case Provenance::adversarial: return "adversarial";
    case Provenance::tree_construction: return "tree-construction";
    case Provenance::custom: return "custom";
    }
    return "custom";
}

Provenance parse_provenance(const std::string& s) {
    for (auto p : {Provenance::eps_greedy, Provenance::benign_inadmissible, Provenance::adversarial,
                   Provenance::tree_construction, Provenance::custom})
        if (to_string(p) == s) return p;
    throw ConfigError("unknown provenance '" + s + "'");
}

const std::vector<Obs>& StateOnlyDataset::at(int h) const {
    if (h < 1 || h > static_cast<int>(data.size())) throw std::out_of_range("dataset has no horizon " + std::to_string(h));
    return data[h - 1];
}

void StateOnlyDataset::validate() const {
    if (static_cast<int>(data.size()) != horizon) throw std::invalid_argument("dataset horizon count mismatch");
    for (int h = 1; h <= horizon; ++h) {
        if (data[h - 1].empty()) throw std::invalid_argument("dataset horizon " + std::to_string(h) + " is empty");
        for (const auto& o : data[h - 1]) {
            if (mode == ObsMode::latent && o.id < 0) throw std::invalid_argument("latent sample without id at horizon " + std::to_string(h));
            if (mode == ObsMode::rich && o.x.size() != dim) throw std::invalid_argument("rich sample of wrong length at horizon " + std::to_string(h));
        }
    }
}

void save_dataset(const StateOnlyDataset& d, std::ostream& os) {
    d.validate();
    auto old = os.precision(17);
    os << "fbrl-dataset 1\n";
    os << "env " << d.env_id << "\n";
    os << "horizon " << d.horizon << "\n";
    os << "mode " << to_string(d.mode) << "\n";
    os << "dim " << d.dim << "\n";
    os << "provenance " << to_string(d.provenance) << "\n";
    os << "seed " << d.seed << "\n";
    os << "sizes";
    for (const auto& v : d.data) os << ' ' << v.size();
    os << "\n";
    for (int h = 1; h <= d.horizon; ++h) {
        os << "h " << h << "\n";
        for (const auto& o : d.data[h - 1]) {
            if (d.mode == ObsMode::latent) {
                os << o.id << "\n";
            } else {
                for (Eigen::Index i = 0; i < o.x.size(); ++i) os << (i ? " " : "") << o.x[i];
                os << "\n";
            }
        }
    }
    os << "end\n";
    os.precision(old);
}

namespace {

std::string header(std::istream& is, const std::string& key) {
    std::string k, v;
    if (!(is >> k >> v) || k != key) throw LoadError("dataset header: expected '" + key + "'");
    return v;
}

} // namespace

StateOnlyDataset load_dataset(std::istream& is, int expected_horizon) {
    StateOnlyDataset d;
    if (header(is, "fbrl-dataset") != "1") throw LoadError("unsupported dataset schema version");
    d.env_id = header(is, "env");
    try {
        d.horizon = std::stoi(header(is, "horizon"));
        d.mode = parse_obs_mode(header(is, "mode"));
        d.dim = std::stoi(header(is, "dim"));
        d.provenance = parse_provenance(header(is, "provenance"));
        d.seed = std::stoull(header(is, "seed"));
    } catch (const LoadError&) {
        throw;
    } catch (const std::exception& e) {
        throw LoadError(std::string("dataset header: ") + e.what());
    }
    if (d.horizon < 1) throw LoadError("dataset header: bad horizon");
    if (expected_horizon > 0 && d.horizon != expected_horizon)
        throw LoadError("dataset horizon " + std::to_string(d.horizon) + " does not match expected " + std::to_string(expected_horizon));
    std::string tok;
    if (!(is >> tok) || tok != "sizes") throw LoadError("dataset header: expected 'sizes'");
    std::vector<long> sizes(d.horizon);
    for (auto& n : sizes)
        if (!(is >> n) || n < 1) throw LoadError("dataset header: bad sizes");
    d.data.resize(d.horizon);
    for (int h = 1; h <= d.horizon; ++h) {
        int hh = 0;
        if (!(is >> tok >> hh) || tok != "h" || hh != h) throw LoadError("dataset truncated or malformed at horizon " + std::to_string(h));
        auto& v = d.data[h - 1];
        v.resize(sizes[h - 1]);
        for (auto& o : v) {
            bool ok = true;
            if (d.mode == ObsMode::latent) {
                ok = static_cast<bool>(is >> o.id) && o.id >= 0;
            } else {
                o.x.resize(d.dim);
                for (int i = 0; i < d.dim && ok; ++i) ok = static_cast<bool>(is >> o.x[i]);
            }
            if (!ok) throw LoadError("dataset truncated or malformed at horizon " + std::to_string(h));
        }
    }
    if (!(is >> tok) || tok != "end") throw LoadError("dataset truncated after horizon " + std::to_string(d.horizon));
    return d;
}

std::vector<double> empirical_marginal(const StateOnlyDataset& d, int h, int num_states) {
    if (d.mode != ObsMode::latent) throw std::invalid_argument("empirical_marginal needs latent samples");
    const auto& v = d.at(h);
    std::vector<double> p(num_states, 0.0);
    for (const auto& o : v) {
        if (o.id < 0 || o.id >= num_states) throw std::out_of_range("sample outside the state space");
        p[o.id] += 1.0;
    }
    for (double& x : p) x /= static_cast<double>(v.size());
    return p;
}

Policy eps_greedy(const Policy& pi, double eps) {
    if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("eps must lie in [0,1]");
    std::vector<RulePtr> rules;
    auto unif = std::make_shared<UniformRule>(pi.num_actions());
    for (int h = pi.first(); h <= pi.last(); ++h)
        rules.push_back(std::make_shared<MixtureRule>(std::vector<RulePtr>{pi.rule(h), unif}, std::vector<double>{1.0 - eps, eps}));
    return Policy(pi.first(), std::move(rules));
}

namespace {

StateOnlyDataset blank(const Environment& env, Provenance tag, std::uint64_t seed) {
    StateOnlyDataset d;
    d.env_id = env.id;
    d.horizon = env.horizon();
    d.mode = env.rich() ? ObsMode::rich : ObsMode::latent;
    d.dim = env.rich() ? env.encoder->dim() : 0;
    d.provenance = tag;
    d.seed = seed;
    d.data.resize(d.horizon);
    return d;
}

} // namespace

StateOnlyDataset collect_eps_greedy(const Environment& env, const Policy& pi_star, double eps, int N, std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("need at least one sample per horizon");
    Policy behavior = eps_greedy(pi_star, eps);
    StateOnlyDataset d = blank(env, Provenance::eps_greedy, seed);
    TraceSim sim(env, make_rng(seed, "offline-env"));
    Rng prng = make_rng(seed, "offline-policy");
    for (int n = 0; n < N; ++n) {
        Trajectory tr = rollout(sim, behavior, prng);
        for (int h = 1; h <= d.horizon; ++h) d.data[h - 1].push_back(std::move(tr.obs[h - 1]));
    }
    return d;
}

std::vector<double> inadmissible_marginal(int k) {
    if (k < 1) throw std::invalid_argument("construction step must be positive");
    if (k == 1) return {0.1, 0.05, 0.85};
    if (k > 10) throw ConfigError("inadmissible construction is only defined for steps up to 10");
    return {0.05 * k, 0.05 * k, 1.0 - 0.1 * k};
}

StateOnlyDataset collect_inadmissible(const Environment& env, int N, std::uint64_t seed, Provenance tag) {
    int H = env.horizon();
    if (H < 2) throw ConfigError("inadmissible data needs H >= 2");
    if (H - 1 > 10) throw ConfigError("inadmissible data is only defined for H <= 11");
    if (env.mdp->num_states(1) != 3) throw ConfigError("inadmissible data needs a lock environment");
    std::vector<std::vector<double>> marg;
    marg.push_back(env.mdp->initial());
    for (int h = 2; h <= H; ++h) marg.push_back(inadmissible_marginal(h - 1));
    StateOnlyDataset d = blank(env, tag, seed);
    Rng rng = make_rng(seed, "inadmissible");
    for (int h = 1; h <= H; ++h)
        for (int n = 0; n < N; ++n) {
            int s = sample_discrete(marg[h - 1].data(), 3, rng);
            d.data[h - 1].push_back(env.observe(h, s, rng));
        }
    return d;
}

StateOnlyDataset collect_benign_inadmissible(const Environment& env, int N, std::uint64_t seed) {
    return collect_inadmissible(env, N, seed, Provenance::benign_inadmissible);
}

StateOnlyDataset collect_adversarial(const Environment& env, int N, std::uint64_t seed) {
    return collect_inadmissible(env, N, seed, Provenance::adversarial);
}

StateOnlyDataset dataset_from_marginals(const Environment& env, const std::vector<std::vector<double>>& marginals, int N,
                                        std::uint64_t seed, Provenance tag) {
    if (static_cast<int>(marginals.size()) != env.horizon()) throw std::invalid_argument("need one marginal per horizon");
    StateOnlyDataset d = blank(env, tag, seed);
    Rng rng = make_rng(seed, "marginals");
    for (int h = 1; h <= env.horizon(); ++h) {
        const auto& p = marginals[h - 1];
        for (std::size_t s = 0; s < p.size(); ++s) {
            long k = std::lround(p[s] * N);
            for (long i = 0; i < k; ++i) d.data[h - 1].push_back(env.observe(h, static_cast<int>(s), rng));
        }
        std::shuffle(d.data[h - 1].begin(), d.data[h - 1].end(), rng);
    }
    return d;
}

InteractiveOfflineOracle::InteractiveOfflineOracle(const StationaryMdp& mdp, StationaryPolicy mu, Rng rng)
    : mdp_(mdp), mu_(std::move(mu)), rng_(std::move(rng)) {
    if (mu_.rows() != mdp.num_states() || mu_.cols() != mdp.num_actions()) throw std::invalid_argument("oracle policy has wrong shape");
}

int InteractiveOfflineOracle::query(int s) {
    if (s < 0 || s >= mdp_.num_states()) throw std::out_of_range("oracle queried at an invalid state");
    ++queries_;
    Eigen::VectorXd row = mu_.row(s).transpose();
    int a = sample_discrete(row.data(), mdp_.num_actions(), rng_);
    return mdp_.step(s, a, rng_);
}

} // namespace fbrl
