#include "fbrl/dataset.hpp"
#include "fbrl/dp.hpp"
#include "fbrl/envs.hpp"
#include "fbrl/errors.hpp"
#include "fbrl/harness.hpp"
#include "fbrl/mdp.hpp"
#include "fbrl/metrics.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace fbrl;

namespace {

struct RunOpts {
    std::string preset, config, out, seeds;
    std::vector<std::string> sets;
    double scale = 0.0;
};

void add_run_opts(CLI::App* app, RunOpts& o, const std::string& preset) {
    o.preset = preset;
    app->add_option("--preset", o.preset, "Experiment preset")->capture_default_str();
    app->add_option("--config", o.config, "JSON config overlaid on the preset");
    app->add_option("--set", o.sets, "Override key=value (dotted keys)");
    app->add_option("--seeds", o.seeds, "Comma-separated seeds");
    app->add_option("--scale", o.scale, "Budget multiplier");
    app->add_option("--out", o.out, "Output directory");
}

Json resolve(const RunOpts& o, const std::vector<std::string>& extra) {
    Json cfg = default_config(o.preset);
    if (!o.config.empty()) {
        std::ifstream f(o.config);
        if (!f) throw ConfigError("cannot open config " + o.config);
        Json patch;
        try {
            patch = Json::parse(f);
        } catch (const Json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        merge_config(cfg, patch);
    }
    for (const auto& s : extra) apply_override(cfg, s);
    for (const auto& s : o.sets) apply_override(cfg, s);
    if (!o.seeds.empty()) {
        Json seeds = Json::array();
        std::stringstream ss(o.seeds);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                seeds.push_back(std::stoull(tok));
            } catch (const std::exception&) {
                throw ConfigError("bad seed '" + tok + "'");
            }
        }
        cfg["seeds"] = seeds;
    }
    if (o.scale > 0.0) apply_override(cfg, "budgets.scale=" + std::to_string(o.scale));
    if (!o.out.empty())
        cfg["output"] = o.out;
    else if (cfg["output"].get<std::string>().empty())
        cfg["output"] = (std::filesystem::path(default_output_root()) / o.preset).string();
    validate_config(cfg);
    return cfg;
}

int run(const RunOpts& o, const std::vector<std::string>& extra) {
    Json cfg = resolve(o, extra);
    PresetResult r = run_experiment(cfg);
    for (const auto& run : r.runs) {
        std::cout << run.algorithm << " seed " << run.seed;
        for (const auto& [k, v] : run.footer) std::cout << ' ' << k << '=' << v;
        std::cout << '\n';
    }
    for (const auto& f : r.failures) std::cerr << "failed: " << f << '\n';
    std::cout << "output " << cfg["output"].get<std::string>() << '\n';
    return r.failures.empty() ? 0 : 1;
}

template <class T>
T load_file(const std::string& path, T (*loader)(std::istream&)) {
    std::ifstream f(path);
    if (!f) throw LoadError("cannot open " + path);
    return loader(f);
}

StateOnlyDataset load_dataset_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw LoadError("cannot open " + path);
    return load_dataset(f);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid RL from observation-only offline data"};
    app.require_subcommand(1);

    std::string env_id = "lock", kind = "eps-greedy", mode = "latent", data_out, mdp_out;
    int horizon = 10, n = 2000, actions = kLockActions;
    double eps = -1.0;
    std::uint64_t seed = 0;
    auto* gen = app.add_subcommand("gen-data", "Generate an offline dataset");
    gen->add_option("--env", env_id, "lock | lock-adversarial | tree | onestep")->capture_default_str();
    gen->add_option("--horizon", horizon)->capture_default_str();
    gen->add_option("--n", n, "Samples per horizon")->capture_default_str();
    gen->add_option("--eps", eps, "eps-greedy noise (default 1/H)");
    gen->add_option("--kind", kind, "eps-greedy | benign-inadmissible | adversarial")->capture_default_str();
    gen->add_option("--mode", mode, "latent | rich")->capture_default_str();
    gen->add_option("--actions", actions)->capture_default_str();
    gen->add_option("--seed", seed)->capture_default_str();
    gen->add_option("--out", data_out, "Dataset path")->required();
    gen->add_option("--mdp-out", mdp_out, "Also write the MDP");

    RunOpts foobar, psdp, cpi, interfail, hard, preset;
    std::string variant = "reset", construction, strategy;
    long budget = -1;
    int runs = 0;
    auto* rf = app.add_subcommand("run-foobar", "Forward then backward phase on the lock");
    add_run_opts(rf, foobar, "lock-admissible");
    auto* rp = app.add_subcommand("run-psdp", "PSDP with reset access or a fixed roll-in");
    add_run_opts(rp, psdp, "lock-benign");
    rp->add_option("--variant", variant, "reset | trace")->capture_default_str();
    auto* rc = app.add_subcommand("run-cpi", "Inter-FAIL roll-in followed by CPI on the stationary lock");
    add_run_opts(rc, cpi, "stationary-lock");
    auto* ri = app.add_subcommand("run-interfail", "Inter-FAIL on the stationary lock");
    add_run_opts(ri, interfail, "stationary-lock");
    auto* rh = app.add_subcommand("hardness", "Trace vs reset separation demos");
    add_run_opts(rh, hard, "hardness-tree");
    rh->add_option("--construction", construction, "tree | onestep");
    rh->add_option("--budget", budget, "Trace episodes per run");
    rh->add_option("--runs", runs, "Runs per seed");
    rh->add_option("--strategy", strategy, "random | breadth");
    auto* rr = app.add_subcommand("preset", "Run a preset with all its algorithms");
    add_run_opts(rr, preset, "lock-benign");

    std::string mdp_path, data_path, policy_path;
    auto* ev = app.add_subcommand("eval", "Coverage and divergence report of a policy against a dataset");
    ev->add_option("--mdp", mdp_path)->required();
    ev->add_option("--dataset", data_path)->required();
    ev->add_option("--policy", policy_path, "Tabular policy file (default: optimal)");

    std::vector<std::string> inputs;
    std::string summary_out;
    auto* sm = app.add_subcommand("summarize", "Median and quartiles across record files");
    sm->add_option("inputs", inputs, "Record CSV files")->required();
    sm->add_option("--out", summary_out, "Summary path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            ObsMode om = parse_obs_mode(mode);
            std::uint64_t env_seed = derive_seed(seed, "env"), data_seed = derive_seed(seed, "data");
            StateOnlyDataset d;
            std::shared_ptr<const LatentMdp> mdp;
            if (env_id == "lock" || env_id == "lock-adversarial") {
                CombLock lock = env_id == "lock" ? make_comb_lock(horizon, env_seed, om, actions) : make_adversarial_lock(horizon, env_seed, om, actions);
                mdp = lock.env.mdp;
                if (kind == "eps-greedy")
                    d = collect_eps_greedy(lock.env, lock.optimal, eps < 0.0 ? 1.0 / horizon : eps, n, data_seed);
                else if (kind == "benign-inadmissible")
                    d = collect_benign_inadmissible(lock.env, n, data_seed);
                else if (kind == "adversarial")
                    d = collect_adversarial(lock.env, n, data_seed);
                else
                    throw ConfigError("unknown data kind '" + kind + "'");
            } else if (env_id == "tree") {
                HardnessTree t = make_binary_tree(horizon, env_seed);
                mdp = t.env.mdp;
                d = t.dataset;
            } else if (env_id == "onestep") {
                OneStepHardness o = make_one_step_hardness();
                mdp = o.env.mdp;
                d = dataset_from_marginals(o.env, {{1.0}, o.mu}, n, data_seed);
            } else {
                throw ConfigError("unknown env '" + env_id + "'");
            }
            std::ofstream f(data_out);
            if (!f) throw ConfigError("cannot write " + data_out);
            save_dataset(d, f);
            if (!mdp_out.empty()) {
                std::ofstream g(mdp_out);
                save_mdp(*mdp, g);
            }
            return 0;
        }
        if (*rf) return run(foobar, {"algorithms=[\"foobar\"]"});
        if (*rp) return run(psdp, {"algorithms=[\"psdp-" + variant + "\"]"});
        if (*rc) return run(cpi, {"algorithms=[\"cpi\"]"});
        if (*ri) return run(interfail, {"algorithms=[\"inter-fail\"]"});
        if (*rh) {
            std::vector<std::string> extra;
            if (!construction.empty()) {
                if (hard.preset == "hardness-tree" && construction == "onestep") hard.preset = "hardness-onestep";
                extra.push_back("hardness.construction=" + construction);
            }
            if (budget >= 0) extra.push_back("hardness.budget=" + std::to_string(budget));
            if (runs > 0) extra.push_back("hardness.runs=" + std::to_string(runs));
            if (!strategy.empty()) extra.push_back("hardness.strategy=" + strategy);
            return run(hard, extra);
        }
        if (*rr) return run(preset, {});
        if (*ev) {
            LatentMdp m = load_file<LatentMdp>(mdp_path, &load_mdp);
            StateOnlyDataset d = load_dataset_file(data_path);
            Environment env{d.env_id, std::make_shared<const LatentMdp>(m), nullptr, 1.0};
            if (d.mode != ObsMode::latent) env.encoder = std::make_shared<const HadamardEncoder>(m.horizon());
            Policy pi = policy_path.empty() ? solve_optimal(m).policy : load_file<Policy>(policy_path, &load_policy);
            Occupancy ref = dataset_marginals(d, env);
            Occupancy occ = exact_occupancy(m, pi);
            CoverageReport cov = coverage_density_ratio(occ, ref);
            std::cout.precision(10);
            std::cout << "policy_value=" << policy_value(m, pi) << '\n';
            std::cout << "success_probability=" << success_probability(m, pi) << '\n';
            std::cout << "coverage_kind=" << to_string(cov.kind) << '\n';
            std::cout << "coverage=" << cov.aggregate << '\n';
            std::cout << "coverage_infinite=" << (cov.infinite ? 1 : 0) << '\n';
            std::cout << "coverage_witness_h=" << cov.witness_h << '\n';
            std::cout << "coverage_witness_s=" << cov.witness_s << '\n';
            for (int h = 1; h <= m.horizon(); ++h) {
                Divergences dv = divergences(occ[h - 1], ref[h - 1]);
                std::cout << "h" << h << ".coverage=" << cov.per_horizon[h - 1] << '\n';
                std::cout << "h" << h << ".tv=" << dv.tv << '\n';
                std::cout << "h" << h << ".js=" << dv.js << '\n';
            }
            return 0;
        }
        if (*sm) {
            std::vector<RunOutput> all;
            for (const auto& p : inputs) {
                std::ifstream f(p);
                if (!f) throw ConfigError("cannot open " + p);
                all.push_back(read_records(f));
            }
            auto rows = summarize(all);
            if (summary_out.empty()) {
                write_summary(std::cout, rows);
            } else {
                std::ofstream f(summary_out);
                write_summary(f, rows);
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
