#include "fbrl/harness.hpp"

#include "fbrl/backward.hpp"
#include "fbrl/dp.hpp"
#include "fbrl/envs.hpp"
#include "fbrl/errors.hpp"
#include "fbrl/foobar.hpp"
#include "fbrl/forward.hpp"
#include "fbrl/metrics.hpp"
#include "fbrl/separation.hpp"
#include "fbrl/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace fbrl {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_records(std::ostream& os, const RunOutput& run) {
    os << "# fbrl-records v1\n";
    os << "seed,phase,step,samples,metric,value\n";
    for (const auto& r : run.records)
        os << r.seed << ',' << r.phase << ',' << r.step << ',' << r.samples << ',' << r.metric << ',' << fmt(r.value) << '\n';
    for (const auto& [k, v] : run.footer) os << "# " << k << '=' << fmt(v) << '\n';
}

RunOutput read_records(std::istream& is) {
    RunOutput out;
    std::string line;
    if (!std::getline(is, line) || line != "# fbrl-records v1") throw LoadError("missing records header");
    if (!std::getline(is, line) || line != "seed,phase,step,samples,metric,value") throw LoadError("unexpected records columns");
    int lineno = 2;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            auto eq = line.find('=');
            if (eq == std::string::npos) throw LoadError("bad footer at line " + std::to_string(lineno));
            out.footer[line.substr(2, eq - 2)] = std::stod(line.substr(eq + 1));
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 6) throw LoadError("expected 6 columns at line " + std::to_string(lineno));
        try {
            out.records.push_back({std::stoull(f[0]), f[1], std::stoi(f[2]), std::stol(f[3]), f[4], std::stod(f[5])});
        } catch (const std::logic_error&) {
            throw LoadError("unparsable row at line " + std::to_string(lineno));
        }
    }
    if (!out.records.empty()) out.seed = out.records.front().seed;
    return out;
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(v.begin(), v.end());
    double pos = q * (v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

std::vector<SummaryRow> summarize(const std::vector<RunOutput>& runs) {
    if (runs.empty()) throw std::invalid_argument("nothing to summarize");
    std::map<std::tuple<std::string, int, std::string>, std::vector<double>> groups;
    std::vector<std::tuple<std::string, int, std::string>> order;
    auto add = [&](const std::string& phase, int step, const std::string& metric, double v) {
        auto key = std::make_tuple(phase, step, metric);
        auto [it, fresh] = groups.try_emplace(key);
        if (fresh) order.push_back(key);
        it->second.push_back(v);
    };
    for (const auto& r : runs) {
        for (const auto& rec : r.records) add(rec.phase, rec.step, rec.metric, rec.value);
        for (const auto& [k, v] : r.footer) add("final", 0, k, v);
    }
    std::sort(order.begin(), order.end());
    std::vector<SummaryRow> out;
    for (const auto& key : order) {
        const auto& v = groups[key];
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), static_cast<int>(v.size()), quantile(v, 0.5),
                       quantile(v, 0.25), quantile(v, 0.75)});
    }
    return out;
}

void write_summary(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "# fbrl-summary v1\n";
    os << "phase,step,metric,n,median,q25,q75\n";
    for (const auto& r : rows)
        os << r.phase << ',' << r.step << ',' << r.metric << ',' << r.n << ',' << fmt(r.median) << ',' << fmt(r.q25) << ','
           << fmt(r.q75) << '\n';
}

std::vector<std::string> preset_names() {
    return {"lock-admissible", "lock-benign", "lock-adversarial", "hardness-tree", "hardness-onestep", "stationary-lock"};
}

Json default_config(const std::string& preset) {
    Json seeds = Json::array();
    for (int s = 0; s < 10; ++s) seeds.push_back(s);
    Json c;
    c["preset"] = preset;
    if (preset.rfind("lock-", 0) == 0) {
        c["algorithms"] = preset == "lock-admissible" ? Json{"foobar"} : Json{"foobar", "psdp-reset"};
        c["seeds"] = seeds;
        c["jobs"] = 0;
        c["output"] = "";
        c["env"] = {{"id", preset == "lock-adversarial" ? "lock-adversarial" : "lock"}, {"horizon", 10}, {"mode", "latent"}, {"actions", 10}};
        std::string kind = preset == "lock-admissible" ? "eps-greedy" : preset == "lock-benign" ? "benign-inadmissible" : "adversarial";
        c["data"] = {{"kind", kind}, {"eps", nullptr}};
        c["budgets"] = {{"scale", 1.0}, {"offline", 2000}, {"forward", 2000}, {"game_T", 1000},
                        {"backward", preset == "lock-admissible" ? 5000 : 4000}, {"eval_episodes", 2000}};
        c["forward"] = {{"mode", "mmd"}, {"lr", 0.05}, {"hidden", Json::array()}, {"steps", 1}, {"max_points", 1000},
                        {"bandwidth", "median"}, {"sigma", 1.0}};
        c["backward"] = {{"q", "tabular"}, {"bias", true}, {"hidden", {128, 128}}, {"lr", 1e-3}, {"batch", 128}, {"steps", 1500},
                         {"rollin", "optimal"}};
    } else if (preset == "hardness-tree" || preset == "hardness-onestep") {
        c["algorithms"] = Json{"hardness"};
        c["seeds"] = Json{0};
        c["jobs"] = 0;
        c["output"] = "";
        c["hardness"] = {{"construction", preset == "hardness-tree" ? "tree" : "onestep"},
                         {"horizon", 12},
                         {"budget", 1024},
                         {"strategy", "random"},
                         {"runs", 100},
                         {"grid", 1e-4}};
    } else if (preset == "stationary-lock") {
        c["algorithms"] = Json{"inter-fail", "cpi"};
        c["seeds"] = seeds;
        c["jobs"] = 0;
        c["output"] = "";
        c["stationary"] = {{"actions", 10}, {"gamma", 0.9}, {"offline_eps", 0.1}};
        c["budgets"] = {{"scale", 1.0}, {"interfail_T", 3000}, {"cpi_budget", 2000}, {"cpi_max_iters", 2000}};
        c["interfail"] = {{"lr", 0.05}};
        c["cpi"] = {{"eps", 0.005}, {"alpha", 0.1}, {"horizon", 0}, {"exact", false}, {"init", "uniform"}};
    } else {
        throw ConfigError("unknown preset '" + preset + "'");
    }
    return c;
}

void merge_config(Json& base, const Json& patch, const std::string& path) {
    if (!patch.is_object()) throw ConfigError("config" + (path.empty() ? std::string() : " key '" + path + "'") + " must be an object");
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
        Json& slot = base[it.key()];
        if (slot.is_object() && it.value().is_object())
            merge_config(slot, it.value(), key);
        else
            slot = it.value();
    }
}

void apply_override(Json& cfg, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: '" + assignment + "'");
    std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(text);
    } catch (const Json::parse_error&) {
        value = text;
    }
    Json patch = value;
    std::vector<std::string> parts;
    std::stringstream ss(key);
    std::string p;
    while (std::getline(ss, p, '.')) parts.push_back(p);
    for (auto i = parts.rbegin(); i != parts.rend(); ++i) patch = Json{{*i, patch}};
    merge_config(cfg, patch);
}

namespace {

const Json& need(const Json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("missing config key '" + key + "'");
    return j.at(key);
}

int get_int(const Json& j, const std::string& key, int lo) {
    const Json& v = need(j, key);
    if (!v.is_number_integer() || v.get<long long>() < lo) throw ConfigError("'" + key + "' must be an integer >= " + std::to_string(lo));
    return v.get<int>();
}

double get_num(const Json& j, const std::string& key) {
    const Json& v = need(j, key);
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
    return v.get<double>();
}

std::string get_str(const Json& j, const std::string& key) {
    const Json& v = need(j, key);
    if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<int> get_ints(const Json& j, const std::string& key) {
    const Json& v = need(j, key);
    if (!v.is_array()) throw ConfigError("'" + key + "' must be a list");
    std::vector<int> out;
    for (const auto& x : v) {
        if (!x.is_number_integer()) throw ConfigError("'" + key + "' must list integers");
        out.push_back(x.get<int>());
    }
    return out;
}

/// Budget entry scaled by budgets.scale, at least 1.
int budget(const Json& cfg, const std::string& key) {
    const Json& b = need(cfg, "budgets");
    double scale = get_num(b, "scale");
    return std::max(1, static_cast<int>(std::lround(get_int(b, key, 1) * scale)));
}

} // namespace

void validate_config(const Json& cfg) {
    std::string preset = get_str(cfg, "preset");
    const Json& algs = need(cfg, "algorithms");
    if (!algs.is_array() || algs.empty()) throw ConfigError("'algorithms' must be a nonempty list");
    static const std::vector<std::string> known = {"foobar", "psdp-reset", "psdp-trace", "cpi", "inter-fail", "hardness"};
    for (const auto& a : algs)
        if (!a.is_string() || std::find(known.begin(), known.end(), a.get<std::string>()) == known.end())
            throw ConfigError("unknown algorithm " + a.dump());
    const Json& seeds = need(cfg, "seeds");
    if (!seeds.is_array() || seeds.empty()) throw ConfigError("'seeds' must be a nonempty list");
    for (const auto& s : seeds)
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw ConfigError("seeds must be nonnegative integers");
    get_int(cfg, "jobs", 0);
    get_str(cfg, "output");
    if (cfg.contains("budgets") && !(get_num(cfg["budgets"], "scale") > 0.0)) throw ConfigError("'budgets.scale' must be positive");
    if (cfg.contains("env")) {
        const Json& e = cfg["env"];
        std::string id = get_str(e, "id");
        if (id != "lock" && id != "lock-adversarial") throw ConfigError("env.id must be lock or lock-adversarial");
        int H = get_int(e, "horizon", id == "lock" ? 2 : 3);
        parse_obs_mode(get_str(e, "mode"));
        get_int(e, "actions", 2);
        const Json& d = need(cfg, "data");
        std::string kind = get_str(d, "kind");
        if (kind != "eps-greedy" && kind != "benign-inadmissible" && kind != "adversarial")
            throw ConfigError("data.kind must be eps-greedy, benign-inadmissible or adversarial");
        if (kind != "eps-greedy" && H > 11) throw ConfigError("inadmissible data needs horizon <= 11");
        const Json& eps = need(d, "eps");
        if (!eps.is_null() && (!eps.is_number() || eps.get<double>() < 0.0 || eps.get<double>() > 1.0))
            throw ConfigError("data.eps must be null or in [0,1]");
        for (auto k : {"offline", "forward", "game_T", "backward", "eval_episodes"}) get_int(cfg["budgets"], k, 1);
        const Json& f = need(cfg, "forward");
        if (get_str(f, "mode") != "mmd") throw ConfigError("forward.mode must be mmd for lock experiments");
        if (!(get_num(f, "lr") > 0.0)) throw ConfigError("forward.lr must be positive");
        get_ints(f, "hidden");
        get_int(f, "steps", 1);
        get_int(f, "max_points", 1);
        std::string bw = get_str(f, "bandwidth");
        if (bw != "median" && bw != "fixed") throw ConfigError("forward.bandwidth must be median or fixed");
        if (!(get_num(f, "sigma") > 0.0)) throw ConfigError("forward.sigma must be positive");
        const Json& b = need(cfg, "backward");
        QKind qk = parse_q_kind(get_str(b, "q"));
        if (qk == QKind::tabular && get_str(e, "mode") == "rich") throw ConfigError("tabular regressors need latent observations");
        get_ints(b, "hidden");
        get_int(b, "batch", 1);
        get_int(b, "steps", 1);
        std::string ri = get_str(b, "rollin");
        if (ri != "optimal" && ri != "uniform") throw ConfigError("backward.rollin must be optimal or uniform");
    }
    if (cfg.contains("hardness")) {
        const Json& h = cfg["hardness"];
        std::string c = get_str(h, "construction");
        if (c != "tree" && c != "onestep") throw ConfigError("hardness.construction must be tree or onestep");
        int H = get_int(h, "horizon", 2);
        if (H > 24) throw ConfigError("hardness.horizon must be <= 24");
        get_int(h, "budget", 0);
        parse_search_strategy(get_str(h, "strategy"));
        get_int(h, "runs", 1);
        double g = get_num(h, "grid");
        if (!(g > 0.0 && g <= 1.0)) throw ConfigError("hardness.grid must lie in (0,1]");
    }
    if (cfg.contains("stationary")) {
        const Json& s = cfg["stationary"];
        get_int(s, "actions", 2);
        double g = get_num(s, "gamma");
        if (!(g > 0.0 && g < 1.0)) throw ConfigError("stationary.gamma must lie in (0,1)");
        double e = get_num(s, "offline_eps");
        if (e < 0.0 || e > 1.0) throw ConfigError("stationary.offline_eps must lie in [0,1]");
        for (auto k : {"interfail_T", "cpi_budget", "cpi_max_iters"}) get_int(cfg["budgets"], k, 1);
        if (!(get_num(cfg["interfail"], "lr") > 0.0)) throw ConfigError("interfail.lr must be positive");
        const Json& c = need(cfg, "cpi");
        if (!(get_num(c, "eps") > 0.0)) throw ConfigError("cpi.eps must be positive");
        double a = get_num(c, "alpha");
        if (a < 0.0 || a > 1.0) throw ConfigError("cpi.alpha must lie in [0,1]");
        get_int(c, "horizon", 0);
        if (!need(c, "exact").is_boolean()) throw ConfigError("cpi.exact must be a boolean");
        std::string init = get_str(c, "init");
        if (init != "uniform" && init != "forward") throw ConfigError("cpi.init must be uniform or forward");
    }
    for (const auto& a : algs) {
        std::string n = a.get<std::string>();
        bool lock = n == "foobar" || n == "psdp-reset" || n == "psdp-trace";
        if (lock && !cfg.contains("env")) throw ConfigError("algorithm " + n + " needs a lock preset");
        if ((n == "cpi" || n == "inter-fail") && !cfg.contains("stationary")) throw ConfigError("algorithm " + n + " needs the stationary-lock preset");
        if (n == "hardness" && !cfg.contains("hardness")) throw ConfigError("algorithm hardness needs a hardness preset");
    }
}

namespace {

struct LockSetup {
    CombLock lock;
    StateOnlyDataset data;
    double optimal_success = 1.0;
};

LockSetup setup_lock(const Json& cfg, std::uint64_t seed) {
    const Json& e = cfg["env"];
    int H = e["horizon"].get<int>(), A = e["actions"].get<int>();
    ObsMode mode = parse_obs_mode(e["mode"].get<std::string>());
    std::uint64_t env_seed = derive_seed(seed, "env");
    LockSetup s{e["id"] == "lock" ? make_comb_lock(H, env_seed, mode, A) : make_adversarial_lock(H, env_seed, mode, A), {}, 1.0};
    s.optimal_success = optimal_success_probability(*s.lock.env.mdp);
    int N = budget(cfg, "offline");
    std::uint64_t data_seed = derive_seed(seed, "data");
    std::string kind = cfg["data"]["kind"];
    if (kind == "eps-greedy") {
        double eps = cfg["data"]["eps"].is_null() ? 1.0 / H : cfg["data"]["eps"].get<double>();
        s.data = collect_eps_greedy(s.lock.env, s.lock.optimal, eps, N, data_seed);
    } else if (kind == "benign-inadmissible") {
        s.data = collect_benign_inadmissible(s.lock.env, N, data_seed);
    } else {
        s.data = collect_adversarial(s.lock.env, N, data_seed);
    }
    return s;
}

QClassSpec q_spec(const Json& b) {
    QClassSpec q;
    q.kind = parse_q_kind(b["q"].get<std::string>());
    q.bias = b["bias"].get<bool>();
    q.hidden = b["hidden"].get<std::vector<int>>();
    q.lr = b["lr"].get<double>();
    q.batch = b["batch"].get<int>();
    q.steps = b["steps"].get<int>();
    return q;
}

ForwardConfig forward_config(const Json& cfg) {
    const Json& f = cfg["forward"];
    ForwardConfig fc;
    fc.mode = ForwardMode::mmd;
    fc.N = budget(cfg, "forward");
    fc.game.T = budget(cfg, "game_T");
    fc.game.policy.lr = f["lr"].get<double>();
    fc.game.policy.hidden = f["hidden"].get<std::vector<int>>();
    fc.game.policy.steps = f["steps"].get<int>();
    fc.game.max_points = f["max_points"].get<int>();
    fc.game.kernel.rule = f["bandwidth"] == "median" ? BandwidthRule::median : BandwidthRule::fixed;
    fc.game.kernel.sigma = f["sigma"].get<double>();
    return fc;
}

void add(RunOutput& out, const std::string& phase, int step, long samples, const std::string& metric, double v) {
    out.records.push_back({out.seed, phase, step, samples, metric, v});
}

RunOutput run_lock(const Json& cfg, const std::string& algorithm, std::uint64_t seed) {
    RunOutput out;
    out.algorithm = algorithm;
    out.seed = seed;
    LockSetup ls = setup_lock(cfg, seed);
    const Environment& env = ls.lock.env;
    int H = env.horizon(), A = env.num_actions();
    int eval = budget(cfg, "eval_episodes");
    double opt = ls.optimal_success;
    BackwardConfig bc;
    bc.N = budget(cfg, "backward");
    bc.q.spec = q_spec(cfg["backward"]);
    std::uint64_t algo_seed = derive_seed(seed, "algorithm", 0);
    long offline = 0;
    for (int h = 1; h <= H; ++h) offline += static_cast<long>(ls.data.size(h));
    out.footer["offline_samples"] = static_cast<double>(offline);
    out.footer["optimal_success"] = opt;
    CoverageReport cov = coverage_density_ratio(*env.mdp, ls.lock.optimal, dataset_marginals(ls.data, env));
    out.footer["offline_coverage"] = cov.infinite ? std::numeric_limits<double>::infinity() : cov.aggregate;

    if (algorithm == "foobar") {
        FoobarConfig fc{forward_config(cfg), bc};
        Occupancy marg;
        if (!env.rich()) marg = dataset_marginals(ls.data, env);
        Policy forward_full;
        long forward_total = 0;
        FoobarHooks hooks;
        hooks.forward = [&](int h, const Policy& prefix, const GameTranscript& tr, long episodes) {
            Policy pol = compose(prefix, h + 1, Policy::uniform(h + 1, H, A));
            double succ = success_rate(env, pol, eval, derive_seed(seed, "eval-forward", h));
            add(out, "forward", h, episodes, "success", succ);
            add(out, "forward", h, episodes, "relative_success", succ / opt);
            add(out, "forward", h, episodes, "game_u", tr.best_u());
            if (!env.rich()) {
                Occupancy d = exact_occupancy(*env.mdp, prefix);
                add(out, "forward", h, episodes, "tv", divergences(d[h], marg[h]).tv);
            }
            forward_full = pol;
            forward_total = episodes;
        };
        hooks.backward = [&](int h, const Policy& suffix, long samples) {
            Policy prefix = h > 1 ? forward_full.slice(1, h - 1) : Policy();
            double succ = success_rate(env, compose(prefix, h, suffix), eval, derive_seed(seed, "eval-backward", h));
            add(out, "backward", h, forward_total + samples, "success", succ);
            add(out, "backward", h, forward_total + samples, "relative_success", succ / opt);
        };
        FoobarRun run = run_foobar(env, ls.data, fc, algo_seed, hooks);
        double fs = success_rate(env, run.forward.policy, eval, derive_seed(seed, "eval-final-forward"));
        double bs = success_rate(env, run.backward.policy, eval, derive_seed(seed, "eval-final"));
        out.footer["forward_success"] = fs / opt;
        out.footer["final_success"] = bs / opt;
        out.footer["total_samples"] = static_cast<double>(run.forward.episodes + run.backward.episodes);
    } else if (algorithm == "psdp-reset" || algorithm == "psdp-trace") {
        BackwardHook hook = [&](int h, const Policy&, long samples) { add(out, "backward", h, samples, "fitted", 1.0); };
        BackwardResult br;
        if (algorithm == "psdp-reset") {
            br = psdp_reset(env, ls.data, bc, algo_seed, hook);
            out.footer["queries"] = static_cast<double>(br.queries);
        } else {
            Policy roll_in = cfg["backward"]["rollin"] == "optimal" ? ls.lock.optimal : Policy::uniform(1, H, A);
            br = psdp_trace(env, roll_in, bc, algo_seed, hook);
        }
        double bs = success_rate(env, br.policy, eval, derive_seed(seed, "eval-final"));
        add(out, "backward", 1, br.episodes, "relative_success", bs / opt);
        out.footer["final_success"] = bs / opt;
        out.footer["total_samples"] = static_cast<double>(br.episodes);
    }
    return out;
}

RunOutput run_hardness(const Json& cfg, std::uint64_t seed) {
    RunOutput out;
    out.algorithm = "hardness";
    out.seed = seed;
    const Json& h = cfg["hardness"];
    if (h["construction"] == "onestep") {
        OneStepHardness hs = make_one_step_hardness();
        const LatentMdp& m = *hs.env.mdp;
        Occupancy mu = {{1.0}, hs.mu};
        CoverageReport cov = coverage_density_ratio(m, hs.optimal, mu);
        TvMinimizer det = tv_minimizing_policy(m, hs.mu);
        TvMinimizer mix = tv_minimizing_mixture(m, hs.mu, h["grid"].get<double>());
        std::vector<RulePtr> rules = {TabularRule::from_actions({det.action}, 2), std::make_shared<UniformRule>(2)};
        CoverageReport cov2 = coverage_density_ratio(m, hs.optimal, exact_occupancy(m, Policy(1, rules)));
        add(out, "onestep", 0, 0, "coverage_optimal", cov.aggregate);
        add(out, "onestep", 0, 0, "tv_min_action", det.action);
        add(out, "onestep", 0, 0, "tv_min_value", det.tv);
        add(out, "onestep", 0, 0, "tv_mix_weight", mix.weights[0]);
        add(out, "onestep", 0, 0, "tv_mix_value", mix.tv);
        add(out, "onestep", 0, 0, "coverage_vs_tvmin_infinite", cov2.infinite ? 1.0 : 0.0);
        add(out, "onestep", 0, 0, "coverage_vs_tvmin_witness_state", cov2.witness_s);
        out.footer["coverage_optimal"] = cov.aggregate;
        out.footer["tv_min_value"] = det.tv;
        return out;
    }
    int H = h["horizon"].get<int>(), runs = h["runs"].get<int>();
    long bud = h["budget"].get<long>();
    SearchStrategy strat = parse_search_strategy(h["strategy"].get<std::string>());
    int tv_ok = 0, reset_ok = 0;
    long max_q = 0;
    for (int r = 0; r < runs; ++r) {
        std::uint64_t rs = derive_seed(seed, "tree-run", static_cast<std::uint64_t>(r));
        HardnessTree tree = make_binary_tree(H, rs);
        SeparationReport tr = trace_search_demo(tree, bud, strat, rs);
        SeparationReport rr = reset_solver_demo(tree, tree.dataset, rs);
        add(out, "trace", r, tr.episodes, "tv", tr.tv);
        add(out, "reset", r, rr.queries, "success", rr.success ? 1.0 : 0.0);
        add(out, "reset", r, rr.queries, "queries", static_cast<double>(rr.queries));
        tv_ok += tr.tv >= 0.5;
        reset_ok += rr.success;
        max_q = std::max(max_q, rr.queries);
    }
    out.footer["trace_tv_at_least_half"] = tv_ok / static_cast<double>(runs);
    out.footer["reset_success"] = reset_ok / static_cast<double>(runs);
    out.footer["reset_max_queries"] = static_cast<double>(max_q);
    return out;
}

RunOutput run_stationary(const Json& cfg, const std::string& algorithm, std::uint64_t seed) {
    RunOutput out;
    out.algorithm = algorithm;
    out.seed = seed;
    const Json& st = cfg["stationary"];
    int A = st["actions"].get<int>();
    double gamma = st["gamma"].get<double>(), oeps = st["offline_eps"].get<double>();
    std::vector<int> correct;
    StationaryMdp m = make_stationary_lock(A, derive_seed(seed, "env"), &correct);
    int S = m.num_states();
    StationaryPolicy star = StationaryPolicy::Zero(S, A);
    for (int s = 0; s < S; ++s) star(s, s < 2 ? correct[s] : 0) = 1.0;
    StationaryPolicy mu = (1.0 - oeps) * star + oeps * uniform_stationary(S, A);
    InteractiveOfflineOracle oracle(m, mu, make_rng(seed, "oracle"));
    InterFailConfig ic;
    ic.gamma = gamma;
    ic.T = budget(cfg, "interfail_T");
    ic.lr = cfg["interfail"]["lr"].get<double>();
    InterFailResult fr = inter_fail(m, oracle, ic, derive_seed(seed, "inter-fail"));
    for (const auto& row : fr.transcript.rows)
        if (row.t % 100 == 0 || row.t == static_cast<int>(fr.transcript.rows.size()))
            add(out, "forward", row.t, row.t, "game_u", row.u);
    Eigen::VectorXd d_f = discounted_occupancy(m, fr.policy, gamma, m.initial());
    Eigen::VectorXd d_mu = discounted_occupancy(m, mu, gamma, m.initial());
    double tv = 0.5 * (d_f - d_mu).cwiseAbs().sum();
    double v_star = stationary_value(m, star, gamma, m.initial());
    out.footer["forward_tv"] = tv;
    out.footer["forward_value_ratio"] = stationary_value(m, fr.policy, gamma, m.initial()) / v_star;
    out.footer["forward_samples"] = static_cast<double>(fr.episodes);
    if (algorithm == "cpi") {
        const Json& c = cfg["cpi"];
        CpiConfig cc;
        cc.eps = c["eps"].get<double>();
        cc.gamma = gamma;
        cc.alpha = c["alpha"].get<double>();
        cc.horizon = c["horizon"].get<int>();
        cc.exact = c["exact"].get<bool>();
        cc.budget = budget(cfg, "cpi_budget");
        cc.max_iters = budget(cfg, "cpi_max_iters");
        CpiResult cr = cpi_trace(m, fr.policy, enumerate_deterministic(S, A),
                                 c["init"] == "forward" ? fr.policy : uniform_stationary(S, A), cc, derive_seed(seed, "cpi"));
        for (const auto& it : cr.log) add(out, "backward", it.t, fr.episodes + it.samples, "advantage", it.advantage);
        out.footer["final_value_ratio"] = stationary_value(m, cr.policy, gamma, m.initial()) / v_star;
        out.footer["cpi_iterations"] = cr.iterations;
        out.footer["cpi_terminated"] = cr.terminated ? 1.0 : 0.0;
        out.footer["cpi_iteration_bound"] = cpi_iteration_bound(gamma, cc.eps);
        out.footer["total_samples"] = static_cast<double>(fr.episodes + cr.samples);
    }
    return out;
}

} // namespace

RunOutput run_single(const Json& cfg, const std::string& algorithm, std::uint64_t seed) {
    if (algorithm == "hardness") return run_hardness(cfg, seed);
    if (algorithm == "cpi" || algorithm == "inter-fail") return run_stationary(cfg, algorithm, seed);
    return run_lock(cfg, algorithm, seed);
}

PresetResult run_experiment(const Json& cfg) {
    validate_config(cfg);
    std::vector<std::pair<std::string, std::uint64_t>> jobs;
    for (const auto& a : cfg["algorithms"])
        for (const auto& s : cfg["seeds"]) jobs.push_back({a.get<std::string>(), s.get<std::uint64_t>()});
    std::string dir = cfg["output"].get<std::string>();
    if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        std::ofstream(std::filesystem::path(dir) / "config.json") << cfg.dump(2) << '\n';
    }
    std::vector<RunOutput> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    int workers = cfg["jobs"].get<int>();
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min<int>(workers, static_cast<int>(jobs.size()));
    auto work = [&] {
        for (std::size_t i; (i = next++) < jobs.size();) {
            try {
                results[i] = run_single(cfg, jobs[i].first, jobs[i].second);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    PresetResult res;
    std::map<std::string, std::vector<RunOutput>> by_alg;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!errors[i].empty()) {
            res.failures.push_back(jobs[i].first + " " + std::to_string(jobs[i].second) + ": " + errors[i]);
            continue;
        }
        if (!dir.empty()) {
            std::ofstream f(std::filesystem::path(dir) / (jobs[i].first + "_seed" + std::to_string(jobs[i].second) + ".csv"));
            write_records(f, results[i]);
        }
        by_alg[jobs[i].first].push_back(results[i]);
        res.runs.push_back(std::move(results[i]));
    }
    if (!dir.empty())
        for (const auto& [alg, runs] : by_alg) {
            std::ofstream f(std::filesystem::path(dir) / ("summary_" + alg + ".csv"));
            write_summary(f, summarize(runs));
        }
    return res;
}

std::string default_output_root() {
    const char* v = std::getenv("FBRL_OUTPUT_ROOT");
    return v && *v ? v : "runs";
}

} // namespace fbrl
