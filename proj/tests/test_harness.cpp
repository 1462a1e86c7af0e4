#include "doctest.h"

#include "fbrl/errors.hpp"
#include "fbrl/harness.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fbrl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("fbrl_harness_" + name);
    fs::remove_all(p);
    return p;
}

RunOutput sample_run(std::uint64_t seed, double shift) {
    RunOutput r;
    r.algorithm = "foobar";
    r.seed = seed;
    for (int h = 1; h <= 3; ++h) r.records.push_back({seed, "forward", h, 100L * h, "tv", 0.1 * h + shift});
    r.records.push_back({seed, "backward", 1, 700, "success", 1.0 / 3.0 + shift});
    r.footer["final_success"] = 0.9 + shift;
    return r;
}

int cli(const std::string& args) {
    const char* path = std::getenv("FBRL_CLI_PATH");
    REQUIRE(path);
    int rc = std::system((std::string(path) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST_CASE("quantiles interpolate between order statistics") {
    std::vector<double> v = {9, 3, 0, 7, 1, 5, 2, 8, 4, 6};
    CHECK(quantile(v, 0.5) == 4.5);
    CHECK(quantile(v, 0.25) == 2.25);
    CHECK(quantile(v, 0.75) == 6.75);
    CHECK(quantile(v, 0.0) == 0.0);
    CHECK(quantile(v, 1.0) == 9.0);
    CHECK(quantile({3.5}, 0.25) == 3.5);
    CHECK_THROWS(quantile({}, 0.5));
}

TEST_CASE("summaries") {
    std::vector<RunOutput> runs;
    for (int k = 0; k < 5; ++k) runs.push_back(sample_run(k, 0.01 * k));
    auto rows = summarize(runs);
    bool found = false;
    for (const auto& r : rows) {
        CHECK(r.n == 5);
        CHECK(r.q25 <= r.median);
        CHECK(r.median <= r.q75);
        if (r.phase == "final" && r.metric == "final_success") {
            found = true;
            CHECK(r.median == doctest::Approx(0.92));
            CHECK(r.q25 == doctest::Approx(0.91));
        }
    }
    CHECK(found);
    CHECK(rows.size() == 5);

    std::vector<RunOutput> shuffled = {runs[3], runs[0], runs[4], runs[2], runs[1]};
    std::stringstream a, b;
    write_summary(a, rows);
    write_summary(b, summarize(shuffled));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("# fbrl-summary v1\nphase,step,metric,n,median,q25,q75\n", 0) == 0);

    std::stringstream one;
    write_summary(one, summarize({runs[2]}));
    auto single = summarize({runs[2]});
    for (const auto& r : single) {
        CHECK(r.median == r.q25);
        CHECK(r.median == r.q75);
    }
    CHECK_THROWS(summarize({}));
}

TEST_CASE("records round-trip") {
    RunOutput r = sample_run(7, 1e-3);
    std::stringstream ss;
    write_records(ss, r);
    CHECK(ss.str().rfind("# fbrl-records v1\nseed,phase,step,samples,metric,value\n", 0) == 0);
    RunOutput back = read_records(ss);
    CHECK(back.seed == 7);
    REQUIRE(back.records.size() == r.records.size());
    for (std::size_t i = 0; i < r.records.size(); ++i) {
        CHECK(back.records[i].phase == r.records[i].phase);
        CHECK(back.records[i].step == r.records[i].step);
        CHECK(back.records[i].samples == r.records[i].samples);
        CHECK(back.records[i].metric == r.records[i].metric);
        CHECK(back.records[i].value == r.records[i].value);
    }
    CHECK(back.footer == r.footer);

    std::stringstream bad("# fbrl-records v1\nseed,phase,step,samples,metric,value\n1,forward,2\n");
    CHECK_THROWS_AS(read_records(bad), LoadError);
    std::stringstream none("seed,phase\n");
    CHECK_THROWS_AS(read_records(none), LoadError);
}

TEST_CASE("configs: presets, merging and overrides") {
    auto names = preset_names();
    CHECK(names.size() == 6);
    for (const auto& n : names) CHECK_NOTHROW(validate_config(default_config(n)));
    CHECK_THROWS_AS(default_config("nope"), ConfigError);

    Json cfg = default_config("lock-benign");
    merge_config(cfg, Json::parse(R"({"env": {"horizon": 6}, "budgets": {"scale": 0.5}})"));
    CHECK(cfg["env"]["horizon"] == 6);
    CHECK(cfg["env"]["actions"] == 10);
    try {
        merge_config(cfg, Json::parse(R"({"env": {"horizn": 6}})"));
        FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("env.horizn") != std::string::npos);
    }
    apply_override(cfg, "forward.mode=finite");
    CHECK(cfg["forward"]["mode"] == "finite");
    apply_override(cfg, "budgets.forward=123");
    CHECK(cfg["budgets"]["forward"] == 123);
    CHECK_THROWS_AS(apply_override(cfg, "nokey=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "=1"), ConfigError);
    apply_override(cfg, "budgets.scale=-1");
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("experiments are reproducible from their echoed config") {
    Json cfg = default_config("lock-admissible");
    cfg["seeds"] = Json{7};
    cfg["env"]["horizon"] = 4;
    cfg["budgets"]["scale"] = 0.25;
    fs::path a = scratch("a"), b = scratch("b"), c = scratch("c");
    cfg["output"] = a.string();
    PresetResult ra = run_experiment(cfg);
    REQUIRE(ra.failures.empty());
    REQUIRE(ra.runs.size() == 1);
    CHECK(ra.runs[0].footer.count("final_success") == 1);
    cfg["output"] = b.string();
    run_experiment(cfg);
    for (const char* f : {"foobar_seed7.csv", "summary_foobar.csv"}) {
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }

    Json echoed = Json::parse(slurp(a / "config.json"));
    CHECK(echoed["budgets"]["scale"] == 0.25);
    CHECK(echoed["seeds"] == Json{7});
    echoed["output"] = c.string();
    run_experiment(echoed);
    CHECK(slurp(a / "foobar_seed7.csv") == slurp(c / "foobar_seed7.csv"));

    std::ifstream f(a / "foobar_seed7.csv");
    RunOutput back = read_records(f);
    CHECK(back.footer == ra.runs[0].footer);
    for (const auto& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("crashed runs are reported, not thrown") {
    Json cfg = default_config("lock-admissible");
    cfg["seeds"] = Json{1};
    cfg["env"]["horizon"] = 3;
    cfg["forward"]["lr"] = 1e308;
    PresetResult r = run_experiment(cfg);
    CHECK(r.runs.empty());
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].rfind("foobar 1: forward phase:", 0) == 0);
    cfg["algorithms"] = Json{"no-such-algorithm"};
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("output root") {
    setenv("FBRL_OUTPUT_ROOT", "/tmp/somewhere", 1);
    CHECK(default_output_root() == "/tmp/somewhere");
    unsetenv("FBRL_OUTPUT_ROOT");
    CHECK(default_output_root() == "runs");
}

TEST_CASE("command-line exit codes") {
    fs::path out = scratch("cli");
    CHECK(cli("hardness --runs 2 --budget 10 --set hardness.horizon=6 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "config.json"));
    CHECK(fs::exists(out / "hardness_seed0.csv"));
    CHECK(cli("hardness --set hardness.nokey=1 --out " + out.string()) == 2);
    CHECK(cli("run-foobar --preset nope") == 2);
    CHECK(cli("--no-such-flag") == 2);
    CHECK(cli("eval --mdp " + (out / "missing.mdp").string() + " --dataset " + (out / "missing.ds").string()) == 1);
    fs::path data = out / "d.txt", mdp = out / "m.txt";
    CHECK(cli("gen-data --env onestep --n 100 --out " + data.string() + " --mdp-out " + mdp.string()) == 0);
    CHECK(cli("eval --mdp " + mdp.string() + " --dataset " + data.string()) == 0);
    CHECK(cli("run-foobar --set env.horizon=3 --set forward.lr=1e308 --seeds 1 --out " + out.string()) == 1);
    CHECK(cli("summarize " + (out / "hardness_seed0.csv").string() + " --out " + (out / "s.csv").string()) == 0);
    CHECK(slurp(out / "s.csv").rfind("# fbrl-summary v1", 0) == 0);
    fs::remove_all(out);
}
