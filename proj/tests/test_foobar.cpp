#include "doctest.h"
#include "support.hpp"

#include "fbrl/dp.hpp"
#include "fbrl/envs.hpp"
#include "fbrl/errors.hpp"
#include "fbrl/foobar.hpp"

#include <cmath>

using namespace fbrl;

namespace {

/// Members shift the correct action by k; k = 0 is the lock's own value table.
QClass shifted_class(const CombLock& lock, int shifts) {
    int H = lock.env.horizon(), A = lock.env.num_actions();
    QClass q;
    for (int h = 1; h <= H; ++h) {
        std::vector<QPtr> row;
        for (int k = 0; k < shifts; ++k) {
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(3, A);
            for (int s = 0; s < 2; ++s) t(s, h < H ? (lock.correct[h - 1][s] + k) % A : k) = 1.0;
            row.push_back(std::make_shared<TabularQ>(t));
        }
        q.members.push_back(row);
    }
    return q;
}

FoobarConfig small_config() {
    FoobarConfig cfg;
    cfg.forward.N = 1000;
    cfg.forward.game.T = 300;
    cfg.backward.N = 1000;
    return cfg;
}

std::string transcript_text(const FoobarRun& r) {
    std::string s;
    for (const auto& tr : r.forward.transcripts)
        for (const auto& row : tr.rows) s += std::to_string(row.disc) + ":" + std::to_string(row.u) + ";";
    return s;
}

} // namespace

TEST_CASE("finite mode builds its discriminators from the value class objects") {
    CombLock lock = make_comb_lock(4, 1, ObsMode::latent);
    StateOnlyDataset off = collect_eps_greedy(lock.env, lock.optimal, 0.1, 1000, 1);
    FoobarConfig cfg = small_config();
    cfg.forward.mode = ForwardMode::finite;
    cfg.backward.q = shifted_class(lock, 3);
    FoobarRun run = run_foobar(lock.env, off, cfg, 5);
    REQUIRE(run.discriminators.size() == 4);
    for (int h = 1; h <= 4; ++h) {
        const auto& d = run.discriminators[h - 1];
        REQUIRE(d.source);
        REQUIRE(d.source->size() == 3);
        for (int i = 0; i < 3; ++i) CHECK(d.source->at(i).get() == cfg.backward.q.members[h - 1][i].get());
        CHECK(d.size() == 3 * 10);
    }
    CHECK(success_probability(*lock.env.mdp, run.backward.policy) == 1.0);

    FoobarConfig bad = small_config();
    bad.forward.mode = ForwardMode::finite;
    CHECK_THROWS_AS(run_foobar(lock.env, off, bad, 5), ConfigError);
}

TEST_CASE("a replayed run reproduces its transcripts") {
    CombLock lock = make_comb_lock(5, 2, ObsMode::latent);
    StateOnlyDataset off = collect_eps_greedy(lock.env, lock.optimal, 0.1, 1000, 2);
    FoobarRun a = run_foobar(lock.env, off, small_config(), 11);
    FoobarRun b = run_foobar(lock.env, off, small_config(), 11);
    FoobarRun c = run_foobar(lock.env, off, small_config(), 12);
    CHECK(transcript_text(a) == transcript_text(b));
    CHECK(transcript_text(a) != transcript_text(c));
    CHECK(a.backward.episodes == b.backward.episodes);
    for (int h = 1; h <= 5; ++h) {
        auto qa = std::static_pointer_cast<const TabularQ>(a.backward.q[h - 1]);
        auto qb = std::static_pointer_cast<const TabularQ>(b.backward.q[h - 1]);
        CHECK(qa->table() == qb->table());
    }
}

TEST_CASE("mixed policies interpolate between backward and forward") {
    CombLock lock = make_comb_lock(6, 3, ObsMode::latent);
    StateOnlyDataset off = collect_eps_greedy(lock.env, lock.optimal, 0.1, 2000, 3);
    FoobarConfig cfg = small_config();
    cfg.forward.N = 2000;
    cfg.backward.N = 2000;
    std::vector<int> seen;
    FoobarHooks hooks;
    hooks.forward = [&](int h, const Policy& prefix, const GameTranscript&, long) {
        CHECK(prefix.last() == h);
        seen.push_back(h);
    };
    FoobarRun run = run_foobar(lock.env, off, cfg, 4, hooks);
    CHECK(seen == std::vector<int>{1, 2, 3, 4, 5});
    const LatentMdp& m = *lock.env.mdp;
    CHECK(policy_value(m, mixed_policy(run, 1)) == doctest::Approx(policy_value(m, run.backward.policy)).epsilon(1e-12));
    CHECK(policy_value(m, mixed_policy(run, 7)) == doctest::Approx(policy_value(m, run.forward.policy)).epsilon(1e-12));
    CHECK_THROWS(mixed_policy(run, 0));
    CHECK_THROWS(mixed_policy(run, 8));
    std::vector<double> rate;
    for (int h = 1; h <= 7; ++h) rate.push_back(evaluate_mixed(run, h, lock.env, 2000, 9));
    CHECK(rate.front() >= 0.9);
    CHECK(rate.front() >= rate.back() - 0.05);
    for (int h = 1; h <= 7; ++h) CHECK(std::abs(rate[h - 1] - success_probability(m, mixed_policy(run, h))) <= 4 * std::sqrt(0.25 / 2000));
}

TEST_CASE("phase failures carry the phase tag") {
    CombLock lock = make_comb_lock(4, 0, ObsMode::latent);
    StateOnlyDataset off = collect_eps_greedy(lock.env, lock.optimal, 0.1, 100, 0);
    FoobarConfig cfg = small_config();
    cfg.forward.N = 0;
    try {
        run_foobar(lock.env, off, cfg, 0);
        FAIL("no error");
    } catch (const PhaseError& e) {
        CHECK(e.phase == "forward");
    }
    cfg = small_config();
    cfg.backward.N = 0;
    try {
        run_foobar(lock.env, off, cfg, 0);
        FAIL("no error");
    } catch (const PhaseError& e) {
        CHECK(e.phase == "backward");
        CHECK(std::string(e.what()).rfind("backward phase:", 0) == 0);
    }
}
