#include "doctest.h"
#include "support.hpp"

#include "fbrl/dataset.hpp"
#include "fbrl/dp.hpp"
#include "fbrl/envs.hpp"
#include "fbrl/forward.hpp"
#include "fbrl/metrics.hpp"
#include "fbrl/simulator.hpp"

#include <algorithm>
#include <cmath>

using namespace fbrl;

namespace {

/// Online tuples (s0, uniform a, s') and offline states drawn from `mu` on the one-step instance.
void one_step_data(const OneStepHardness& inst, const std::vector<double>& mu, int n, int m, std::uint64_t seed,
                   std::vector<OnlineTuple>& on, std::vector<Obs>& off) {
    Rng rng = make_rng(seed, "one-step-data");
    ResetSim sim(inst.env, make_rng(seed, "one-step-sim"));
    for (int i = 0; i < n; ++i) {
        int a = uniform_int(rng, 2);
        on.push_back({latent_obs(0, 1), a, sim.query(1, 0, a).next_obs});
    }
    for (int j = 0; j < m; ++j) off.push_back(latent_obs(sample_discrete(mu.data(), 3, rng), 3));
}

FiniteDiscriminators signed_indicators(int S) {
    FiniteDiscriminators d;
    for (int sign : {1, -1})
        for (int s = 0; s < S; ++s) d.fns.push_back([s, sign](const Obs& o) { return o.id == s ? sign * 1.0 : 0.0; });
    return d;
}

std::vector<RulePtr> one_step_class() {
    return {TabularRule::from_actions({0}, 2), TabularRule::from_actions({1}, 2), std::make_shared<UniformRule>(2)};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

TEST_CASE("importance weights average to one under uniform actions") {
    LatentMdp m = fbrl::test::random_mdp(2, {4, 3}, 5, 1);
    Policy pi = fbrl::test::random_policy(m, 2);
    Rng rng = make_rng(3, "iw");
    const int n = 20000;
    double s1 = 0.0, s2 = 0.0, p[5];
    for (int i = 0; i < n; ++i) {
        int s = uniform_int(rng, 4), a = uniform_int(rng, 5);
        pi.probs(1, latent_obs(s, 4), p);
        double w = p[a] * 5;
        s1 += w;
        s2 += w * w;
    }
    double mean = s1 / n, se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 1.0) <= 3 * se);
}

TEST_CASE("game loss matches its definition") {
    OneStepHardness inst = make_one_step_hardness();
    std::vector<OnlineTuple> on;
    std::vector<Obs> off;
    one_step_data(inst, inst.mu, 50, 40, 1, on, off);
    TabularRule a1(1, 2, {1.0, 0.0});
    TestFn g = [](const Obs& o) { return o.id == 2 ? 1.0 : (o.id == 0 ? 0.5 : 0.0); };
    double lhs = 0.0, rhs = 0.0;
    for (const auto& t : on) lhs += (t.a == 0 ? 2.0 : 0.0) * g(t.next) / on.size();
    for (const auto& o : off) rhs += g(o) / off.size();
    CHECK(game_loss(a1, g, on, off) == doctest::Approx(lhs - rhs).epsilon(1e-14));
}

TEST_CASE("matched distributions give a game value within the noise bound") {
    OneStepHardness inst = make_one_step_hardness();
    std::vector<double> d_unif = {0.475, 0.475, 0.05};
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::vector<OnlineTuple> on;
        std::vector<Obs> off;
        one_step_data(inst, d_unif, 4000, 4000, seed, on, off);
        FiniteDiscriminators disc = signed_indicators(3);
        GameResult r = minmax_finite(one_step_class(), disc, on, off, 2000);
        Eigen::MatrixXd U = game_matrix(one_step_class(), disc, on, off);
        double range = U.maxCoeff() - U.minCoeff();
        CHECK(r.transcript.best_u() <= 3 * std::sqrt(range * range * (1.0 / 4000 + 1.0 / 4000)));
    }
}

TEST_CASE("one-step hardness: the game prefers the TV-closest action") {
    OneStepHardness inst = make_one_step_hardness();
    std::vector<OnlineTuple> on;
    std::vector<Obs> off;
    one_step_data(inst, inst.mu, 20000, 20000, 7, on, off);
    std::vector<RulePtr> cls = {TabularRule::from_actions({0}, 2), TabularRule::from_actions({1}, 2)};
    FiniteDiscriminators disc = signed_indicators(3);
    Eigen::MatrixXd U = game_matrix(cls, disc, on, off);
    CHECK(U.row(0).maxCoeff() == doctest::Approx(0.1).epsilon(0.2));
    CHECK(U.row(1).maxCoeff() == doctest::Approx(0.85).epsilon(0.05));
    GameResult r = minmax_finite(cls, disc, on, off, 2000);
    double p[2];
    r.rule->probs(latent_obs(0, 1), p);
    CHECK(p[0] > 0.8);
}

TEST_CASE("T = 1 returns the initial iterate") {
    OneStepHardness inst = make_one_step_hardness();
    std::vector<OnlineTuple> on;
    std::vector<Obs> off;
    one_step_data(inst, inst.mu, 100, 100, 2, on, off);
    GameResult r = minmax_finite(one_step_class(), signed_indicators(3), on, off, 1);
    CHECK(r.transcript.rows.size() == 1);
    CHECK(r.transcript.best == 0);
    double p[2];
    r.rule->probs(latent_obs(0, 1), p);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS(minmax_finite(one_step_class(), signed_indicators(3), on, off, 0));
}

TEST_CASE("finite game transcript invariants") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        OneStepHardness inst = make_one_step_hardness();
        std::vector<OnlineTuple> on;
        std::vector<Obs> off;
        one_step_data(inst, inst.mu, 300, 300, seed, on, off);
        FiniteDiscriminators disc = signed_indicators(3);
        auto cls = one_step_class();
        GameResult r = minmax_finite(cls, disc, on, off, 300);
        Eigen::MatrixXd U = game_matrix(cls, disc, on, off);
        const auto& rows = r.transcript.rows;
        REQUIRE(rows.size() == 300);
        REQUIRE(r.iterates.size() == 300);
        double best = rows[0].u;
        for (std::size_t t = 0; t < rows.size(); ++t) {
            const Eigen::VectorXd& w = r.iterates[t];
            CHECK(w.minCoeff() >= 0.0);
            CHECK(std::abs(w.sum() - 1.0) <= 1e-12);
            Eigen::VectorXd v = U.transpose() * w;
            CHECK(rows[t].u == v[rows[t].disc]);
            CHECK(rows[t].u >= v.maxCoeff());
            best = std::min(best, rows[t].u);
        }
        CHECK(r.transcript.best_u() == best);
        for (int t = 0; t < r.transcript.best; ++t) CHECK(rows[t].u > best);
    }
}

TEST_CASE("finite game value matches brute-force minimax") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng = make_rng(seed, "bf");
        int S = 4, A = 2, K = 2 + static_cast<int>(seed % 3);
        LatentMdp m = fbrl::test::random_mdp(2, {3, S}, A, 200 + seed);
        Environment env = fbrl::test::latent_env(m);
        ResetSim sim(env, make_rng(seed, "bf-sim"));
        std::vector<OnlineTuple> on;
        for (int i = 0; i < 500; ++i) {
            int s = uniform_int(rng, 3), a = uniform_int(rng, A);
            on.push_back({latent_obs(s, 3), a, sim.query(1, s, a).next_obs});
        }
        std::vector<Obs> off;
        for (int j = 0; j < 500; ++j) off.push_back(latent_obs(uniform_int(rng, S), S));
        std::vector<RulePtr> cls;
        for (int k = 0; k < K; ++k) cls.push_back(TabularRule::from_actions({uniform_int(rng, A), uniform_int(rng, A), uniform_int(rng, A)}, A));
        FiniteDiscriminators disc = signed_indicators(S);
        const int T = 2000;
        GameResult r = minmax_finite(cls, disc, on, off, T);
        Eigen::MatrixXd U = game_matrix(cls, disc, on, off);
        double range = U.maxCoeff() - U.minCoeff();
        double bf = brute_force_minimax(U, 200);
        // The grid value overestimates the exact minimax by at most its resolution times the range.
        CHECK(r.transcript.best_u() >= bf - range * K / 200.0 - 1e-12);
        CHECK(r.transcript.best_u() <= bf + std::sqrt(double(A * A) / T) * range);
    }
}

TEST_CASE("FAIL matches the offline marginals on the lock") {
    std::vector<double> worst;
    std::vector<std::vector<double>> ipm;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CombLock lock = make_comb_lock(10, seed, ObsMode::latent);
        Policy behavior = eps_greedy(lock.optimal, 0.1);
        StateOnlyDataset off = collect_eps_greedy(lock.env, lock.optimal, 0.1, 2000, seed);
        ForwardConfig cfg;
        cfg.N = 2000;
        cfg.game.T = 1000;
        ForwardResult fr = fail_forward(lock.env, off, cfg, seed);
        CHECK(fr.transcripts.size() == 9);
        for (const auto& tr : fr.transcripts) {
            double best = tr.rows[tr.best].u;
            for (std::size_t t = tr.first_eligible; t < tr.rows.size(); ++t) CHECK(tr.rows[t].u >= best);
        }
        Occupancy d = exact_occupancy(*lock.env.mdp, fr.policy);
        Occupancy mu = exact_occupancy(*lock.env.mdp, behavior);
        Occupancy emp = dataset_marginals(off, lock.env);
        double w = 0.0;
        std::vector<double> per_h;
        for (int h = 0; h < 10; ++h) {
            w = std::max(w, fbrl::test::tv(d[h], mu[h]));
            double dev = 0.0;
            for (int s = 0; s < 3; ++s) dev = std::max(dev, std::abs(d[h][s] - emp[h][s]));
            per_h.push_back(dev);
        }
        worst.push_back(w);
        ipm.push_back(per_h);
    }
    CHECK(median(worst) <= 0.15);

    // The per-horizon IPM stays under a linear envelope fitted on the first half of the horizons.
    std::vector<double> med(10);
    for (int h = 0; h < 10; ++h) {
        std::vector<double> col;
        for (const auto& r : ipm) col.push_back(r[h]);
        med[h] = median(col);
    }
    double c = 0.0;
    for (int h = 1; h <= 5; ++h) c = std::max(c, med[h - 1] / h);
    double noise = 3 * std::sqrt(0.25 / 2000);
    for (int h = 1; h <= 10; ++h) CHECK(med[h - 1] <= c * h + noise);
}

TEST_CASE("FAIL with H = 1 appends only the uniform completion") {
    OneStepHardness inst = make_one_step_hardness();
    LatentMdp m(1, {1}, 2, 0.0, 1.0);
    m.set_initial({1.0});
    Environment env = fbrl::test::latent_env(m);
    StateOnlyDataset off;
    off.horizon = 1;
    off.data = {{latent_obs(0, 1)}};
    ForwardResult fr = fail_forward(env, off, ForwardConfig{}, 0);
    CHECK(fr.transcripts.empty());
    CHECK(fr.policy.last() == 1);
    double p[2];
    fr.policy.probs(1, latent_obs(0, 1), p);
    CHECK(p[0] == 0.5);
}

TEST_CASE("finite-mode FAIL on the one-step instance reduces to a single game") {
    OneStepHardness inst = make_one_step_hardness();
    StateOnlyDataset off = dataset_from_marginals(inst.env, {{1.0}, inst.mu}, 2000, 3);
    ForwardConfig cfg;
    cfg.mode = ForwardMode::finite;
    cfg.N = 4000;
    cfg.game.T = 500;
    cfg.policy_class = [](int) { return std::vector<RulePtr>{TabularRule::from_actions({0}, 2), TabularRule::from_actions({1}, 2)}; };
    cfg.disc_class = [](int) { return signed_indicators(3); };
    int calls = 0;
    ForwardResult fr = fail_forward(inst.env, off, cfg, 5, [&](int h, const Policy&, const GameTranscript&, long) {
        CHECK(h == 1);
        ++calls;
    });
    CHECK(calls == 1);
    CHECK(fr.transcripts.size() == 1);
    double p[2];
    fr.policy.probs(1, latent_obs(0, 1), p);
    CHECK(p[0] > 0.8);
}

TEST_CASE("geometric stopping has mean horizon 1/(1-gamma)") {
    Rng rng = make_rng(1, "geom");
    const double gamma = 0.9;
    const int n = 10000;
    double s1 = 0.0;
    for (int i = 0; i < n; ++i) s1 += sample_geometric(1.0 - gamma, rng) + 1;
    double se = std::sqrt(gamma / ((1 - gamma) * (1 - gamma)) / n);
    CHECK(std::abs(s1 / n - 1.0 / (1.0 - gamma)) <= 3 * se);
}

TEST_CASE("Inter-FAIL: self-matching oracle") {
    StationaryMdp m = make_stationary_lock(3, 2);
    InteractiveOfflineOracle oracle(m, uniform_stationary(3, 3), make_rng(0, "oracle"));
    InterFailConfig cfg;
    cfg.T = 2000;
    InterFailResult r = inter_fail(m, oracle, cfg, 1);
    CHECK(r.transcript.first_eligible == 1000);
    CHECK(r.transcript.best >= 1000);
    CHECK(r.transcript.best_u() <= 3 * std::sqrt(2.0 * 2.0 / 1000));
    for (std::size_t t = r.transcript.first_eligible; t < r.transcript.rows.size(); ++t) CHECK(r.transcript.rows[t].u >= r.transcript.best_u());
    CHECK(oracle.queries() == 2000);
}

TEST_CASE("Inter-FAIL recovers the oracle occupancy on a small chain") {
    std::vector<double> tvs;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::vector<int> c;
        StationaryMdp m = make_stationary_lock(2, seed, &c);
        StationaryPolicy mu(3, 2);
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 2; ++a) mu(s, a) = s < 2 && a == c[s] ? 0.9 : (s < 2 ? 0.1 : 0.5);
        InteractiveOfflineOracle oracle(m, mu, make_rng(seed, "oracle"));
        InterFailConfig cfg;
        InterFailResult r = inter_fail(m, oracle, cfg, seed);
        for (int s = 0; s < 3; ++s) CHECK(std::abs(r.policy.row(s).sum() - 1.0) <= 1e-9);
        Eigen::VectorXd a = discounted_occupancy(m, r.policy, 0.9, m.initial());
        Eigen::VectorXd b = discounted_occupancy(m, mu, 0.9, m.initial());
        tvs.push_back(0.5 * (a - b).cwiseAbs().sum());
    }
    CHECK(median(tvs) <= 0.1);
}
