#include "doctest.h"
#include "support.hpp"

#include "fbrl/dp.hpp"
#include "fbrl/envs.hpp"
#include "fbrl/errors.hpp"
#include "fbrl/metrics.hpp"

#include <cmath>
#include <limits>

using namespace fbrl;

namespace {

Occupancy mu_occupancy(const OneStepHardness& inst) { return {{1.0}, inst.mu}; }

double kl(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0) s += p[i] * std::log(p[i] / q[i]);
    return s;
}

} // namespace

TEST_CASE("one-step coverage arithmetic") {
    OneStepHardness inst = make_one_step_hardness();
    const LatentMdp& m = *inst.env.mdp;
    CoverageReport c = coverage_density_ratio(m, inst.optimal, mu_occupancy(inst));
    CHECK(c.aggregate == doctest::Approx(18.0).epsilon(1e-12));
    CHECK_FALSE(c.infinite);
    CHECK(c.per_horizon.size() == 2);
    CHECK(c.per_horizon[0] == 1.0);

    CoverageReport self = coverage_density_ratio(m, inst.optimal, exact_occupancy(m, inst.optimal));
    CHECK(self.aggregate == 1.0);

    Policy a1 = fbrl::test::deterministic({{0}, {0, 0, 0}}, 2);
    CoverageReport inf = coverage_density_ratio(m, inst.optimal, exact_occupancy(m, a1));
    CHECK(inf.infinite);
    CHECK(inf.witness_h == 2);
    CHECK(inf.witness_s == 2);
    CHECK(std::isinf(inf.per_horizon[1]));
    CHECK(inf.aggregate == 1.0);
}

TEST_CASE("density ratio: zero over zero counts as zero") {
    Occupancy t = {{0.5, 0.5, 0.0}}, r = {{0.25, 0.75, 0.0}};
    CoverageReport c = coverage_density_ratio(t, r);
    CHECK(c.aggregate == 2.0);
    CHECK_FALSE(c.infinite);
}

TEST_CASE("performance-difference coverage") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        LatentMdp m = fbrl::test::random_mdp(3, {2, 3, 2}, 2, seed);
        Policy target = fbrl::test::random_policy(m, seed + 100);
        Policy ref = fbrl::test::random_policy(m, seed + 200);
        CoverageReport self = coverage_perf_diff(m, target, exact_occupancy(m, target));
        CHECK(self.aggregate == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(self.kind == CoverageKind::perf_diff);
        double pd = coverage_perf_diff(m, target, exact_occupancy(m, ref)).aggregate;
        double dr = coverage_density_ratio(m, target, exact_occupancy(m, ref)).aggregate;
        CHECK(pd <= dr + 1e-9);
        CHECK(pd >= 0.0);
    }
    LatentMdp single = fbrl::test::random_mdp(3, {2, 2, 2}, 1, 4);
    Policy only = Policy::uniform(1, 3, 1);
    CHECK(coverage_perf_diff(single, only, {{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}}).aggregate == 1.0);
    CHECK(enumerate_deterministic_policies(single).size() == 1);
    CHECK_THROWS_AS(enumerate_deterministic_policies(fbrl::test::random_mdp(3, {4, 4, 4}, 4, 0), 1000), ConfigError);
}

TEST_CASE("TV-minimizing first actions") {
    OneStepHardness inst = make_one_step_hardness();
    const LatentMdp& m = *inst.env.mdp;
    TvMinimizer det = tv_minimizing_policy(m, inst.mu);
    CHECK(det.action == 0);
    CHECK(det.tv == doctest::Approx(0.1).epsilon(1e-12));

    // TV(p) = (1.7 - 1.7p)/2 below p = 17/19 and p/10 above.
    auto tv_at = [](double p) { return p <= 17.0 / 19 ? 0.85 * (1 - p) : 0.1 * p; };
    TvMinimizer mix = tv_minimizing_mixture(m, inst.mu, 1e-4);
    CHECK(std::abs(mix.weights[0] - 17.0 / 19) <= 1e-4);
    CHECK(mix.weights[0] + mix.weights[1] == doctest::Approx(1.0));
    CHECK(mix.tv == doctest::Approx(tv_at(mix.weights[0])).epsilon(1e-9));
    CHECK(std::abs(mix.tv - 1.7 / 19) <= 1e-4);
    CHECK(mix.tv == doctest::Approx(0.0895).epsilon(1e-3));

    TvMinimizer coarse = tv_minimizing_mixture(m, inst.mu, 1.0);
    CHECK(coarse.tv == doctest::Approx(det.tv).epsilon(1e-12));
    CHECK(coarse.weights[0] == 1.0);

    TvMinimizer exact = tv_minimizing_policy(m, exact_occupancy(m, fbrl::test::deterministic({{0}, {0, 0, 0}}, 2))[1]);
    CHECK(exact.tv == 0.0);
    CHECK(exact.action == 0);
}

TEST_CASE("relative success") {
    CombLock lock = make_comb_lock(8, 1, ObsMode::latent);
    CHECK(relative_success(lock.env, lock.optimal, 500, 1.0, 0) == 1.0);
    CHECK(relative_success(lock.env, Policy::uniform(1, 8, 10), 2000, 1.0, 0) <= 0.01);
    CombLock adv = make_adversarial_lock(10, 1, ObsMode::latent);
    Policy star = solve_optimal(*adv.env.mdp).policy;
    double raw = relative_success(adv.env, star, 10000, 1.0, 1);
    CHECK(std::abs(raw - 0.1) <= 3 * std::sqrt(0.09 / 10000));
    CHECK(relative_success(adv.env, star, 10000, 0.1, 1) == doctest::Approx(raw / 0.1));
}

TEST_CASE("divergences") {
    Divergences same = divergences({0.2, 0.3, 0.5}, {0.2, 0.3, 0.5});
    CHECK(same.tv == 0.0);
    CHECK(same.js == doctest::Approx(0.0).scale(1.0));
    Divergences disjoint = divergences({1, 0}, {0, 1});
    CHECK(disjoint.tv == 1.0);
    CHECK(disjoint.js == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    std::vector<double> p = {1.0, 0.0}, q = {0.5, 0.5}, mid = {0.75, 0.25};
    Divergences d = divergences(p, q);
    CHECK(d.tv == doctest::Approx(0.5));
    CHECK(d.js == doctest::Approx(0.5 * kl(p, mid) + 0.5 * kl(q, mid)).epsilon(1e-12));

    Rng rng = make_rng(3, "div");
    auto draw = [&] {
        std::vector<double> v(4);
        double t = 0;
        for (double& x : v) t += x = uniform01(rng);
        for (double& x : v) x /= t;
        return v;
    };
    for (int i = 0; i < 200; ++i) {
        auto a = draw(), b = draw(), c = draw();
        Divergences ab = divergences(a, b), ba = divergences(b, a);
        CHECK(ab.tv == doctest::Approx(ba.tv).epsilon(1e-14));
        CHECK(ab.js == doctest::Approx(ba.js).epsilon(1e-12));
        CHECK(ab.tv <= divergences(a, c).tv + divergences(c, b).tv + 1e-12);
        CHECK(ab.js <= std::log(2.0) + 1e-12);
        CHECK(ab.js >= 0.0);
        // Pinsker-type bound: JS <= TV * ln 2.
        CHECK(ab.js <= ab.tv * std::log(2.0) + 1e-12);
    }
    CHECK_THROWS(divergences({0.5, 0.5}, {1.0}));
}
