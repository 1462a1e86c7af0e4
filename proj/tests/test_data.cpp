#include "doctest.h"
#include "support.hpp"

#include "fbrl/dataset.hpp"
#include "fbrl/dp.hpp"
#include "fbrl/envs.hpp"
#include "fbrl/errors.hpp"
#include "fbrl/metrics.hpp"

#include <cmath>
#include <sstream>

using namespace fbrl;

TEST_CASE("eps-greedy coverage of the optimal policy") {
    CombLock lock = make_comb_lock(10, 1, ObsMode::latent);
    CoverageReport c = coverage_density_ratio(*lock.env.mdp, lock.optimal, exact_occupancy(*lock.env.mdp, eps_greedy(lock.optimal, 0.1)));
    CHECK(c.aggregate == doctest::Approx(std::pow(0.91, -9)).epsilon(1e-10));
    CHECK(c.aggregate == doctest::Approx(2.337).epsilon(1e-3));

    CombLock big = make_comb_lock(100, 1, ObsMode::latent);
    CoverageReport cb = coverage_density_ratio(*big.env.mdp, big.optimal, exact_occupancy(*big.env.mdp, eps_greedy(big.optimal, 0.01)));
    CHECK(cb.aggregate == doctest::Approx(std::pow(1.0 - 0.01 + 0.001, -99)).epsilon(1e-10));
    CHECK(cb.aggregate > 2.3);
    CHECK(cb.aggregate < 2.6);
}

TEST_CASE("eps-greedy data: empirical coverage and convergence to the behavior occupancy") {
    CombLock lock = make_comb_lock(10, 2, ObsMode::latent);
    StateOnlyDataset d = collect_eps_greedy(lock.env, lock.optimal, 0.1, 10000, 5);
    d.validate();
    CHECK(d.provenance == Provenance::eps_greedy);
    Occupancy exact = exact_occupancy(*lock.env.mdp, eps_greedy(lock.optimal, 0.1));
    Occupancy emp = dataset_marginals(d, lock.env);
    for (int h = 0; h < 10; ++h) CHECK(fbrl::test::tv(emp[h], exact[h]) <= 0.03);
    CoverageReport c = coverage_density_ratio(*lock.env.mdp, lock.optimal, emp);
    CHECK(c.aggregate >= 2.0);
    CHECK(c.aggregate <= 3.0);
}

TEST_CASE("eps = 0 data matches the optimal occupancy") {
    CombLock lock = make_comb_lock(10, 3, ObsMode::latent);
    StateOnlyDataset d = collect_eps_greedy(lock.env, lock.optimal, 0.0, 10000, 6);
    Occupancy exact = exact_occupancy(*lock.env.mdp, lock.optimal);
    for (int h = 1; h <= 10; ++h) CHECK(fbrl::test::tv(empirical_marginal(d, h, 3), exact[h - 1]) <= 0.03);
    auto m1 = empirical_marginal(d, 1, 3);
    CHECK(m1[0] == doctest::Approx(0.5).epsilon(0.05));
    CHECK(m1[2] == 0.0);
    CHECK_THROWS(collect_eps_greedy(lock.env, lock.optimal, 1.5, 10, 0));
}

TEST_CASE("rich eps-greedy data decodes to the same latent marginals") {
    CombLock lock = make_comb_lock(6, 3, ObsMode::rich);
    StateOnlyDataset d = collect_eps_greedy(lock.env, lock.optimal, 0.0, 2000, 6);
    CHECK(d.mode == ObsMode::rich);
    CHECK(d.dim == 16);
    Occupancy emp = dataset_marginals(d, lock.env);
    Occupancy exact = exact_occupancy(*lock.env.mdp, lock.optimal);
    for (int h = 0; h < 6; ++h) CHECK(fbrl::test::tv(emp[h], exact[h]) <= 0.05);
}

TEST_CASE("inadmissible marginals") {
    auto first = inadmissible_marginal(1);
    CHECK(first == std::vector<double>{0.1, 0.05, 0.85});
    CHECK(first[0] + first[1] == doctest::Approx(0.15));
    auto last = inadmissible_marginal(10);
    CHECK(last[0] + last[1] == doctest::Approx(1.0));
    double prev = 0.0;
    for (int k = 1; k <= 10; ++k) {
        auto m = inadmissible_marginal(k);
        CHECK(std::abs(m[0] + m[1] + m[2] - 1.0) <= 1e-12);
        for (double x : m) CHECK(x >= -1e-15);
        CHECK(m[0] + m[1] > prev);
        prev = m[0] + m[1];
    }
    CHECK_THROWS_AS(inadmissible_marginal(11), ConfigError);
}

TEST_CASE("benign data is detectably inadmissible") {
    CombLock lock = make_comb_lock(10, 4, ObsMode::latent);
    StateOnlyDataset d = collect_benign_inadmissible(lock.env, 20000, 9);
    CHECK(d.provenance == Provenance::benign_inadmissible);
    auto m1 = empirical_marginal(d, 1, 3);
    CHECK(fbrl::test::tv(m1, {0.5, 0.5, 0.0}) <= 0.02);
    double prev = 0.0;
    for (int h = 2; h <= 10; ++h) {
        auto m = empirical_marginal(d, h, 3);
        CHECK(fbrl::test::tv(m, inadmissible_marginal(h - 1)) <= 0.02);
        // Good mass grows with h, which no policy's lock occupancy can do.
        CHECK(m[0] + m[1] > prev);
        prev = m[0] + m[1];
    }
    CombLock deep = make_comb_lock(13, 4, ObsMode::latent);
    CHECK_THROWS_AS(collect_benign_inadmissible(deep.env, 10, 0), ConfigError);
}

TEST_CASE("dataset serialization") {
    CombLock lock = make_comb_lock(5, 4, ObsMode::rich);
    StateOnlyDataset d = collect_eps_greedy(lock.env, lock.optimal, 0.2, 50, 1);
    std::stringstream ss;
    save_dataset(d, ss);
    std::string text = ss.str();
    StateOnlyDataset back = load_dataset(ss, 5);
    CHECK(back.env_id == d.env_id);
    CHECK(back.seed == d.seed);
    CHECK(back.provenance == d.provenance);
    CHECK(back.dim == d.dim);
    for (int h = 1; h <= 5; ++h)
        for (std::size_t i = 0; i < d.size(h); ++i) CHECK(back.at(h)[i].x == d.at(h)[i].x);

    std::stringstream wrong(text);
    CHECK_THROWS_AS(load_dataset(wrong, 6), LoadError);

    std::stringstream cut(text.substr(0, text.size() * 2 / 3));
    try {
        load_dataset(cut);
        FAIL("truncated input loaded");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("horizon") != std::string::npos);
    }

    CombLock latent = make_comb_lock(4, 4, ObsMode::latent);
    StateOnlyDataset dl = collect_eps_greedy(latent.env, latent.optimal, 0.5, 30, 2);
    std::stringstream ls;
    save_dataset(dl, ls);
    StateOnlyDataset bl = load_dataset(ls);
    for (int h = 1; h <= 4; ++h)
        for (std::size_t i = 0; i < dl.size(h); ++i) CHECK(bl.at(h)[i].id == dl.at(h)[i].id);
}

TEST_CASE("provenance and seed determine the content") {
    CombLock lock = make_comb_lock(6, 4, ObsMode::latent);
    auto a = collect_eps_greedy(lock.env, lock.optimal, 0.3, 100, 17);
    auto b = collect_eps_greedy(lock.env, lock.optimal, 0.3, 100, 17);
    auto c = collect_eps_greedy(lock.env, lock.optimal, 0.3, 100, 18);
    std::stringstream sa, sb, sc;
    save_dataset(a, sa);
    save_dataset(b, sb);
    save_dataset(c, sc);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str() != sc.str());
    auto x = collect_adversarial(lock.env, 100, 3), y = collect_adversarial(lock.env, 100, 3);
    std::stringstream sx, sy;
    save_dataset(x, sx);
    save_dataset(y, sy);
    CHECK(sx.str() == sy.str());
    CHECK(x.provenance == Provenance::adversarial);
}

TEST_CASE("empirical marginals of small datasets") {
    HardnessTree t = make_binary_tree(5, 1);
    for (int h = 2; h <= 5; ++h) {
        auto m = empirical_marginal(t.dataset, h, t.env.mdp->num_states(h));
        CHECK(m[t.path[h - 1]] == 0.5);
        CHECK(m[t.distractor[h - 1]] == 0.5);
    }
    StateOnlyDataset one;
    one.horizon = 1;
    one.data = {{latent_obs(2, 4)}};
    CHECK(empirical_marginal(one, 1, 4) == std::vector<double>{0, 0, 1, 0});
}

TEST_CASE("dataset from exact marginals") {
    CombLock lock = make_comb_lock(3, 0, ObsMode::latent);
    std::vector<std::vector<double>> marg = {{0.5, 0.5, 0.0}, {0.2, 0.3, 0.5}, {0.1, 0.1, 0.8}};
    StateOnlyDataset d = dataset_from_marginals(lock.env, marg, 1000, 1);
    for (int h = 1; h <= 3; ++h) CHECK(fbrl::test::tv(empirical_marginal(d, h, 3), marg[h - 1]) <= 1e-12);
}

TEST_CASE("interactive offline oracle hides actions and follows the behavior policy") {
    StationaryMdp m = make_stationary_lock(4, 3);
    StationaryPolicy mu = uniform_stationary(3, 4);
    InteractiveOfflineOracle oracle(m, mu, make_rng(0, "oracle"));
    std::vector<double> freq(3, 0.0);
    for (int i = 0; i < 10000; ++i) freq[oracle.query(0)] += 1e-4;
    // One of four actions keeps the good states; each good state gets 1/8.
    CHECK(fbrl::test::tv(freq, {0.125, 0.125, 0.75}) <= 0.02);
    CHECK(oracle.queries() == 10000);
    CHECK_THROWS(oracle.query(3));
    CHECK(oracle.query(2) == 2);
}
