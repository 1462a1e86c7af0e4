#include "fbrl/forward.hpp"

#include "fbrl/errors.hpp"
#include "fbrl/mlp.hpp"
#include "fbrl/qfunc.hpp"
#include "fbrl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace fbrl {

double game_loss(const DecisionRule& pi, const TestFn& g, const std::vector<OnlineTuple>& on, const std::vector<Obs>& off) {
    if (on.empty() || off.empty()) throw std::invalid_argument("game needs nonempty online and offline data");
    int A = pi.num_actions();
    std::vector<double> p(A);
    double a = 0.0, b = 0.0;
    for (const auto& t : on) {
        pi.probs(t.s, p.data());
        a += A * p[t.a] * g(t.next);
    }
    for (const auto& o : off) b += g(o);
    return a / on.size() - b / off.size();
}

Eigen::MatrixXd game_matrix(const std::vector<RulePtr>& policies, const FiniteDiscriminators& disc,
                            const std::vector<OnlineTuple>& on, const std::vector<Obs>& off) {
    if (policies.empty()) throw std::invalid_argument("empty policy class");
    if (disc.fns.empty()) throw std::invalid_argument("empty discriminator class");
    if (on.empty() || off.empty()) throw std::invalid_argument("game needs nonempty online and offline data");
    int K = static_cast<int>(policies.size()), J = static_cast<int>(disc.size()), N = static_cast<int>(on.size());
    int A = policies.front()->num_actions();
    Eigen::MatrixXd gon(N, J);
    Eigen::VectorXd goff = Eigen::VectorXd::Zero(J);
    for (int j = 0; j < J; ++j) {
        for (int i = 0; i < N; ++i) gon(i, j) = disc.fns[j](on[i].next);
        for (const auto& o : off) goff[j] += disc.fns[j](o);
    }
    goff /= static_cast<double>(off.size());
    Eigen::MatrixXd P(K, N);
    std::vector<double> buf(A);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < N; ++i) {
            policies[k]->probs(on[i].s, buf.data());
            P(k, i) = buf[on[i].a];
        }
    Eigen::MatrixXd U = (static_cast<double>(A) / N) * P * gon;
    U.rowwise() -= goff.transpose();
    return U;
}

GameResult minmax_finite(const std::vector<RulePtr>& policies, const FiniteDiscriminators& disc,
                         const std::vector<OnlineTuple>& on, const std::vector<Obs>& off, int T) {
    if (T < 1) throw std::invalid_argument("game needs T >= 1");
    Eigen::MatrixXd U = game_matrix(policies, disc, on, off);
    int K = static_cast<int>(U.rows()), J = static_cast<int>(U.cols());
    double range = U.maxCoeff() - U.minCoeff();
    if (!(range > 0.0)) range = 1.0;
    double eta = K > 1 ? std::sqrt(8.0 * std::log(static_cast<double>(K)) / T) / range : 0.0;
    GameResult res;
    Eigen::VectorXd w = Eigen::VectorXd::Constant(K, 1.0 / K);
    Eigen::VectorXd loss = Eigen::VectorXd::Zero(K);
    for (int t = 0; t < T; ++t) {
        Eigen::VectorXd v = U.transpose() * w;
        int j = 0;
        for (int i = 1; i < J; ++i)
            if (v[i] > v[j]) j = i;
        if (!std::isfinite(v[j])) throw DivergedError("non-finite game loss at iteration " + std::to_string(t + 1));
        res.transcript.rows.push_back({t + 1, j, v[j], 0.0});
        res.iterates.push_back(w);
        if (res.transcript.best < 0 || v[j] < res.transcript.rows[res.transcript.best].u) res.transcript.best = t;
        loss += U.col(j);
        double lo = loss.minCoeff();
        w = (-eta * (loss.array() - lo)).exp();
        w /= w.sum();
    }
    const Eigen::VectorXd& wb = res.iterates[res.transcript.best];
    std::vector<RulePtr> parts;
    std::vector<double> ws;
    for (int k = 0; k < K; ++k)
        if (wb[k] > 0.0) {
            parts.push_back(policies[k]);
            ws.push_back(wb[k]);
        }
    res.rule = parts.size() == 1 ? parts.front() : std::make_shared<MixtureRule>(std::move(parts), std::move(ws));
    return res;
}

double brute_force_minimax(const Eigen::MatrixXd& U, int grid) {
    int K = static_cast<int>(U.rows());
    if (K < 1 || K > 4) throw std::invalid_argument("brute-force minimax supports 1 to 4 policies");
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> c(K, 0);
    // Enumerate compositions of `grid` into K nonnegative parts.
    std::function<void(int, int)> rec = [&](int k, int left) {
        if (k == K - 1) {
            c[k] = left;
            Eigen::VectorXd w(K);
            for (int i = 0; i < K; ++i) w[i] = static_cast<double>(c[i]) / grid;
            best = std::min(best, (U.transpose() * w).maxCoeff());
            return;
        }
        for (int x = 0; x <= left; ++x) {
            c[k] = x;
            rec(k + 1, left - x);
        }
    };
    rec(0, grid);
    return best;
}

namespace {

/// Deduplicated feature vectors.
struct PointSet {
    std::map<std::vector<double>, int> index;
    std::vector<Eigen::VectorXd> rows;

    int add(const Eigen::VectorXd& x) {
        std::vector<double> key(x.data(), x.data() + x.size());
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(rows.size());
        index.emplace(std::move(key), id);
        rows.push_back(x);
        return id;
    }

    Eigen::MatrixXd matrix() const {
        Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i].transpose();
        return m;
    }
};

std::vector<int> subsample(int n, int cap, Rng& rng) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (cap <= 0 || n <= cap) return idx;
    for (int i = 0; i < cap; ++i) std::swap(idx[i], idx[i + uniform_int(rng, n - i)]);
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    return idx;
}

struct Triple {
    int src, a, next;
    double count;
};

} // namespace

GameResult minmax_mmd(const std::vector<OnlineTuple>& on, const std::vector<Obs>& off, int A, const MmdGameConfig& cfg, Rng& rng) {
    if (cfg.T < 1) throw std::invalid_argument("game needs T >= 1");
    if (on.empty() || off.empty()) throw std::invalid_argument("game needs nonempty online and offline data");
    std::vector<int> on_idx = subsample(static_cast<int>(on.size()), cfg.max_points, rng);
    std::vector<int> off_idx = subsample(static_cast<int>(off.size()), cfg.max_points, rng);
    double N = static_cast<double>(on_idx.size()), M = static_cast<double>(off_idx.size());

    PointSet pts, srcs;
    std::map<std::tuple<int, int, int>, double> agg;
    for (int i : on_idx) {
        int s = srcs.add(on[i].s.x);
        int n = pts.add(on[i].next.x);
        if (on[i].a < 0 || on[i].a >= A) throw std::out_of_range("online action out of range");
        agg[{s, on[i].a, n}] += 1.0;
    }
    std::vector<int> off_pt;
    for (int j : off_idx) off_pt.push_back(pts.add(off[j].x));
    int m = static_cast<int>(pts.rows.size());
    std::vector<Triple> triples;
    for (const auto& [k, c] : agg) triples.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), c});
    Eigen::VectorXd q = Eigen::VectorXd::Zero(m);
    for (int p : off_pt) q[p] += 1.0 / M;

    double sigma = cfg.kernel.sigma;
    if (cfg.kernel.rule == BandwidthRule::median) {
        std::vector<Eigen::VectorXd> pool;
        for (int i : on_idx) pool.push_back(on[i].next.x);
        for (int j : off_idx) pool.push_back(off[j].x);
        std::vector<int> pick = subsample(static_cast<int>(pool.size()), 1000, rng);
        Eigen::MatrixXd P(pick.size(), pool.front().size());
        for (std::size_t i = 0; i < pick.size(); ++i) P.row(i) = pool[pick[i]].transpose();
        sigma = median_bandwidth(P);
    }
    Eigen::MatrixXd U = pts.matrix();
    Eigen::MatrixXd K = rbf_gram(U, U, sigma);

    int ns = static_cast<int>(srcs.rows.size());
    Eigen::MatrixXd X(srcs.rows.front().size(), ns);
    for (int i = 0; i < ns; ++i) X.col(i) = srcs.rows[i];

    Mlp net(static_cast<int>(X.rows()), cfg.policy.hidden, A, rng, true);
    Adam opt(net.num_params(), cfg.policy.lr);
    Eigen::VectorXd theta = net.params(), best_theta = theta;
    GameResult res;
    double scale = A / N;
    for (int t = 0; t < cfg.T; ++t) {
        Eigen::MatrixXd P = softmax_columns(net.forward(X));
        Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
        for (const auto& tr : triples) w[tr.next] += scale * tr.count * P(tr.a, tr.src);
        Eigen::VectorXd diff = w - q;
        Eigen::VectorXd f = K * diff;
        double m2 = diff.dot(f);
        if (!std::isfinite(m2)) throw DivergedError("non-finite game loss at iteration " + std::to_string(t + 1));
        double mmd = std::sqrt(std::max(m2, 0.0));
        Eigen::VectorXd g = mmd > 0.0 ? Eigen::VectorXd(f / mmd) : Eigen::VectorXd::Zero(m);
        double u = diff.dot(g);
        res.transcript.rows.push_back({t + 1, -1, u, m2});
        if (res.transcript.best < 0 || u < res.transcript.rows[res.transcript.best].u) {
            res.transcript.best = t;
            best_theta = theta;
        }
        if (t + 1 == cfg.T) break;
        for (int step = 0; step < cfg.policy.steps; ++step) {
            if (step > 0) P = softmax_columns(net.forward(X));
            Eigen::MatrixXd C = Eigen::MatrixXd::Zero(A, ns);
            for (const auto& tr : triples) C(tr.a, tr.src) += scale * tr.count * g[tr.next];
            Eigen::MatrixXd G(A, ns);
            for (int s = 0; s < ns; ++s) {
                double avg = C.col(s).dot(P.col(s));
                G.col(s) = P.col(s).array() * (C.col(s).array() - avg);
            }
            opt.step(theta, net.gradient(X, G));
            net.set_params(theta);
        }
    }
    net.set_params(best_theta);
    res.rule = std::make_shared<SoftmaxRule>(std::move(net));
    return res;
}

ForwardResult fail_forward(const Environment& env, const StateOnlyDataset& off, const ForwardConfig& cfg, std::uint64_t seed,
                           const ForwardHook& hook) {
    int H = env.horizon(), A = env.num_actions();
    if (off.horizon != H) throw std::invalid_argument("offline data horizon does not match the environment");
    off.validate();
    if (cfg.N < 1) throw std::invalid_argument("forward phase needs N >= 1");
    if (cfg.mode == ForwardMode::finite && (!cfg.policy_class || !cfg.disc_class))
        throw std::invalid_argument("finite forward mode needs policy and discriminator classes");
    TraceSim sim(env, make_rng(seed, "forward-env"));
    Rng prng = make_rng(seed, "forward-policy");
    ForwardResult out;
    std::vector<RulePtr> rules;
    for (int h = 1; h < H; ++h) {
        Policy prefix = rules.empty() ? Policy() : Policy(1, rules);
        std::vector<OnlineTuple> on;
        on.reserve(cfg.N);
        for (int n = 0; n < cfg.N; ++n) {
            Obs o = sim.reset();
            for (int t = 1; t < h; ++t) o = sim.step(prefix.act(t, o, prng)).next;
            int a = uniform_int(prng, A);
            StepResult r = sim.step(a);
            on.push_back({std::move(o), a, std::move(r.next)});
        }
        out.episodes += cfg.N;
        GameResult g;
        try {
            if (cfg.mode == ForwardMode::mmd) {
                Rng grng = make_rng(seed, "forward-game", static_cast<std::uint64_t>(h));
                g = minmax_mmd(on, off.at(h + 1), A, cfg.game, grng);
            } else {
                g = minmax_finite(cfg.policy_class(h), cfg.disc_class(h + 1), on, off.at(h + 1), cfg.game.T);
            }
        } catch (const DivergedError& e) {
            throw DivergedError("forward horizon " + std::to_string(h) + ": " + e.what());
        }
        rules.push_back(g.rule);
        out.transcripts.push_back(std::move(g.transcript));
        if (hook) hook(h, Policy(1, rules), out.transcripts.back(), out.episodes);
    }
    rules.push_back(std::make_shared<UniformRule>(A));
    out.policy = Policy(1, std::move(rules));
    return out;
}

InterFailResult inter_fail(const StationaryMdp& mdp, InteractiveOfflineOracle& oracle, const InterFailConfig& cfg,
                           std::uint64_t seed) {
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0,1)");
    if (cfg.T < 1) throw std::invalid_argument("Inter-FAIL needs T >= 1");
    int S = mdp.num_states(), A = mdp.num_actions();
    Rng rng = make_rng(seed, "inter-fail");
    Eigen::MatrixXd K = rbf_gram(Eigen::MatrixXd::Identity(S, S), Eigen::MatrixXd::Identity(S, S), std::sqrt(2.0));
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(S, A);
    Eigen::VectorXd flat = Eigen::Map<Eigen::VectorXd>(theta.data(), S * A);
    Adam opt(S * A, cfg.lr);
    std::vector<double> cnt(static_cast<std::size_t>(S) * A * S, 0.0);
    Eigen::VectorXd off = Eigen::VectorXd::Zero(S);
    InterFailResult res;
    res.transcript.first_eligible = cfg.T / 2;
    StationaryPolicy best;
    for (int t = 0; t < cfg.T; ++t) {
        theta = Eigen::Map<Eigen::MatrixXd>(flat.data(), S, A);
        StationaryPolicy pi = softmax_columns(theta.transpose()).transpose();
        int s = geometric_state(mdp, pi, cfg.gamma, rng);
        int a = uniform_int(rng, A);
        int sn = mdp.step(s, a, rng);
        cnt[(static_cast<std::size_t>(s) * A + a) * S + sn] += 1.0;
        off[oracle.query(s)] += 1.0;
        double n = t + 1.0;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(S);
        for (int x = 0; x < S; ++x)
            for (int b = 0; b < A; ++b)
                for (int y = 0; y < S; ++y) {
                    double c = cnt[(static_cast<std::size_t>(x) * A + b) * S + y];
                    if (c > 0.0) w[y] += A * pi(x, b) * c / n;
                }
        Eigen::VectorXd diff = w - off / n;
        Eigen::VectorXd f = K * diff;
        double m2 = diff.dot(f);
        if (!std::isfinite(m2)) throw DivergedError("non-finite Inter-FAIL loss at iteration " + std::to_string(t + 1));
        double mmd = std::sqrt(std::max(m2, 0.0));
        Eigen::VectorXd g = mmd > 0.0 ? Eigen::VectorXd(f / mmd) : Eigen::VectorXd::Zero(S);
        double u = diff.dot(g);
        res.transcript.rows.push_back({t + 1, -1, u, m2});
        if (t >= res.transcript.first_eligible &&
            (res.transcript.best < 0 || u < res.transcript.rows[res.transcript.best].u)) {
            res.transcript.best = t;
            best = pi;
        }
        Eigen::MatrixXd grad(S, A);
        for (int x = 0; x < S; ++x) {
            Eigen::VectorXd C = Eigen::VectorXd::Zero(A);
            for (int b = 0; b < A; ++b)
                for (int y = 0; y < S; ++y) C[b] += A * cnt[(static_cast<std::size_t>(x) * A + b) * S + y] * g[y] / n;
            double avg = 0.0;
            for (int b = 0; b < A; ++b) avg += C[b] * pi(x, b);
            for (int b = 0; b < A; ++b) grad(x, b) = pi(x, b) * (C[b] - avg);
        }
        opt.step(flat, Eigen::Map<Eigen::VectorXd>(grad.data(), S * A));
    }
    res.policy = best;
    res.episodes = cfg.T;
    return res;
}

} // namespace fbrl
