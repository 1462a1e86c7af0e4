#include "fbrl/qfunc.hpp"

#include "fbrl/dp.hpp"
#include "fbrl/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <cmath>
#include <istream>
#include <ostream>

namespace fbrl {

double QFunction::value(const Obs& o, int a) const {
    std::vector<double> v(num_actions());
    values(o, v.data());
    return v[a];
}

void TabularQ::values(const Obs& o, double* out) const {
    if (o.id < 0) throw PolicyDomainError("tabular Q needs a latent id");
    if (o.id >= table_.rows()) {
        for (Eigen::Index a = 0; a < table_.cols(); ++a) out[a] = 0.0;
        return;
    }
    for (Eigen::Index a = 0; a < table_.cols(); ++a) out[a] = table_(o.id, a);
}

LinearQ::LinearQ(Eigen::MatrixXd weights, bool bias, double lo, double hi) : w_(std::move(weights)), bias_(bias), lo_(lo), hi_(hi) {}

void LinearQ::values(const Obs& o, double* out) const {
    Eigen::Index d = w_.cols() - (bias_ ? 1 : 0);
    if (o.x.size() != d) throw std::invalid_argument("feature length does not match the linear Q function");
    for (Eigen::Index a = 0; a < w_.rows(); ++a) {
        double v = w_.row(a).head(d).dot(o.x);
        if (bias_) v += w_(a, d);
        out[a] = std::clamp(v, lo_, hi_);
    }
}

void MlpQ::values(const Obs& o, double* out) const {
    Eigen::VectorXd v = net_.forward_one(o.x);
    for (Eigen::Index a = 0; a < v.size(); ++a) out[a] = std::clamp(v[a], lo_, hi_);
}

QKind parse_q_kind(const std::string& s) {
    if (s == "tabular") return QKind::tabular;
    if (s == "linear") return QKind::linear;
    if (s == "mlp") return QKind::mlp;
    throw ConfigError("unknown Q class '" + s + "'");
}

std::string to_string(QKind k) {
    switch (k) {
    case QKind::tabular: return "tabular";
    case QKind::linear: return "linear";
    case QKind::mlp: return "mlp";
    }
    return "tabular";
}

namespace {

QPtr fit_tabular(const std::vector<QSample>& data, const FitShape& sh) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(sh.num_states, sh.actions);
    Eigen::MatrixXd cnt = Eigen::MatrixXd::Zero(sh.num_states, sh.actions);
    for (const auto& d : data) {
        if (d.s.id < 0 || d.s.id >= sh.num_states) throw std::out_of_range("sample state outside the table");
        sum(d.s.id, d.a) += std::clamp(d.y, sh.lo, sh.hi);
        cnt(d.s.id, d.a) += 1.0;
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(sh.num_states, sh.actions);
    for (int s = 0; s < sh.num_states; ++s)
        for (int a = 0; a < sh.actions; ++a)
            if (cnt(s, a) > 0) t(s, a) = sum(s, a) / cnt(s, a);
    return std::make_shared<TabularQ>(std::move(t));
}

QPtr fit_linear(const std::vector<QSample>& data, const QClassSpec& spec, const FitShape& sh) {
    int d = sh.dim, p = d + (spec.bias ? 1 : 0);
    std::vector<Eigen::MatrixXd> xtx(sh.actions, Eigen::MatrixXd::Zero(p, p));
    std::vector<Eigen::VectorXd> xty(sh.actions, Eigen::VectorXd::Zero(p));
    std::vector<int> n(sh.actions, 0);
    Eigen::VectorXd z(p);
    for (const auto& s : data) {
        if (s.s.x.size() != d) throw std::invalid_argument("feature length does not match the linear class");
        z.head(d) = s.s.x;
        if (spec.bias) z[d] = 1.0;
        xtx[s.a].noalias() += z * z.transpose();
        xty[s.a] += std::clamp(s.y, sh.lo, sh.hi) * z;
        ++n[s.a];
    }
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(sh.actions, p);
    for (int a = 0; a < sh.actions; ++a) {
        if (n[a] == 0) continue;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xtx[a], Eigen::EigenvaluesOnly);
        double top = std::max(es.eigenvalues().maxCoeff(), 1e-300);
        if (es.eigenvalues().minCoeff() <= 1e-12 * top) xtx[a] += 1e-6 * Eigen::MatrixXd::Identity(p, p);
        w.row(a) = xtx[a].ldlt().solve(xty[a]).transpose();
    }
    return std::make_shared<LinearQ>(std::move(w), spec.bias, sh.lo, sh.hi);
}

QPtr fit_mlp(const std::vector<QSample>& data, const QClassSpec& spec, const FitShape& sh, Rng& rng) {
    Mlp net(sh.dim, spec.hidden, sh.actions, rng);
    Adam opt(net.num_params(), spec.lr);
    Eigen::VectorXd theta = net.params();
    int n = static_cast<int>(data.size());
    int b = std::min(spec.batch, n);
    Eigen::MatrixXd X(sh.dim, b);
    for (int step = 0; step < spec.steps; ++step) {
        std::vector<int> idx(b);
        for (int j = 0; j < b; ++j) {
            idx[j] = uniform_int(rng, n);
            X.col(j) = data[idx[j]].s.x;
        }
        Eigen::MatrixXd out = net.forward(X);
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(sh.actions, b);
        for (int j = 0; j < b; ++j) {
            const QSample& s = data[idx[j]];
            G(s.a, j) = (out(s.a, j) - std::clamp(s.y, sh.lo, sh.hi)) / b;
        }
        opt.step(theta, net.gradient(X, G));
        net.set_params(theta);
    }
    return std::make_shared<MlpQ>(std::move(net), sh.lo, sh.hi);
}

} // namespace

QPtr fit_least_squares(const std::vector<QSample>& data, const QClassSpec& spec, const FitShape& shape, Rng& rng) {
    if (data.empty()) throw std::invalid_argument("least squares needs at least one sample");
    for (const auto& d : data)
        if (d.a < 0 || d.a >= shape.actions) throw std::out_of_range("sample action out of range");
    switch (spec.kind) {
    case QKind::tabular: return fit_tabular(data, shape);
    case QKind::linear: return fit_linear(data, spec, shape);
    case QKind::mlp: return fit_mlp(data, spec, shape, rng);
    }
    throw std::invalid_argument("unknown Q class");
}

QPtr select_least_squares(const std::vector<QSample>& data, const std::vector<QPtr>& members, double lo, double hi) {
    if (data.empty()) throw std::invalid_argument("least squares needs at least one sample");
    if (members.empty()) throw std::invalid_argument("empty value class");
    QPtr best;
    double best_err = std::numeric_limits<double>::infinity();
    for (const auto& f : members) {
        double err = 0.0;
        for (const auto& d : data) {
            double r = f->value(d.s, d.a) - std::clamp(d.y, lo, hi);
            err += r * r;
        }
        if (err < best_err) {
            best_err = err;
            best = f;
        }
    }
    return best;
}

int GreedyRule::action(const Obs& o) const {
    std::vector<double> v(q_->num_actions());
    q_->values(o, v.data());
    return argmax_lowest(v.data(), static_cast<int>(v.size()));
}

void GreedyRule::probs(const Obs& o, double* out) const {
    int A = q_->num_actions();
    int best = action(o);
    for (int a = 0; a < A; ++a) out[a] = a == best ? 1.0 : 0.0;
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p = logits;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        double m = p.col(j).maxCoeff();
        p.col(j) = (p.col(j).array() - m).exp();
        p.col(j) /= p.col(j).sum();
    }
    return p;
}

void SoftmaxRule::probs(const Obs& o, double* out) const {
    Eigen::MatrixXd p = softmax_columns(net_.forward(o.x));
    for (Eigen::Index a = 0; a < p.rows(); ++a) out[a] = p(a, 0);
}

void save_q(const QFunction& q, std::ostream& os) {
    auto old = os.precision(17);
    if (auto t = dynamic_cast<const TabularQ*>(&q)) {
        os << "fbrl-q 1 tabular " << t->table().rows() << ' ' << t->table().cols() << "\n";
        for (Eigen::Index s = 0; s < t->table().rows(); ++s) {
            for (Eigen::Index a = 0; a < t->table().cols(); ++a) os << (a ? " " : "") << t->table()(s, a);
            os << "\n";
        }
    } else if (auto l = dynamic_cast<const LinearQ*>(&q)) {
        const auto& w = l->weights();
        os << "fbrl-q 1 linear " << w.rows() << ' ' << w.cols() << ' ' << (l->bias() ? 1 : 0) << ' ' << l->lo() << ' ' << l->hi() << "\n";
        for (Eigen::Index a = 0; a < w.rows(); ++a) {
            for (Eigen::Index k = 0; k < w.cols(); ++k) os << (k ? " " : "") << w(a, k);
            os << "\n";
        }
    } else {
        throw std::invalid_argument("only tabular and linear Q functions are serializable");
    }
    os.precision(old);
}

QPtr load_q(std::istream& is) {
    std::string magic, kind;
    int version = 0;
    if (!(is >> magic >> version >> kind) || magic != "fbrl-q" || version != 1) throw LoadError("not a Q function file");
    long r = 0, c = 0;
    if (!(is >> r >> c) || r < 1 || c < 1) throw LoadError("bad Q function shape");
    if (kind == "tabular") {
        Eigen::MatrixXd t(r, c);
        for (long i = 0; i < r; ++i)
            for (long j = 0; j < c; ++j)
                if (!(is >> t(i, j))) throw LoadError("truncated Q table");
        return std::make_shared<TabularQ>(std::move(t));
    }
    if (kind == "linear") {
        int bias = 0;
        double lo = 0, hi = 0;
        if (!(is >> bias >> lo >> hi)) throw LoadError("bad linear Q header");
        Eigen::MatrixXd w(r, c);
        for (long i = 0; i < r; ++i)
            for (long j = 0; j < c; ++j)
                if (!(is >> w(i, j))) throw LoadError("truncated linear Q weights");
        return std::make_shared<LinearQ>(std::move(w), bias != 0, lo, hi);
    }
    throw LoadError("unknown Q function kind '" + kind + "'");
}

} // namespace fbrl
