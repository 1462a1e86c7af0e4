#include "fbrl/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace fbrl {

Mlp::Mlp(int in, std::vector<int> hidden, int out, Rng& rng, bool zero_output) : in_(in), out_(out) {
    if (in < 1 || out < 1) throw std::invalid_argument("network dimensions must be positive");
    std::vector<int> widths{in};
    for (int w : hidden) {
        if (w < 1) throw std::invalid_argument("hidden width must be positive");
        widths.push_back(w);
    }
    widths.push_back(out);
    Eigen::Index off = 0;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        layers_.push_back({widths[i], widths[i + 1], off});
        off += static_cast<Eigen::Index>(widths[i]) * widths[i + 1] + widths[i + 1];
    }
    theta_ = Eigen::VectorXd::Zero(off);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& L = layers_[l];
        if (zero_output && l + 1 == layers_.size()) continue;
        double r = std::sqrt(6.0 / (L.in + L.out));
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(L.in) * L.out; ++k)
            theta_[L.offset + k] = r * (2.0 * uniform01(rng) - 1.0);
    }
}

void Mlp::set_params(const Eigen::VectorXd& p) {
    if (p.size() != theta_.size()) throw std::invalid_argument("parameter vector has wrong size");
    theta_ = p;
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(const Layer& l) const {
    return Eigen::Map<const Eigen::MatrixXd>(theta_.data() + l.offset, l.out, l.in);
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(const Layer& l) const {
    return Eigen::Map<const Eigen::VectorXd>(theta_.data() + l.offset + static_cast<Eigen::Index>(l.in) * l.out, l.out);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd a = X;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Eigen::MatrixXd z = weight(layers_[l]) * a;
        z.colwise() += bias(layers_[l]);
        a = (l + 1 < layers_.size()) ? Eigen::MatrixXd(z.array().tanh()) : z;
    }
    return a;
}

Eigen::VectorXd Mlp::forward_one(const Eigen::VectorXd& x) const { return forward(x); }

Eigen::VectorXd Mlp::gradient(const Eigen::MatrixXd& X, const Eigen::MatrixXd& G) const {
    std::vector<Eigen::MatrixXd> acts{X};
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Eigen::MatrixXd z = weight(layers_[l]) * acts.back();
        z.colwise() += bias(layers_[l]);
        acts.push_back((l + 1 < layers_.size()) ? Eigen::MatrixXd(z.array().tanh()) : z);
    }
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta_.size());
    Eigen::MatrixXd delta = G;
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
        const Layer& L = layers_[l];
        Eigen::Map<Eigen::MatrixXd>(grad.data() + L.offset, L.out, L.in) = delta * acts[l].transpose();
        Eigen::Map<Eigen::VectorXd>(grad.data() + L.offset + static_cast<Eigen::Index>(L.in) * L.out, L.out) = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = weight(L).transpose() * delta;
            delta = back.array() * (1.0 - acts[l].array().square());
        }
    }
    return grad;
}

Adam::Adam(int n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = b1_ * m_ + (1.0 - b1_) * grad;
    v_ = b2_ * v_ + (1.0 - b2_) * grad.cwiseProduct(grad);
    double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

} // namespace fbrl
