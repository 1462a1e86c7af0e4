#include "fbrl/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fbrl {

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
    Eigen::VectorXd nx = X.rowwise().squaredNorm();
    Eigen::VectorXd ny = Y.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * X * Y.transpose()).colwise() + nx;
    d2.rowwise() += ny.transpose();
    return (-d2.array().max(0.0) / (2.0 * sigma * sigma)).exp();
}

double median_bandwidth(const Eigen::MatrixXd& pooled) {
    std::vector<double> d;
    Eigen::Index n = pooled.rows();
    d.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double v = (pooled.row(i) - pooled.row(j)).norm();
            if (v > 0.0) d.push_back(v);
        }
    if (d.empty()) return 1.0;
    std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + mid, d.end());
    double hi = d[mid];
    if (d.size() % 2 == 1) return hi;
    double lo = *std::max_element(d.begin(), d.begin() + mid);
    return 0.5 * (lo + hi);
}

namespace {

Eigen::VectorXd unit_or(const Eigen::VectorXd* w, Eigen::Index n) {
    if (!w) return Eigen::VectorXd::Ones(n);
    if (w->size() != n) throw std::invalid_argument("one weight per sample required");
    return *w;
}

} // namespace

double mmd2(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q, double sigma, const Eigen::VectorXd* weights_p) {
    if (P.rows() == 0 || Q.rows() == 0) throw std::invalid_argument("MMD needs nonempty samples");
    if (P.cols() != Q.cols()) throw std::invalid_argument("samples differ in dimension");
    Eigen::VectorXd w = unit_or(weights_p, P.rows()) / static_cast<double>(P.rows());
    Eigen::VectorXd v = Eigen::VectorXd::Constant(Q.rows(), 1.0 / Q.rows());
    double pp = w.dot(rbf_gram(P, P, sigma) * w);
    double pq = w.dot(rbf_gram(P, Q, sigma) * v);
    double qq = v.dot(rbf_gram(Q, Q, sigma) * v);
    return pp - 2.0 * pq + qq;
}

double mmd2(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q, const KernelSpec& k, const Eigen::VectorXd* weights_p) {
    double sigma = k.sigma;
    if (k.rule == BandwidthRule::median) {
        Eigen::MatrixXd pooled(P.rows() + Q.rows(), P.cols());
        pooled << P, Q;
        sigma = median_bandwidth(pooled);
    }
    return mmd2(P, Q, sigma, weights_p);
}

Eigen::VectorXd mmd_witness(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q, double sigma, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd* weights_p) {
    Eigen::VectorXd w = unit_or(weights_p, P.rows()) / static_cast<double>(P.rows());
    Eigen::VectorXd v = Eigen::VectorXd::Constant(Q.rows(), 1.0 / Q.rows());
    return rbf_gram(X, P, sigma) * w - rbf_gram(X, Q, sigma) * v;
}

} // namespace fbrl
