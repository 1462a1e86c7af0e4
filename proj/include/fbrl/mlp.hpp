#pragma once

#include "fbrl/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace fbrl {

/// Fully connected tanh network; parameters live in one flat vector.
class Mlp {
public:
    Mlp() = default;
    /// Hidden layers use tanh; the output layer is linear. `zero_output` starts the last layer at zero.
    Mlp(int in, std::vector<int> hidden, int out, Rng& rng, bool zero_output = false);

    int input_dim() const { return in_; }
    int output_dim() const { return out_; }
    int num_params() const { return static_cast<int>(theta_.size()); }
    const Eigen::VectorXd& params() const { return theta_; }
    void set_params(const Eigen::VectorXd& p);

    /// Columns of X are inputs; returns out x n.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;
    Eigen::VectorXd forward_one(const Eigen::VectorXd& x) const;

    /// Gradient of sum_j <G.col(j), f(X.col(j))> with respect to the parameters.
    Eigen::VectorXd gradient(const Eigen::MatrixXd& X, const Eigen::MatrixXd& G) const;

private:
    struct Layer {
        int in, out;
        Eigen::Index offset;
    };
    Eigen::Map<const Eigen::MatrixXd> weight(const Layer& l) const;
    Eigen::Map<const Eigen::VectorXd> bias(const Layer& l) const;

    int in_ = 0, out_ = 0;
    std::vector<Layer> layers_;
    Eigen::VectorXd theta_;
};

class Adam {
public:
    Adam() = default;
    Adam(int n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    /// Descent step on `params` along `grad`.
    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

private:
    double lr_ = 1e-3, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    Eigen::VectorXd m_, v_;
};

} // namespace fbrl
