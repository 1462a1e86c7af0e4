#pragma once

#include <Eigen/Dense>

namespace fbrl {

enum class BandwidthRule { fixed, median };

struct KernelSpec {
    BandwidthRule rule = BandwidthRule::median;
    double sigma = 1.0;
};

/// k(x,y) = exp(-|x-y|^2 / (2 sigma^2)) between rows of X and rows of Y.
Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double sigma);

/// Median of the nonzero pairwise distances between rows; 1 when all rows coincide.
double median_bandwidth(const Eigen::MatrixXd& pooled);

/// Squared MMD, V-statistic: |(1/n) sum_i w_i phi(p_i) - (1/m) sum_j phi(q_j)|^2.
/// Rows are samples; a null weight vector means unit weights.
double mmd2(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q, double sigma, const Eigen::VectorXd* weights_p = nullptr);

/// Resolves the bandwidth from the pooled samples when the rule is median.
double mmd2(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q, const KernelSpec& k, const Eigen::VectorXd* weights_p = nullptr);

/// Witness of the weighted P sample against Q evaluated at the rows of X (unnormalized).
Eigen::VectorXd mmd_witness(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q, double sigma, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd* weights_p = nullptr);

} // namespace fbrl
