#pragma once

#include "fbrl/mlp.hpp"
#include "fbrl/policy.hpp"
#include "fbrl/rng.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace fbrl {

/// Q_h(s, .) for one horizon.
class QFunction {
public:
    virtual ~QFunction() = default;
    virtual int num_actions() const = 0;
    virtual void values(const Obs& o, double* out) const = 0;
    double value(const Obs& o, int a) const;
};

using QPtr = std::shared_ptr<const QFunction>;

/// Indexed by latent id; unseen states read as zero.
class TabularQ : public QFunction {
public:
    explicit TabularQ(Eigen::MatrixXd table) : table_(std::move(table)) {}
    int num_actions() const override { return static_cast<int>(table_.cols()); }
    void values(const Obs& o, double* out) const override;
    const Eigen::MatrixXd& table() const { return table_; }

private:
    Eigen::MatrixXd table_;
};

/// One weight vector per action over the feature vector (plus an optional bias).
class LinearQ : public QFunction {
public:
    LinearQ(Eigen::MatrixXd weights, bool bias, double lo, double hi);
    int num_actions() const override { return static_cast<int>(w_.rows()); }
    void values(const Obs& o, double* out) const override;
    const Eigen::MatrixXd& weights() const { return w_; }
    bool bias() const { return bias_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    Eigen::MatrixXd w_;
    bool bias_;
    double lo_, hi_;
};

class MlpQ : public QFunction {
public:
    MlpQ(Mlp net, double lo, double hi) : net_(std::move(net)), lo_(lo), hi_(hi) {}
    int num_actions() const override { return net_.output_dim(); }
    void values(const Obs& o, double* out) const override;
    const Mlp& net() const { return net_; }

private:
    Mlp net_;
    double lo_, hi_;
};

enum class QKind { tabular, linear, mlp };

QKind parse_q_kind(const std::string& s);
std::string to_string(QKind k);

/// Regressor family and its training settings.
struct QClassSpec {
    QKind kind = QKind::tabular;
    bool bias = true;
    std::vector<int> hidden = {128, 128};
    double lr = 1e-3;
    int batch = 128;
    int steps = 1500;
};

/// A regressor family, optionally given as an explicit finite list of members per horizon.
struct QClass {
    QClassSpec spec;
    /// members[h-1] lists F_h; empty unless the class is finite.
    std::vector<std::vector<QPtr>> members;
    bool finite() const { return !members.empty(); }
};

struct QSample {
    Obs s;
    int a = 0;
    double y = 0.0;
};

/// Shape information for a fit at one horizon.
struct FitShape {
    int num_states = 0;
    int dim = 0;
    int actions = 0;
    double lo = 0.0, hi = 0.0;
};

/// Least-squares fit over the class; targets are clamped to [lo, hi].
QPtr fit_least_squares(const std::vector<QSample>& data, const QClassSpec& spec, const FitShape& shape, Rng& rng);

/// Member of a finite list with the smallest squared error; lowest index on ties.
QPtr select_least_squares(const std::vector<QSample>& data, const std::vector<QPtr>& members, double lo, double hi);

/// Greedy rule over a Q function; lowest action index wins ties.
class GreedyRule : public DecisionRule {
public:
    explicit GreedyRule(QPtr q) : q_(std::move(q)) {}
    int num_actions() const override { return q_->num_actions(); }
    void probs(const Obs& o, double* out) const override;
    bool deterministic() const override { return true; }
    int action(const Obs& o) const;
    const QPtr& q() const { return q_; }

private:
    QPtr q_;
};

/// Softmax over the outputs of a network applied to the features.
class SoftmaxRule : public DecisionRule {
public:
    explicit SoftmaxRule(Mlp net) : net_(std::move(net)) {}
    int num_actions() const override { return net_.output_dim(); }
    void probs(const Obs& o, double* out) const override;
    const Mlp& net() const { return net_; }

private:
    Mlp net_;
};

/// Row-wise softmax of logits (columns are samples).
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits);

/// Text form of tabular and linear members:
///   fbrl-q 1 tabular S A then S*A values
///   fbrl-q 1 linear A P bias lo hi then A*P weights
void save_q(const QFunction& q, std::ostream& os);
QPtr load_q(std::istream& is);

} // namespace fbrl
