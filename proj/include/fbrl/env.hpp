#pragma once

#include "fbrl/mdp.hpp"
#include "fbrl/policy.hpp"
#include "fbrl/rng.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>

namespace fbrl {

enum class ObsMode { latent, rich };

ObsMode parse_obs_mode(const std::string& s);
std::string to_string(ObsMode m);

/// Sylvester Hadamard matrix of order d (a power of two), entries +-1.
Eigen::MatrixXd sylvester_hadamard(int d);

/// Smallest power of two that is at least H + 4.
int observation_dim(int H);

/// Rich observations: Hadamard * (one-hot(z) | one-hot(h) | zero padding + noise).
class HadamardEncoder {
public:
    HadamardEncoder(int H, int num_latent = 3, double noise = 0.1);

    int dim() const { return dim_; }
    int horizon() const { return horizon_; }
    double noise() const { return noise_; }
    const Eigen::MatrixXd& matrix() const { return m_; }

    /// Pre-noise pattern for latent z at horizon h (1-based).
    Eigen::VectorXd pattern(int z, int h) const;
    Eigen::VectorXd encode(int z, int h, Rng& rng) const;
    /// Latent index whose slot dominates the inverse transform.
    int decode(const Eigen::VectorXd& x) const;

private:
    int horizon_, latent_, dim_;
    double noise_;
    Eigen::MatrixXd m_;
};

/// Applies a latent rule to rich observations by decoding them first; latent observations pass through.
class DecodingRule : public DecisionRule {
public:
    DecodingRule(std::shared_ptr<const HadamardEncoder> enc, std::shared_ptr<const TabularRule> inner)
        : enc_(std::move(enc)), inner_(std::move(inner)) {}
    int num_actions() const override { return inner_->num_actions(); }
    void probs(const Obs& o, double* out) const override;
    bool deterministic() const override { return inner_->deterministic(); }

private:
    std::shared_ptr<const HadamardEncoder> enc_;
    std::shared_ptr<const TabularRule> inner_;
};

/// An MDP together with how its states are observed.
struct Environment {
    std::string id;
    std::shared_ptr<const LatentMdp> mdp;
    std::shared_ptr<const HadamardEncoder> encoder;
    /// Success means a final-step reward of at least this level.
    double success_level = 1.0;

    bool rich() const { return encoder != nullptr; }
    int horizon() const { return mdp->horizon(); }
    int num_actions() const { return mdp->num_actions(); }
    /// Length of Obs::x at horizon h.
    int feature_dim(int h) const;
    Obs observe(int h, int s, Rng& rng) const;
    /// Latent id of an observation, decoding rich vectors.
    int decode(int h, const Obs& o) const;
};

} // namespace fbrl
