#include "fbrl/env.hpp"

#include "fbrl/errors.hpp"

namespace fbrl {

ObsMode parse_obs_mode(const std::string& s) {
    if (s == "latent") return ObsMode::latent;
    if (s == "rich") return ObsMode::rich;
    throw ConfigError("unknown observation mode '" + s + "'");
}

std::string to_string(ObsMode m) { return m == ObsMode::latent ? "latent" : "rich"; }

Eigen::MatrixXd sylvester_hadamard(int d) {
    if (d < 1 || (d & (d - 1)) != 0) throw std::invalid_argument("Hadamard order must be a power of two");
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = 1.0;
    while (m.rows() < d) {
        Eigen::Index n = m.rows();
        Eigen::MatrixXd next(2 * n, 2 * n);
        next << m, m, m, -m;
        m = std::move(next);
    }
    return m;
}

int observation_dim(int H) {
    int d = 1;
    while (d < H + 4) d *= 2;
    return d;
}

HadamardEncoder::HadamardEncoder(int H, int num_latent, double noise)
    : horizon_(H), latent_(num_latent), dim_(observation_dim(H)), noise_(noise), m_(sylvester_hadamard(dim_)) {
    if (latent_ + H + 1 > dim_) throw std::invalid_argument("too many latent states for the padded dimension");
}

Eigen::VectorXd HadamardEncoder::pattern(int z, int h) const {
    if (z < 0 || z >= latent_ || h < 0 || h > horizon_) throw std::out_of_range("cannot encode latent state");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
    v[z] = 1.0;
    v[latent_ + h] = 1.0;
    return v;
}

Eigen::VectorXd HadamardEncoder::encode(int z, int h, Rng& rng) const {
    Eigen::VectorXd v = pattern(z, h);
    if (noise_ > 0.0)
        for (int i = 0; i < dim_; ++i) v[i] += noise_ * standard_normal(rng);
    return m_ * v;
}

int HadamardEncoder::decode(const Eigen::VectorXd& x) const {
    Eigen::VectorXd v = m_.transpose() * x / static_cast<double>(dim_);
    int best = 0;
    for (int z = 1; z < latent_; ++z)
        if (v[z] > v[best]) best = z;
    return best;
}

void DecodingRule::probs(const Obs& o, double* out) const {
    if (o.id >= 0 || !enc_) return inner_->probs(o, out);
    inner_->probs(latent_obs(enc_->decode(o.x), inner_->num_states()), out);
}

int Environment::feature_dim(int h) const { return rich() ? encoder->dim() : mdp->num_states(h); }

Obs Environment::observe(int h, int s, Rng& rng) const {
    if (!rich()) return latent_obs(s, mdp->num_states(h));
    Obs o;
    o.x = encoder->encode(s, h, rng);
    return o;
}

int Environment::decode(int h, const Obs& o) const {
    if (o.id >= 0) return o.id;
    if (!rich()) throw std::invalid_argument("latent observation without an id");
    (void)h;
    return encoder->decode(o.x);
}

} // namespace fbrl
