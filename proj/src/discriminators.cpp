#include "fbrl/discriminators.hpp"

#include "fbrl/dp.hpp"

#include <cmath>
#include <stdexcept>

namespace fbrl {

FiniteDiscriminators build_discriminators(std::shared_ptr<const std::vector<QPtr>> members, int actions) {
    if (!members || members->empty()) throw std::invalid_argument("discriminators need a nonempty finite value class");
    FiniteDiscriminators d;
    d.source = members;
    for (std::size_t k = 0; k < members->size(); ++k) {
        QPtr f = (*members)[k];
        if (f->num_actions() != actions) throw std::invalid_argument("member has the wrong action count");
        for (int ap = 0; ap < actions; ++ap) {
            d.fns.push_back([f, ap, actions](const Obs& o) {
                std::vector<double> v(actions);
                f->values(o, v.data());
                double m = v[0];
                for (double x : v) m = std::max(m, x);
                return m - v[ap];
            });
            d.origin.emplace_back(static_cast<int>(k), ap);
        }
    }
    return d;
}

FiniteDiscriminators build_discriminators(const QClass& qclass, int h, int actions) {
    if (!qclass.finite()) throw std::invalid_argument("unsupported class kind: discriminators need a finite value class");
    if (h < 1 || h > static_cast<int>(qclass.members.size())) throw std::out_of_range("value class has no horizon " + std::to_string(h));
    return build_discriminators(std::make_shared<const std::vector<QPtr>>(qclass.members[h - 1]), actions);
}

IpmResult ipm_finite(const std::vector<Obs>& p, const std::vector<double>& weights, const std::vector<Obs>& q,
                     const FiniteDiscriminators& disc) {
    if (p.empty() || q.empty()) throw std::invalid_argument("IPM needs nonempty samples");
    if (!weights.empty() && weights.size() != p.size()) throw std::invalid_argument("one weight per sample required");
    if (disc.fns.empty()) throw std::invalid_argument("empty discriminator class");
    IpmResult best;
    for (std::size_t k = 0; k < disc.fns.size(); ++k) {
        double mp = 0.0, mq = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) mp += (weights.empty() ? 1.0 : weights[i]) * disc.fns[k](p[i]);
        for (const auto& o : q) mq += disc.fns[k](o);
        double v = std::abs(mp / p.size() - mq / q.size());
        if (best.argmax < 0 || v > best.value) {
            best.value = v;
            best.argmax = static_cast<int>(k);
        }
    }
    return best;
}

} // namespace fbrl
