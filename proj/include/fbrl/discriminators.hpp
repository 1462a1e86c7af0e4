#pragma once

#include "fbrl/policy.hpp"
#include "fbrl/qfunc.hpp"

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace fbrl {

/// Test function on observations.
using TestFn = std::function<double(const Obs&)>;

/// Finite discriminator class.
struct FiniteDiscriminators {
    std::vector<TestFn> fns;
    /// (member index, a') behind each test function; empty for hand-built classes.
    std::vector<std::pair<int, int>> origin;
    /// Value functions the class was derived from.
    std::shared_ptr<const std::vector<QPtr>> source;

    std::size_t size() const { return fns.size(); }
};

/// g(s) = max_a f(s,a) - f(s,a') for every member f and action a'.
FiniteDiscriminators build_discriminators(std::shared_ptr<const std::vector<QPtr>> members, int actions);

/// Same, for horizon h of a finite class; throws for non-finite classes.
FiniteDiscriminators build_discriminators(const QClass& qclass, int h, int actions);

struct IpmResult {
    double value = 0.0;
    int argmax = -1;
};

/// max_g |(1/n) sum_i w_i g(p_i) - (1/m) sum_j g(q_j)|; empty weights mean all ones; ties keep the lowest index.
IpmResult ipm_finite(const std::vector<Obs>& p, const std::vector<double>& weights, const std::vector<Obs>& q,
                     const FiniteDiscriminators& disc);

} // namespace fbrl
