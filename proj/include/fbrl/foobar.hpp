#pragma once

#include "fbrl/backward.hpp"
#include "fbrl/dataset.hpp"
#include "fbrl/discriminators.hpp"
#include "fbrl/forward.hpp"

#include <cstdint>
#include <vector>

namespace fbrl {

struct FoobarConfig {
    ForwardConfig forward;
    /// The value class here also defines the discriminators of a finite forward phase.
    BackwardConfig backward;
};

struct FoobarRun {
    ForwardResult forward;
    BackwardResult backward;
    /// Finite mode: discriminators[h-1] is the class built at horizon h.
    std::vector<FiniteDiscriminators> discriminators;
    std::uint64_t seed = 0;
};

struct FoobarHooks {
    ForwardHook forward;
    BackwardHook backward;
};

/// Forward phase on the offline data, then PSDP-trace with the forward policy as roll-in.
/// In finite mode the forward discriminators are built from the backward value class, and a missing
/// policy class defaults to the greedy rules of its members.
FoobarRun run_foobar(const Environment& env, const StateOnlyDataset& off, const FoobarConfig& cfg, std::uint64_t seed,
                     const FoobarHooks& hooks = {});

/// Policy that follows the forward policy before h and the backward policy from h on; h = 1 is pure backward,
/// h = H+1 pure forward.
Policy mixed_policy(const FoobarRun& run, int h);

double evaluate_mixed(const FoobarRun& run, int h, const Environment& env, int episodes, std::uint64_t seed);

} // namespace fbrl
