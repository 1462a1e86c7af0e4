#pragma once

#include "fbrl/dataset.hpp"
#include "fbrl/envs.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fbrl {

struct SeparationReport {
    long episodes = 0;
    /// Best TV between the collected last-horizon distribution and the offline one (1 when nothing was collected).
    double tv = 1.0;
    long queries = 0;
    bool success = false;
    /// Reset solver: actions of the recovered path.
    std::vector<int> actions;
    /// On failure: first horizon whose offline states miss the optimal path, else where the chains broke.
    int diagnostic_h = -1;
};

enum class SearchStrategy { random, breadth };

SearchStrategy parse_search_strategy(const std::string& s);
std::string to_string(SearchStrategy s);

/// Trace-only collection: `budget` episodes, each reaching one leaf; the TV is minimized over prefixes of the
/// collection. Breadth visits leaves in lexicographic order of their action sequences.
SeparationReport trace_search_demo(const HardnessTree& tree, long budget, SearchStrategy strategy, std::uint64_t seed);

/// Reset-model solver: query every action at each distinct offline state below the last horizon, keep the chains of
/// offline states linked by observed transitions and, if several reach the last horizon, ask for their rewards.
SeparationReport reset_solver_demo(const HardnessTree& tree, const StateOnlyDataset& dataset, std::uint64_t seed = 0);

} // namespace fbrl
