#pragma once

// Internal path-search helpers shared by the HWCN builder and the decoder.

#include <span>
#include <string>
#include <vector>

#include "latconf/hwcn.hpp"

namespace latconf::internal {

// Node positions of h.nodes sorted so that every arc's start precedes its
// end ((time, id) ascending; valid because arc durations are positive).
std::vector<int> hwcn_topo_positions(const Hwcn& h, const HwcnIndex& idx);

// Maximum-sum source-to-sink path over the given per-arc scores (indexed by
// arc position). Exact tie-breaking: higher score, then fewer arcs, then
// lexicographically smallest non-silence word sequence. Returns arc
// positions in path order.
std::vector<int> best_additive_path(const Hwcn& h, const HwcnIndex& idx,
                                    std::span<const double> arc_scores);

}  // namespace latconf::internal
