// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

namespace osc::chem::detail {

/// Maximum cardinality matching on a general graph (Edmonds' blossom
/// algorithm). Returns mate[v] or -1. Vertices are processed in index order,
/// so the result is deterministic for a given edge list.
std::vector<int> maximum_matching(int num_vertices, const std::vector<std::pair<int, int>>& edges);

}  // namespace osc::chem::detail
