#pragma once

#include <vector>

#include "msplace/pathfinding.hpp"
#include "msplace/relcore.hpp"
#include "msplace/topology.hpp"

namespace msplace::validation {

/// Every simple path from src to dst with exactly `hops` links, by DFS.
[[nodiscard]] std::vector<Path> enumerate_simple_paths(const InfrastructureNetwork& net, NodeId src, NodeId dst,
                                                       int hops);

/// Path family the accumulated matrix is expected to hold for (src, dst):
/// lengths are visited in increasing order and a whole length class joins the
/// family only when each of its paths shares no interior node or link with
/// any path already in it.
[[nodiscard]] std::vector<Path> greedy_path_family(const InfrastructureNetwork& net, NodeId src, NodeId dst, int k);

/// Network-aware reliability by enumeration: 1 - prod (1 - r_p) over the
/// greedy family, each r_p multiplying interior non-critical node
/// reliabilities and link reliabilities. 1 on the diagonal.
[[nodiscard]] double brute_force_reliability(const InfrastructureNetwork& net, NodeId src, NodeId dst, int k,
                                             const CriticalNodeSet* critical = nullptr);

/// Size of the largest family of pairwise internally disjoint src->dst paths
/// with at most `k` links, each edge holding at least `bw` residual in `pool`.
/// Exhaustive search over all qualifying simple paths.
[[nodiscard]] int max_disjoint_path_count(const InfrastructureNetwork& net, NodeId src, NodeId dst, int k,
                                          double bw = 0.0, Pool pool = Pool::kProtected);

}  // namespace msplace::validation
