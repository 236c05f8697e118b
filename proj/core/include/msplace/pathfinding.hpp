#pragma once

#include <optional>
#include <vector>

#include "msplace/topology.hpp"

namespace msplace {

/// A simple path. `nodes` runs source to destination; `links[i]` joins
/// `nodes[i]` and `nodes[i + 1]`. A single-node path stands for two endpoints
/// hosted on the same machine.
struct Path {
  std::vector<NodeId> nodes;
  std::vector<LinkId> links;

  [[nodiscard]] std::size_t hops() const { return links.size(); }
  [[nodiscard]] NodeId source() const { return nodes.front(); }
  [[nodiscard]] NodeId destination() const { return nodes.back(); }
  /// Nodes strictly between the endpoints.
  [[nodiscard]] std::vector<NodeId> interior() const;
  [[nodiscard]] bool is_local() const { return links.empty(); }

  friend bool operator==(const Path&, const Path&) = default;
};

struct PathQuery {
  int max_hops = 4;
  double bw_required = 0.0;
  Pool pool = Pool::kProtected;
  /// Upper bound on the summed propagation delay of each returned path.
  std::optional<double> latency_budget_s;
};

/// Internally vertex-disjoint src->dst paths of at most `max_hops` links whose
/// every edge has at least `bw_required` residual in `pool` and whose delay fits
/// the budget. Built on Edmonds-Karp over the node-split graph; when the
/// length bound discards part of the flow decomposition, a bounded exact
/// search recovers a maximum family. Paths are ordered by (hops, delay).
/// Returns an empty list when nothing qualifies.
[[nodiscard]] std::vector<Path> find_idps(const InfrastructureNetwork& net, NodeId src, NodeId dst,
                                          const PathQuery& query);

enum class PathMetric { kHops, kLatency };

/// Single feasible path minimizing hop count or propagation delay (ties by
/// lower node ids along the way). No hop bound.
[[nodiscard]] std::optional<Path> shortest_feasible_path(const InfrastructureNetwork& net, NodeId src, NodeId dst,
                                                         double bw_required, Pool pool, PathMetric metric,
                                                         std::optional<double> latency_budget_s = std::nullopt);

[[nodiscard]] double path_delay_ms(const InfrastructureNetwork& net, const Path& path);

/// Residual capacity on every edge and the link's end-to-end latency through
/// this path within its deadline.
[[nodiscard]] bool path_feasible(const InfrastructureNetwork& net, const Path& path, double bw_required, Pool pool,
                                 double deadline_s, double data_volume, double bw_demand,
                                 double child_proc_latency_ms);

/// True when the two paths share no interior node and no link.
[[nodiscard]] bool internally_disjoint(const Path& a, const Path& b);

}  // namespace msplace
