#pragma once

#include <set>
#include <vector>

#include "msplace/pathfinding.hpp"
#include "msplace/topology.hpp"

namespace msplace {

enum class Mechanism { kFullyProtected, kShared };

/// One placed copy of a microservice. Instance 0 of a microservice is its
/// primary; higher indexes are backups.
struct InstanceRecord {
  NodeId node = 0;
  /// Reliability of this instance together with its parent links, as
  /// evaluated when it was placed.
  double instance_sigma = 1.0;
  /// Reliability of the whole microservice (all instances so far) as
  /// evaluated when this instance was placed.
  double microservice_sigma = 1.0;
};

/// Routing of one instance-to-instance dependency.
struct InstanceLinkRoute {
  int link = 0;             // index into ServiceRequest::links
  int child_instance = 0;   // instance index of the link's child microservice
  int parent_instance = 0;  // instance index of the link's parent microservice
  std::vector<Path> paths;  // a single local path when both ends share a node
  Pool pool = Pool::kProtected;
  double bw_reserved = 0.0;  // per edge, on every path
  /// Optional per-path multipliers from contention-aware evaluation; used
  /// only while scoring candidates.
  std::vector<double> contention_factor;

  [[nodiscard]] bool is_primary() const { return child_instance == 0 && parent_instance == 0; }
};

/// Placement of one request: instance -> node and instance link -> paths.
struct PlacementState {
  Mechanism mechanism = Mechanism::kFullyProtected;
  /// instances[m][b]; instances[0] holds the access microservice.
  std::vector<std::vector<InstanceRecord>> instances;
  std::vector<InstanceLinkRoute> routes;
  std::vector<std::set<NodeId>> blacklist;
  int backtrack_count = 0;

  [[nodiscard]] bool is_placed(int m) const {
    return static_cast<std::size_t>(m) < instances.size() && !instances[static_cast<std::size_t>(m)].empty();
  }
  [[nodiscard]] int instance_count(int m) const {
    return static_cast<std::size_t>(m) < instances.size()
               ? static_cast<int>(instances[static_cast<std::size_t>(m)].size())
               : 0;
  }
  [[nodiscard]] int total_instances() const;
  [[nodiscard]] const InstanceLinkRoute* find_route(int link, int child_instance, int parent_instance) const;
};

}  // namespace msplace
