#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace msplace {

using NodeId = std::int32_t;
using LinkId = std::int32_t;

/// Bandwidth ledger a reservation is charged against. Protected bandwidth is
/// bounded by BW(e); shared bandwidth by omega * BW(e).
enum class Pool { kProtected, kShared };

/// Raised when an allocation would push a ledger past its capacity. Placement
/// code treats it as "this branch is infeasible".
class CapacityExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PhysicalNode {
  NodeId id = 0;
  double cpu_capacity = 0.0;   // cores
  double cpu_allocated = 0.0;  // cores
  double load_threshold = 0.5;  // fraction of cpu_capacity
  double rel_low = 1.0;         // reliability while load <= threshold
  double rel_high = 1.0;        // reliability above threshold
};

struct PhysicalLink {
  NodeId u = 0;
  NodeId v = 0;
  double bw_capacity = 0.0;   // MBps
  double bw_protected = 0.0;  // MBps reserved in the protected pool
  double bw_shared = 0.0;     // MBps reserved in the shared pool
  double prop_delay_ms = 1.0;
  double failure_rate = 0.0;  // failures per time unit

  [[nodiscard]] NodeId other(NodeId n) const { return n == u ? v : u; }
};

/// Two-segment load-dependent node reliability evaluated at an explicit load.
/// The boundary load == threshold * capacity belongs to the low-load segment.
[[nodiscard]] double node_reliability_at(const PhysicalNode& node, double cpu_load);
[[nodiscard]] double node_reliability(const PhysicalNode& node);
/// Per-time-unit survival probability exp(-lambda).
[[nodiscard]] double link_reliability(const PhysicalLink& link);

/// Undirected simple graph of compute nodes and links, plus the CPU and
/// bandwidth ledgers that placements charge against.
class InfrastructureNetwork {
 public:
  explicit InfrastructureNetwork(double shared_ratio = 1.0);

  /// Appends a node; its id is overwritten with its index.
  NodeId add_node(PhysicalNode node);
  /// Appends a link. Throws std::invalid_argument on self-loops, duplicate
  /// links or unknown endpoints.
  LinkId add_link(PhysicalLink link);

  [[nodiscard]] std::size_t node_count() const { return nodes_.size(); }
  [[nodiscard]] std::size_t link_count() const { return links_.size(); }
  [[nodiscard]] const std::vector<PhysicalNode>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<PhysicalLink>& links() const { return links_; }
  [[nodiscard]] const PhysicalNode& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] const PhysicalLink& link(LinkId id) const { return links_.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] std::span<const LinkId> incident(NodeId id) const;
  [[nodiscard]] std::size_t degree(NodeId id) const { return incident(id).size(); }
  [[nodiscard]] std::optional<LinkId> find_link(NodeId a, NodeId b) const;

  [[nodiscard]] const std::vector<NodeId>& access_nodes() const { return access_nodes_; }
  void set_access_nodes(std::vector<NodeId> nodes);

  [[nodiscard]] double shared_ratio() const { return shared_ratio_; }
  void set_shared_ratio(double omega);

  [[nodiscard]] double residual_cpu(NodeId id) const;
  [[nodiscard]] double pool_capacity(LinkId id, Pool pool) const;
  [[nodiscard]] double residual_bandwidth(LinkId id, Pool pool) const;

  void allocate_cpu(NodeId id, double amount);
  void release_cpu(NodeId id, double amount);
  void allocate_bandwidth(LinkId id, double amount, Pool pool);
  void release_bandwidth(LinkId id, double amount, Pool pool);

  [[nodiscard]] double node_reliability(NodeId id) const { return msplace::node_reliability(node(id)); }
  /// Reliability node `id` would have after `extra_cpu` more cores land on it.
  [[nodiscard]] double node_reliability_after(NodeId id, double extra_cpu) const;
  [[nodiscard]] double link_reliability(LinkId id) const { return msplace::link_reliability(link(id)); }

  /// Zeroes every ledger (used when a network template is reused).
  void clear_allocations();

  /// Mutable parameter access for scenario construction; ledgers should be
  /// changed through allocate/release.
  PhysicalNode& mutable_node(NodeId id) { return nodes_.at(static_cast<std::size_t>(id)); }
  PhysicalLink& mutable_link(LinkId id) { return links_.at(static_cast<std::size_t>(id)); }

 private:
  std::vector<PhysicalNode> nodes_;
  std::vector<PhysicalLink> links_;
  std::vector<std::vector<LinkId>> adjacency_;
  std::vector<NodeId> access_nodes_;
  double shared_ratio_ = 1.0;
};

/// Sampling ranges for random topologies. Defaults follow the simulation
/// parameter table the project is calibrated against.
struct TopologyRanges {
  double cpu_min = 8.0;
  double cpu_max = 16.0;
  double load_threshold = 0.5;
  double rel_low_min = 0.9999;
  double rel_low_max = 0.99999;
  double rel_high_min = 0.999;
  double rel_high_max = 0.9999;
  double bw_min = 100.0;
  double bw_max = 1000.0;
  double delay_min_ms = 1.0;
  double delay_max_ms = 10.0;
  double link_failure_rate = 0.00001;
  double shared_ratio = 1.0;

  void validate() const;
};

/// Erdos-Renyi G(n, p) topology with per-node / per-link parameters drawn from
/// `ranges`. Deterministic for a fixed seed. Throws std::invalid_argument on a
/// zero node count or a probability outside (0, 1].
[[nodiscard]] InfrastructureNetwork generate_er_topology(int node_count, double edge_prob,
                                                         const TopologyRanges& ranges,
                                                         std::uint64_t seed);

/// The ceil(fraction * |N|) lowest-degree nodes, ties by ascending index.
[[nodiscard]] std::vector<NodeId> select_access_nodes(const InfrastructureNetwork& net,
                                                      double fraction);

}  // namespace msplace
