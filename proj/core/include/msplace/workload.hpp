#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "msplace/topology.hpp"

namespace msplace {

struct Path;

/// A microservice of a request. Index 0 of every request is the virtual
/// access microservice, which consumes no CPU.
struct Microservice {
  int id = 0;
  double cpu_demand = 0.0;       // cores
  double proc_latency_ms = 0.0;  // processing latency
  double failure_rate = 0.0;     // software failures per time unit
};

/// Directed dependency parent -> child.
struct MicroserviceLink {
  int parent = 0;
  int child = 0;
  double bw_demand = 0.0;    // MBps
  double data_volume = 0.0;  // MB
  double deadline_s = 0.0;
  double failure_rate = 0.0;  // software failures per time unit
};

enum class BackupMode { kFull, kRandom };

struct ServiceRequest {
  int id = 0;
  std::vector<Microservice> microservices;  // [0] is the access microservice
  std::vector<MicroserviceLink> links;
  int backup_limit = 0;
  int lifetime = 1;
  double arrival_time = 0.0;
  NodeId access_node = 0;

  /// Number of real microservices (excluding the access microservice).
  [[nodiscard]] int size() const { return static_cast<int>(microservices.size()) - 1; }
  /// Indexes into `links` of the links whose child is `m`.
  [[nodiscard]] std::vector<int> parent_links(int m) const;
  /// Indexes into `links` of the links whose parent is `m`.
  [[nodiscard]] std::vector<int> child_links(int m) const;
  [[nodiscard]] std::vector<int> parents(int m) const;
  [[nodiscard]] std::vector<int> children(int m) const;
  /// Real microservices in breadth-first order from m_1.
  [[nodiscard]] std::vector<int> bfs_order() const;
  /// Throws std::invalid_argument when the request breaks a structural rule
  /// (cycles, m_0 not the sole parent of m_1, unreachable microservices,
  /// backup limit out of range, non-positive lifetime).
  void validate() const;
};

struct WorkloadRanges {
  int ms_count_min = 1;
  int ms_count_max = 5;
  double cpu_min = 0.1;
  double cpu_max = 1.0;
  double data_min_mb = 0.1;
  double data_max_mb = 5.0;
  double proc_min_ms = 10.0;
  double proc_max_ms = 50.0;
  double bw_min = 0.1;
  double bw_max = 10.0;
  double deadline_min_s = 0.03;
  double deadline_max_s = 50.15;
  int lifetime_min = 1;
  int lifetime_max = 100;
  double ms_failure_rate = 0.00001;
  double link_failure_rate = 0.00001;
  double cpu_multiplier = 1.0;
  double bw_multiplier = 1.0;
  /// Probability of an extra parent edge from an earlier microservice. 0 keeps
  /// the dependency graph a tree.
  double cross_edge_prob = 0.0;
  BackupMode backup_mode = BackupMode::kFull;

  void validate() const;
};

[[nodiscard]] ServiceRequest generate_request(const WorkloadRanges& ranges, std::span<const NodeId> access_nodes,
                                              std::mt19937_64& rng, int id = 0);
[[nodiscard]] ServiceRequest generate_request(const WorkloadRanges& ranges, std::span<const NodeId> access_nodes,
                                              std::uint64_t seed, int id = 0);

/// Cumulative arrival times of a Poisson process with the given rate.
[[nodiscard]] std::vector<double> generate_arrivals(int count, double rate, std::uint64_t seed);

/// Link latency in seconds: transfer time + shortest placed path + child
/// processing. Throws std::invalid_argument on an empty path set.
[[nodiscard]] double link_latency(const InfrastructureNetwork& net, const MicroserviceLink& link,
                                  std::span<const Path> placed_paths, double child_proc_latency_ms);
/// Same, with the path propagation delays already summed (milliseconds).
[[nodiscard]] double link_latency_s(const MicroserviceLink& link, std::span<const double> path_delays_ms,
                                    double child_proc_latency_ms);

/// Poisson software survival probability exp(-rate * horizon).
[[nodiscard]] double software_reliability(double failure_rate, double horizon = 1.0);

}  // namespace msplace
