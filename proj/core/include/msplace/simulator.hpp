#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <tuple>
#include <vector>

#include "msplace/placement.hpp"
#include "msplace/topology.hpp"
#include "msplace/workload.hpp"

namespace msplace {

enum class FailurePolicy {
  kRemove,            // first loss of liveness counts once and frees the service
  kCountAndContinue,  // every dead step counts; the service stays until expiry
};

struct SimConfig {
  int node_count = 50;
  double edge_prob = 0.2;
  double access_fraction = 0.2;
  TopologyRanges topology;  // topology.shared_ratio is omega

  int request_count = 100;
  double arrival_rate = 1.0;
  WorkloadRanges workload;

  Algorithm algorithm = Algorithm::kSrp;
  Mechanism mechanism = Mechanism::kFullyProtected;
  PlacementConfig placement;

  int repetitions = 100;
  std::uint64_t seed = 1;
  FailurePolicy failure_policy = FailurePolicy::kRemove;
  /// Number of simulated steps; 0 picks one that outlives every request.
  int horizon = 0;
  /// Worker threads for run_batch; 0 uses the hardware concurrency.
  int threads = 0;

  /// Throws std::invalid_argument on a bad configuration.
  void validate() const;
};

/// One step's independent component failures. Instances are keyed by
/// (request id, microservice, instance); instance links by
/// (request id, link, child instance, parent instance).
struct ComponentFailureSample {
  std::vector<char> failed_nodes;
  std::vector<char> failed_links;
  std::set<std::tuple<int, int, int>> failed_instances;
  std::set<std::tuple<int, int, int, int>> failed_instance_links;

  [[nodiscard]] bool node_failed(NodeId n) const { return failed_nodes[static_cast<std::size_t>(n)] != 0; }
  [[nodiscard]] bool link_failed(LinkId e) const { return failed_links[static_cast<std::size_t>(e)] != 0; }
};

/// Reliability bands of the placement-time histogram:
/// [0, 0.99), [0.99, 0.999), [0.999, 0.9999), [0.9999, 1].
inline constexpr std::array<double, 3> kHistogramEdges{0.99, 0.999, 0.9999};
[[nodiscard]] int histogram_bucket(double reliability);

struct SimResult {
  std::vector<double> cumulative_failures;  // per step
  std::vector<double> bandwidth;            // mean protected reservation per edge, per step
  std::array<double, 4> histogram{};
  double placements_succeeded = 0.0;
  double placements_rejected = 0.0;
  /// Placement-time service reliability of every accepted request (single run).
  std::vector<double> request_reliability;
  int repetitions = 1;
  /// Per-repetition totals (batch runs).
  std::vector<double> repetition_failures;
  std::vector<double> repetition_bandwidth;
  std::vector<double> repetition_succeeded;

  [[nodiscard]] double total_failures() const {
    return cumulative_failures.empty() ? 0.0 : cumulative_failures.back();
  }
  /// Time average of the bandwidth series.
  [[nodiscard]] double mean_bandwidth() const;
};

/// Uniform draw in [0, 1) determined by the key; a counter-based generator so
/// that paired runs see the same randomness for the same component and step.
[[nodiscard]] double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                                   std::uint64_t d = 0, std::uint64_t e = 0);

/// Draws this step's failures: nodes against their current load, physical
/// links, every active instance and every routed instance link.
[[nodiscard]] ComponentFailureSample sample_failures(std::span<const ActivePlacement> active,
                                                     const InfrastructureNetwork& net, std::uint64_t step_seed);

/// Whether the service still has an operational instance of every
/// microservice. Under the shared mechanism a shared-pool link that is needed
/// claims protected bandwidth in `claims` (per link, reset each step by the
/// caller) and fails when the link's capacity would be exceeded.
[[nodiscard]] bool evaluate_service_alive(const ServiceRequest& request, const PlacementState& state,
                                          const ComponentFailureSample& sample, const InfrastructureNetwork& net,
                                          std::vector<double>* claims = nullptr);

/// Mean over links of the protected-pool reservation.
[[nodiscard]] double record_bandwidth(const InfrastructureNetwork& net);

/// One repetition with `cfg.seed` as its seed.
[[nodiscard]] SimResult run_simulation(const SimConfig& cfg);

/// Seed of repetition `rep` derived from a base seed.
[[nodiscard]] std::uint64_t repetition_seed(std::uint64_t base, int rep);

/// cfg.repetitions runs with derived seeds, averaged step by step.
[[nodiscard]] SimResult run_batch(const SimConfig& cfg);

}  // namespace msplace
