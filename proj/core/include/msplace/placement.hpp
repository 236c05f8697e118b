#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msplace/placement_state.hpp"
#include "msplace/relcore.hpp"
#include "msplace/topology.hpp"
#include "msplace/workload.hpp"

namespace msplace {

enum class Algorithm { kSrp, kSrpS, kDaip, kRrsp, kGrd, kGrdB };

[[nodiscard]] std::string_view algorithm_name(Algorithm a);
/// Accepts the display names ("SRP", "SRP-S", "DAIP", "RRSP", "Grd", "Grd-B"), case-insensitively.
[[nodiscard]] std::optional<Algorithm> parse_algorithm(std::string_view name);

/// How SRP ranks candidate nodes.
/// kServiceModel: service reliability of the request after the tentative
///   placement, over the microservices placed so far.
/// kLiteral: the parent-link product times r'_n (or r'_n / r_n on an
///   already critical node) without the rest of the service.
enum class ScoreMode { kServiceModel, kLiteral };

struct PlacementConfig {
  int max_hops = 4;         // k
  int backtrack_limit = 3;  // Delta
  Mechanism mechanism = Mechanism::kFullyProtected;
  ScoreMode score_mode = ScoreMode::kServiceModel;
  /// Multiply contention by the summed inactivation probabilities, exactly as
  /// the pseudocode reads, instead of 1 - summed activation probabilities.
  bool literal_sprc = false;
  int rrsp_candidates = 50;
  std::uint64_t seed = 0;
  ReliabilityOptions reliability;
};

/// A service currently holding resources in the network.
struct ActivePlacement {
  ServiceRequest request;
  PlacementState state;
};

struct PlacementOutcome {
  bool success = false;
  PlacementState state;
  double reliability = 0.0;  // service reliability at placement time
  std::string reason;        // empty on success
};

/// Dispatches to the algorithm's placement routine. SRP-S forces the shared
/// mechanism. On failure every reservation is rolled back.
[[nodiscard]] PlacementOutcome place_request(Algorithm algorithm, InfrastructureNetwork& net,
                                             const ServiceRequest& request, const PlacementConfig& config,
                                             std::span<const ActivePlacement> active = {});

[[nodiscard]] PlacementOutcome srp_place(InfrastructureNetwork& net, const ServiceRequest& request,
                                         const PlacementConfig& config, std::span<const ActivePlacement> active = {});
[[nodiscard]] PlacementOutcome srp_s_place(InfrastructureNetwork& net, const ServiceRequest& request,
                                           const PlacementConfig& config,
                                           std::span<const ActivePlacement> active = {});
[[nodiscard]] PlacementOutcome daip_place(InfrastructureNetwork& net, const ServiceRequest& request,
                                          const PlacementConfig& config);
[[nodiscard]] PlacementOutcome rrsp_place(InfrastructureNetwork& net, const ServiceRequest& request,
                                          const PlacementConfig& config);
[[nodiscard]] PlacementOutcome grd_place(InfrastructureNetwork& net, const ServiceRequest& request,
                                         const PlacementConfig& config);
[[nodiscard]] PlacementOutcome grd_b_place(InfrastructureNetwork& net, const ServiceRequest& request,
                                           const PlacementConfig& config);

/// Empty state for `request`: the access microservice pinned to its access
/// node, nothing else placed.
[[nodiscard]] PlacementState initial_state(const ServiceRequest& request, Mechanism mechanism);

/// Places one more instance of m (the primary when m has none) on the best
/// candidate node. All parents of m must be placed. Returns false when no
/// candidate admits the instance; the network is then unchanged.
bool place_one_microservice(InfrastructureNetwork& net, const ServiceRequest& request, int m, PlacementState& state,
                            const PlacementConfig& config, bool use_sprc = false,
                            std::span<const ActivePlacement> active = {});

/// Adds up to backup_limit backups, each time to the microservice with the
/// lowest recorded reliability.
void backup_placement(InfrastructureNetwork& net, const ServiceRequest& request, PlacementState& state,
                      const PlacementConfig& config, bool use_sprc = false,
                      std::span<const ActivePlacement> active = {});

/// Pool used by an instance link under `mechanism`.
[[nodiscard]] Pool route_pool(Mechanism mechanism, int child_instance, int parent_instance);

/// Per-path contention multipliers for a new shared-pool link of bandwidth
/// `bw_demand`. Contenders are the backup instances (of any active service
/// and of `own`) whose shared links cross an edge of the path where
/// protected capacity could not carry both links at once.
[[nodiscard]] std::vector<double> sprc_path_factors(const InfrastructureNetwork& net, std::span<const Path> paths,
                                                    double bw_demand, const ServiceRequest& own_request,
                                                    const PlacementState& own_state,
                                                    std::span<const ActivePlacement> active, bool literal = false);

/// Total reliability of `paths` after the contention correction.
[[nodiscard]] double sprc_path_reliability(const InfrastructureNetwork& net, std::span<const Path> paths,
                                           double bw_demand, const ServiceRequest& own_request,
                                           const PlacementState& own_state, std::span<const ActivePlacement> active,
                                           const CriticalNodeSet& critical, bool literal = false);

/// Returns every CPU and bandwidth reservation held by `state`.
void release_placement(InfrastructureNetwork& net, const ServiceRequest& request, const PlacementState& state);

/// Human-readable descriptions of every broken placement constraint: node and
/// link capacities, one node per instance, complete routes with valid paths,
/// link deadlines, the backup budget, and pool usage per mechanism.
[[nodiscard]] std::vector<std::string> audit_placement(const InfrastructureNetwork& net,
                                                       const ServiceRequest& request, const PlacementState& state);

/// True when the network ledgers equal the sum of reservations of `active`.
[[nodiscard]] bool ledger_consistent(const InfrastructureNetwork& net, std::span<const ActivePlacement> active,
                                     std::string* detail = nullptr, double tol = 1e-6);

}  // namespace msplace
