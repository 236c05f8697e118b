#pragma once

#include <optional>
#include <set>
#include <vector>

#include "msplace/pathfinding.hpp"
#include "msplace/placement_state.hpp"
#include "msplace/topology.hpp"
#include "msplace/workload.hpp"

namespace msplace {

/// A path together with the reliability currently attributed to it.
struct RelPath {
  Path path;
  double reliability = 0.0;
};

/// A reliability that remembers which paths produced it. With an empty path
/// family it is a plain probability; otherwise `value` equals
/// 1 - prod(1 - r_p) over `paths`.
struct RelValue {
  double value = 0.0;
  /// 1 - value, carried separately so that chains of (+) and (-) close to 1
  /// keep full precision.
  double unreliability = 1.0;
  std::vector<RelPath> paths;

  [[nodiscard]] static RelValue scalar(double v);
  [[nodiscard]] static RelValue single(Path path, double reliability);
  [[nodiscard]] static RelValue family(std::vector<RelPath> paths);

  [[nodiscard]] bool has_provenance() const { return !paths.empty(); }
  /// |value - (1 - prod(1 - r_p))| <= tol, trivially true without provenance.
  [[nodiscard]] bool consistent(double tol = 1e-12) const;
};

/// 1 - prod(1 - r) over the given path reliabilities.
[[nodiscard]] double total_path_reliability(std::span<const double> path_reliabilities);

[[nodiscard]] double op_plus(double x, double y);
/// (x - y) / (1 - y); throws std::domain_error unless 0 <= y < x <= 1 or y == 0.
[[nodiscard]] double op_minus(double x, double y);

/// Union of families; x + y - xy for distinct paths. Identical paths are kept once.
[[nodiscard]] RelValue op_plus(const RelValue& x, const RelValue& y);
[[nodiscard]] RelValue op_minus(const RelValue& x, double y);
/// Zero when any path of x shares a node or link with any path of y
/// (destinations excluded); otherwise the pairwise concatenation with
/// multiplied reliabilities.
[[nodiscard]] RelValue op_times(const RelValue& x, const RelValue& y);
[[nodiscard]] bool provenance_overlap(const RelValue& x, const RelValue& y);

/// Square matrix of RelValue entries indexed by node.
class PathRelMatrix {
 public:
  PathRelMatrix() = default;
  explicit PathRelMatrix(std::size_t order);

  [[nodiscard]] std::size_t order() const { return order_; }
  [[nodiscard]] const RelValue& at(std::size_t i, std::size_t j) const { return entries_[i * order_ + j]; }
  RelValue& at(std::size_t i, std::size_t j) { return entries_[i * order_ + j]; }
  [[nodiscard]] double value(std::size_t i, std::size_t j) const { return at(i, j).value; }

 private:
  std::size_t order_ = 0;
  std::vector<RelValue> entries_;
};

/// One-step matrix: entry (i, j) is r_{n_i} * r_{e_ij} with the one-link path.
[[nodiscard]] PathRelMatrix one_step_matrix(const InfrastructureNetwork& net);
/// Path-aware product; non-simple concatenations are discarded.
[[nodiscard]] PathRelMatrix mat_mul(const PathRelMatrix& a, const PathRelMatrix& b);
/// Entry-wise: keep a_ij when its paths intersect those of b_ij, else a_ij (+) b_ij.
[[nodiscard]] PathRelMatrix mat_add(const PathRelMatrix& a, const PathRelMatrix& b);
/// R^(1) v R^(2) v ... v R^(k) before source stripping.
[[nodiscard]] PathRelMatrix accumulated_path_matrix(const InfrastructureNetwork& net, int k);

using CriticalNodeSet = std::set<NodeId>;

/// Reliability of one path with both endpoints removed and critical nodes
/// skipped: prod r_n over the remaining interior nodes times prod r_e.
[[nodiscard]] double stripped_path_reliability(const InfrastructureNetwork& net, const Path& path,
                                               const CriticalNodeSet* critical = nullptr);

/// Network-aware reliability matrix: unit diagonal, off-diagonal entries the
/// total reliability of the accumulated family with sources stripped
/// (and critical nodes skipped when a set is supplied).
[[nodiscard]] PathRelMatrix network_reliability_matrix(const InfrastructureNetwork& net, int k,
                                                       const CriticalNodeSet* critical = nullptr);

/// Nodes hosting every instance of some microservice (the access
/// microservice included, so the access node is always critical).
[[nodiscard]] CriticalNodeSet critical_nodes(const ServiceRequest& request, const PlacementState& state);

[[nodiscard]] double effective_link_probability(double link_software_rel, double end_to_end_rel);

/// How instances on distinct non-critical nodes combine into a microservice
/// reliability. kLiteral: 1 - prod r_n (1 - sigma_{m,n}) * prod_crit (1 - sigma_{m,n}).
/// kNodeSurvival: 1 - prod (1 - r_n sigma_{m,n}) * prod_crit (1 - sigma_{m,n}).
enum class CrossNodeForm { kLiteral, kNodeSurvival };

struct ReliabilityOptions {
  CrossNodeForm cross_node = CrossNodeForm::kLiteral;
  /// Relative perturbation applied to every instance reliability; a
  /// sensitivity hook for the validation suites. 0 in normal use.
  double instance_perturbation = 0.0;
  /// Multiply path reliabilities by the contention factors stored on routes.
  bool apply_contention = false;
};

/// Total reliability of a routed instance link (local routes are 1).
[[nodiscard]] double route_reliability(const InfrastructureNetwork& net, const InstanceLinkRoute& route,
                                       const CriticalNodeSet& critical, const ReliabilityOptions& options = {});

/// Reliability of instance b of microservice m with all of its parent links.
/// Throws std::logic_error when a parent microservice is unplaced.
[[nodiscard]] double instance_reliability(const InfrastructureNetwork& net, const ServiceRequest& request,
                                          const PlacementState& state, int m, int b, const CriticalNodeSet& critical,
                                          const ReliabilityOptions& options = {});

/// Reliability of all instances of m across nodes. 1 for the access
/// microservice.
[[nodiscard]] double microservice_reliability(const InfrastructureNetwork& net, const ServiceRequest& request,
                                              const PlacementState& state, int m, const CriticalNodeSet& critical,
                                              const ReliabilityOptions& options = {});

/// Service reliability of a complete placement. Throws std::logic_error when a
/// microservice has no instance.
[[nodiscard]] double service_reliability(const InfrastructureNetwork& net, const ServiceRequest& request,
                                         const PlacementState& state, const ReliabilityOptions& options = {});

/// Same product restricted to the microservices placed so far.
[[nodiscard]] double partial_service_reliability(const InfrastructureNetwork& net, const ServiceRequest& request,
                                                 const PlacementState& state,
                                                 const ReliabilityOptions& options = {});

}  // namespace msplace
