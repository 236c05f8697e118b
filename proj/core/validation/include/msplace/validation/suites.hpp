#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msplace/placement.hpp"
#include "msplace/relcore.hpp"
#include "msplace/topology.hpp"
#include "msplace/workload.hpp"

namespace msplace::validation {

struct OperatorReport {
  int triples = 0;
  double max_commutativity_error = 0.0;
  double max_associativity_error = 0.0;
  double max_inverse_error = 0.0;
  int overlap_cases = 0;
  int overlap_nonzero = 0;  // overlapping products that did not return exactly 0

  [[nodiscard]] bool passed(double tol = 1e-12) const;
};

/// Random (a, b, c) in [0, 1) checked through the RelValue operators, plus
/// one product of overlapping single-path values per triple.
[[nodiscard]] OperatorReport run_operator_suite(int triples, std::uint64_t seed);

struct MatrixOracleReport {
  int graphs = 0;
  int entries = 0;
  double max_error = 0.0;
  int inconsistent_values = 0;  // matrix entries whose value disagrees with their paths

  [[nodiscard]] bool passed(double tol = 1e-12) const;
};

/// Random graphs of 2..max_nodes nodes with random reliabilities and k in
/// 1..max_k; each compares the matrix pipeline to the enumeration oracle,
/// with and without a random critical set.
[[nodiscard]] MatrixOracleReport run_matrix_oracle_suite(int graphs, int max_nodes, int max_k, std::uint64_t seed);

/// A placement frozen for model validation.
struct FixedPlacement {
  InfrastructureNetwork net;
  ServiceRequest request;
  PlacementState state;
};

/// Small SRP placements: at most `max_nodes` nodes, `max_ms` microservices
/// and one backup per microservice. Component failure rates are raised by
/// `stress` (reliabilities r become 1 - stress * (1 - r)) so that 10^5
/// samples resolve the model.
[[nodiscard]] std::vector<FixedPlacement> small_placements(int count, int max_nodes, int max_ms, double stress,
                                                           std::uint64_t seed);

struct MonteCarloCase {
  double analytic = 0.0;
  double empirical = 0.0;
  double sigma = 0.0;  // binomial standard deviation at the analytic value
  [[nodiscard]] double z() const;
  [[nodiscard]] bool within(double k_sigma = 3.0) const;
};

struct MonteCarloReport {
  std::vector<MonteCarloCase> cases;
  [[nodiscard]] int agreeing(double k_sigma = 3.0) const;
  [[nodiscard]] double max_abs_z() const;
};

/// Per-step survival frequency of each placement against service_reliability.
/// `options` reaches the analytic side only (the perturbation hook).
[[nodiscard]] MonteCarloReport run_monte_carlo_suite(const std::vector<FixedPlacement>& placements, int samples,
                                                     std::uint64_t seed, const ReliabilityOptions& options = {});

struct AuditReport {
  int placements = 0;
  int accepted = 0;
  int violations = 0;
  int ledger_errors = 0;
  std::vector<std::string> first_problems;  // up to 10

  [[nodiscard]] bool passed() const { return violations == 0 && ledger_errors == 0; }
};

/// Fuzzed placements over every algorithm and mechanism on shared networks:
/// each accepted placement is audited, some are released again, and the
/// ledgers are compared with the live reservations after every step.
[[nodiscard]] AuditReport run_constraint_audit(int placements, std::uint64_t seed);

struct MonotonicityReport {
  int cases = 0;
  int decreases = 0;
  double worst_drop = 0.0;
  [[nodiscard]] bool passed() const { return decreases == 0; }
};

/// Adds one backup to a random placed microservice and compares its
/// reliability before and after.
[[nodiscard]] MonotonicityReport run_backup_monotonicity(int cases, std::uint64_t seed,
                                                         const ReliabilityOptions& options = {});

}  // namespace msplace::validation
