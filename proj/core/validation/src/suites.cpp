#include "msplace/validation/suites.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "msplace/simulator.hpp"
#include "msplace/validation/oracle.hpp"

namespace msplace::validation {

namespace {

InfrastructureNetwork random_small_graph(std::mt19937_64& rng, int nodes) {
  std::uniform_real_distribution<double> rel(0.85, 1.0);
  std::uniform_real_distribution<double> rate(0.0, 0.15);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double p = 0.3 + 0.6 * unit(rng);
  InfrastructureNetwork net;
  for (int i = 0; i < nodes; ++i) {
    PhysicalNode n;
    n.cpu_capacity = 10.0;
    n.rel_low = rel(rng);
    n.rel_high = n.rel_low;
    net.add_node(n);
  }
  for (int u = 0; u < nodes; ++u) {
    for (int v = u + 1; v < nodes; ++v) {
      if (unit(rng) >= p) continue;
      PhysicalLink l;
      l.u = u;
      l.v = v;
      l.bw_capacity = 100.0;
      l.failure_rate = rate(rng);
      net.add_link(l);
    }
  }
  return net;
}

void stress_network(InfrastructureNetwork& net, double stress) {
  for (std::size_t n = 0; n < net.node_count(); ++n) {
    auto& node = net.mutable_node(static_cast<NodeId>(n));
    node.rel_low = 1.0 - stress * (1.0 - node.rel_low);
    node.rel_high = 1.0 - stress * (1.0 - node.rel_high);
  }
  for (std::size_t e = 0; e < net.link_count(); ++e) net.mutable_link(static_cast<LinkId>(e)).failure_rate *= stress;
}

}  // namespace

bool OperatorReport::passed(double tol) const {
  return max_commutativity_error < tol && max_associativity_error < tol && max_inverse_error < tol &&
         overlap_nonzero == 0;
}

OperatorReport run_operator_suite(int triples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<NodeId> node(0, 99);
  OperatorReport out;
  out.triples = triples;
  for (int i = 0; i < triples; ++i) {
    const double a = unit(rng);
    const double b = unit(rng);
    const double c = unit(rng);
    const RelValue A = RelValue::scalar(a);
    const RelValue B = RelValue::scalar(b);
    const RelValue C = RelValue::scalar(c);
    out.max_commutativity_error =
        std::max(out.max_commutativity_error, std::abs(op_plus(A, B).value - op_plus(B, A).value));
    out.max_associativity_error = std::max(
        out.max_associativity_error, std::abs(op_plus(op_plus(A, B), C).value - op_plus(A, op_plus(B, C)).value));
    out.max_inverse_error = std::max(out.max_inverse_error, std::abs(op_minus(op_plus(A, B), b).value - a));

    // u -> t -> v followed by v -> t -> w revisits t.
    NodeId u = node(rng);
    NodeId t = node(rng);
    NodeId v = node(rng);
    NodeId w = node(rng);
    if (t == u || t == v || u == v || w == t || w == v) continue;
    const RelValue x = RelValue::single(Path{{u, t, v}, {2 * i, 2 * i + 1}}, a);
    const RelValue y = RelValue::single(Path{{v, t, w}, {2 * i + 2, 2 * i + 3}}, b);
    ++out.overlap_cases;
    if (op_times(x, y).value != 0.0) ++out.overlap_nonzero;
  }
  return out;
}

bool MatrixOracleReport::passed(double tol) const { return max_error < tol && inconsistent_values == 0; }

MatrixOracleReport run_matrix_oracle_suite(int graphs, int max_nodes, int max_k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(2, max_nodes);
  std::uniform_int_distribution<int> hops(1, max_k);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MatrixOracleReport out;
  out.graphs = graphs;
  for (int g = 0; g < graphs; ++g) {
    const int n = size(rng);
    const int k = hops(rng);
    const InfrastructureNetwork net = random_small_graph(rng, n);
    CriticalNodeSet critical;
    for (int i = 0; i < n; ++i) {
      if (unit(rng) < 0.3) critical.insert(i);
    }
    const PathRelMatrix acc = accumulated_path_matrix(net, k);
    for (std::size_t i = 0; i < acc.order(); ++i) {
      for (std::size_t j = 0; j < acc.order(); ++j) {
        if (!acc.at(i, j).consistent()) ++out.inconsistent_values;
      }
    }
    for (const CriticalNodeSet* crit : {static_cast<const CriticalNodeSet*>(nullptr), static_cast<const CriticalNodeSet*>(&critical)}) {
      const PathRelMatrix m = network_reliability_matrix(net, k, crit);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double expect = brute_force_reliability(net, i, j, k, crit);
          out.max_error = std::max(out.max_error, std::abs(m.value(static_cast<std::size_t>(i),
                                                                   static_cast<std::size_t>(j)) -
                                                           expect));
          ++out.entries;
        }
      }
    }
  }
  return out;
}

std::vector<FixedPlacement> small_placements(int count, int max_nodes, int max_ms, double stress,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(3, std::max(3, max_nodes));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  WorkloadRanges w;
  w.ms_count_max = max_ms;
  w.ms_failure_rate *= stress;
  w.link_failure_rate *= stress;
  std::vector<FixedPlacement> out;
  for (int attempt = 0; static_cast<int>(out.size()) < count && attempt < 100 * count; ++attempt) {
    const int n = size(rng);
    InfrastructureNetwork net = generate_er_topology(n, 0.6, TopologyRanges{}, rng());
    stress_network(net, stress);
    net.set_access_nodes(select_access_nodes(net, 0.2));
    ServiceRequest req = generate_request(w, net.access_nodes(), rng, static_cast<int>(out.size()));
    req.backup_limit = 0;
    PlacementConfig cfg;
    PlacementOutcome placed = srp_place(net, req, cfg);
    if (!placed.success) continue;
    // At most one backup per microservice, each added with probability 1/2.
    req.backup_limit = req.size();
    for (int m = 1; m <= req.size(); ++m) {
      if (unit(rng) < 0.5) static_cast<void>(place_one_microservice(net, req, m, placed.state, cfg));
    }
    out.push_back(FixedPlacement{std::move(net), std::move(req), std::move(placed.state)});
  }
  return out;
}

double MonteCarloCase::z() const {
  if (sigma > 0.0) return (empirical - analytic) / sigma;
  return empirical == analytic ? 0.0 : INFINITY;
}

bool MonteCarloCase::within(double k_sigma) const { return std::abs(z()) <= k_sigma; }

int MonteCarloReport::agreeing(double k_sigma) const {
  return static_cast<int>(std::count_if(cases.begin(), cases.end(),
                                        [k_sigma](const MonteCarloCase& c) { return c.within(k_sigma); }));
}

double MonteCarloReport::max_abs_z() const {
  double worst = 0.0;
  for (const auto& c : cases) worst = std::max(worst, std::abs(c.z()));
  return worst;
}

MonteCarloReport run_monte_carlo_suite(const std::vector<FixedPlacement>& placements, int samples,
                                       std::uint64_t seed, const ReliabilityOptions& options) {
  MonteCarloReport out;
  for (std::size_t i = 0; i < placements.size(); ++i) {
    const FixedPlacement& fp = placements[i];
    const ActivePlacement active[] = {ActivePlacement{fp.request, fp.state}};
    long alive = 0;
    for (int s = 0; s < samples; ++s) {
      const auto sample = sample_failures(active, fp.net, repetition_seed(seed + i, s));
      if (evaluate_service_alive(fp.request, fp.state, sample, fp.net)) ++alive;
    }
    MonteCarloCase c;
    c.analytic = service_reliability(fp.net, fp.request, fp.state, options);
    c.empirical = static_cast<double>(alive) / samples;
    c.sigma = std::sqrt(c.analytic * (1.0 - c.analytic) / samples);
    out.cases.push_back(c);
  }
  return out;
}

AuditReport run_constraint_audit(int placements, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr Algorithm kAlgorithms[] = {Algorithm::kSrp,  Algorithm::kSrpS, Algorithm::kDaip,
                                       Algorithm::kRrsp, Algorithm::kGrd,  Algorithm::kGrdB};
  AuditReport out;
  auto note = [&out](std::string s) {
    if (out.first_problems.size() < 10) out.first_problems.push_back(std::move(s));
  };
  constexpr int kPerNetwork = 50;
  for (int base = 0; base < placements; base += kPerNetwork) {
    TopologyRanges t;
    t.shared_ratio = 0.5 + unit(rng);
    const int n = 8 + static_cast<int>(unit(rng) * 17);
    InfrastructureNetwork net = generate_er_topology(n, 0.15 + 0.3 * unit(rng), t, rng());
    net.set_access_nodes(select_access_nodes(net, 0.2));
    WorkloadRanges w;
    // Heavier demands than the defaults so that capacity limits bind.
    w.cpu_multiplier = 1.0 + 9.0 * unit(rng);
    w.bw_multiplier = 1.0 + 49.0 * unit(rng);
    w.cross_edge_prob = unit(rng) < 0.5 ? 0.0 : 0.3;
    w.backup_mode = BackupMode::kRandom;
    std::vector<ActivePlacement> active;
    for (int i = base; i < std::min(placements, base + kPerNetwork); ++i) {
      ServiceRequest req = generate_request(w, net.access_nodes(), rng, i);
      PlacementConfig cfg;
      cfg.seed = rng();
      cfg.mechanism = unit(rng) < 0.5 ? Mechanism::kFullyProtected : Mechanism::kShared;
      cfg.max_hops = 2 + static_cast<int>(unit(rng) * 3);
      const Algorithm alg = kAlgorithms[rng() % std::size(kAlgorithms)];
      PlacementOutcome res = place_request(alg, net, req, cfg, active);
      ++out.placements;
      if (res.success) {
        ++out.accepted;
        for (auto& v : audit_placement(net, req, res.state)) {
          ++out.violations;
          note(std::string(algorithm_name(alg)) + ": " + v);
        }
        active.push_back(ActivePlacement{std::move(req), std::move(res.state)});
      }
      // Random departures keep the network in a mixed state.
      if (!active.empty() && unit(rng) < 0.3) {
        const std::size_t k = rng() % active.size();
        release_placement(net, active[k].request, active[k].state);
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(k));
      }
      std::string detail;
      if (!ledger_consistent(net, active, &detail)) {
        ++out.ledger_errors;
        note(std::string(algorithm_name(alg)) + " ledger: " + detail);
      }
    }
  }
  return out;
}

MonotonicityReport run_backup_monotonicity(int cases, std::uint64_t seed, const ReliabilityOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  WorkloadRanges w;
  w.ms_failure_rate *= 500.0;
  w.link_failure_rate *= 500.0;
  w.cross_edge_prob = 0.3;
  MonotonicityReport out;
  for (int attempt = 0; out.cases < cases && attempt < 20 * cases; ++attempt) {
    const int n = 6 + static_cast<int>(unit(rng) * 10);
    InfrastructureNetwork net = generate_er_topology(n, 0.4, TopologyRanges{}, rng());
    stress_network(net, 100.0);
    net.set_access_nodes(select_access_nodes(net, 0.2));
    ServiceRequest req = generate_request(w, net.access_nodes(), rng, attempt);
    req.backup_limit = 0;
    PlacementConfig cfg;
    cfg.reliability = options;
    PlacementOutcome placed = srp_place(net, req, cfg);
    if (!placed.success) continue;
    req.backup_limit = req.size();
    // A few backups first so that cases cover microservices that already
    // have some.
    for (int m = 1; m <= req.size(); ++m) {
      if (unit(rng) < 0.3) static_cast<void>(place_one_microservice(net, req, m, placed.state, cfg));
    }
    const int m = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(req.size()));
    const double before =
        microservice_reliability(net, req, placed.state, m, critical_nodes(req, placed.state), options);
    if (!place_one_microservice(net, req, m, placed.state, cfg)) continue;
    const double after =
        microservice_reliability(net, req, placed.state, m, critical_nodes(req, placed.state), options);
    ++out.cases;
    if (after < before - 1e-12) {
      ++out.decreases;
      out.worst_drop = std::max(out.worst_drop, before - after);
    }
  }
  return out;
}

}  // namespace msplace::validation
