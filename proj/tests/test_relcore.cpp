#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "msplace/placement.hpp"
#include "msplace/relcore.hpp"
#include "msplace/simulator.hpp"
#include "msplace/validation/oracle.hpp"
#include "msplace/validation/suites.hpp"

namespace msplace {
namespace {

using testing::make_chain;
using testing::make_link;
using testing::make_net;
using testing::make_node;
using testing::rate_for;

RelValue path_value(std::vector<NodeId> nodes, std::vector<LinkId> links, double r) {
  return RelValue::single(Path{std::move(nodes), std::move(links)}, r);
}

// ---- operators --------------------------------------------------------------

TEST(OpPlus, IdentityAbsorbingAndArithmetic) {
  EXPECT_EQ(op_plus(0.0, 0.37), 0.37);
  EXPECT_EQ(op_plus(1.0, 0.37), 1.0);
  EXPECT_NEAR(op_plus(0.9, 0.9), 0.99, 1e-15);
  EXPECT_NEAR(op_plus(RelValue::scalar(0.9), RelValue::scalar(0.9)).value, 0.99, 1e-15);
}

TEST(OpPlus, UnionOfPathFamilies) {
  const auto x = path_value({0, 2, 1}, {0, 1}, 0.9);
  const auto y = path_value({0, 3, 1}, {2, 3}, 0.8);
  const auto z = op_plus(x, y);
  EXPECT_EQ(z.paths.size(), 2u);
  EXPECT_NEAR(z.value, 1.0 - 0.1 * 0.2, 1e-15);
  EXPECT_EQ(op_plus(x, x).paths.size(), 1u);
}

TEST(OpMinus, InverseOfPlus) {
  EXPECT_NEAR(op_minus(0.99, 0.9), 0.9, 1e-14);
  EXPECT_EQ(op_minus(0.42, 0.0), 0.42);
  EXPECT_NEAR(op_minus(op_plus(RelValue::scalar(0.3), RelValue::scalar(0.999999)), 0.999999).value, 0.3, 1e-15);
}

TEST(OpMinus, DomainErrors) {
  EXPECT_THROW(static_cast<void>(op_minus(0.5, 0.7)), std::domain_error);
  EXPECT_THROW(static_cast<void>(op_minus(1.0, 1.0)), std::domain_error);
  EXPECT_THROW(static_cast<void>(op_minus(RelValue::scalar(0.2), 0.5)), std::domain_error);
}

TEST(OpTimes, DisjointProductOverlapZeroScalarUnit) {
  const auto x = path_value({0, 1}, {0}, 0.9);
  const auto y = path_value({1, 2}, {1}, 0.9);
  const auto xy = op_times(x, y);
  EXPECT_NEAR(xy.value, 0.81, 1e-15);
  ASSERT_EQ(xy.paths.size(), 1u);
  EXPECT_EQ(xy.paths[0].path.nodes, (std::vector<NodeId>{0, 1, 2}));

  const auto a = path_value({0, 3, 1}, {0, 1}, 0.9);
  const auto b = path_value({1, 3, 2}, {1, 2}, 0.9);
  EXPECT_EQ(op_times(a, b).value, 0.0);
  EXPECT_TRUE(provenance_overlap(a, b));

  EXPECT_NEAR(op_times(RelValue::scalar(1.0), y).value, 0.9, 1e-15);
  EXPECT_NEAR(op_times(RelValue::scalar(0.5), RelValue::scalar(0.4)).value, 0.2, 1e-15);
}

TEST(OperatorProperty, CommutativeAssociativeInverse) {
  const auto r = validation::run_operator_suite(20000, 77);
  EXPECT_LT(r.max_commutativity_error, 1e-12);
  EXPECT_LT(r.max_associativity_error, 1e-12);
  EXPECT_LT(r.max_inverse_error, 1e-12);
  EXPECT_EQ(r.overlap_nonzero, 0);
  EXPECT_GT(r.overlap_cases, 0);
}

// ---- matrices ---------------------------------------------------------------

TEST(MatMul, PathGraphTwoHop) {
  InfrastructureNetwork net;
  net.add_node(make_node(1, 0.9, 0.9));
  net.add_node(make_node(1, 0.8, 0.8));
  net.add_node(make_node(1, 0.7, 0.7));
  net.add_link(make_link(0, 1, 100, 0.95));
  net.add_link(make_link(1, 2, 100, 0.85));
  const auto r = one_step_matrix(net);
  EXPECT_NEAR(r.value(0, 1), 0.9 * 0.95, 1e-15);
  EXPECT_NEAR(r.value(1, 0), 0.8 * 0.95, 1e-15);
  const auto r2 = mat_mul(r, r);
  EXPECT_NEAR(r2.value(0, 2), (0.9 * 0.95) * (0.8 * 0.85), 1e-15);
  ASSERT_EQ(r2.at(0, 2).paths.size(), 1u);
  EXPECT_EQ(r2.at(0, 2).paths[0].path.nodes, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(r2.value(0, 0), 0.0);
}

TEST(MatMul, ZeroMatrixStaysZero) {
  const auto net = make_net(3, {{0, 1}, {1, 2}});
  const PathRelMatrix zero(3);
  const auto c = mat_mul(zero, one_step_matrix(net));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(c.value(i, j), 0.0);
  }
}

TEST(MatMul, TriangleTwoStepExcludesDirectEdge) {
  const auto net = make_net(3, {{0, 1}, {1, 2}, {0, 2}}, 10.0, 0.99, 0.999);
  const auto r = one_step_matrix(net);
  const auto r2 = mat_mul(r, r);
  ASSERT_EQ(r2.at(0, 1).paths.size(), 1u);
  EXPECT_EQ(r2.at(0, 1).paths[0].path.nodes, (std::vector<NodeId>{0, 2, 1}));
  EXPECT_NEAR(r2.value(0, 1), (0.99 * 0.999) * (0.99 * 0.999), 1e-15);
}

TEST(MatMul, OrderMismatchThrows) {
  EXPECT_THROW(static_cast<void>(mat_mul(PathRelMatrix(2), PathRelMatrix(3))), std::invalid_argument);
  EXPECT_THROW(static_cast<void>(mat_add(PathRelMatrix(2), PathRelMatrix(3))), std::invalid_argument);
}

TEST(MatAdd, ZeroDisjointAndIntersecting) {
  PathRelMatrix a(4);
  PathRelMatrix b(4);
  a.at(0, 1) = path_value({0, 2, 1}, {0, 1}, 0.9);
  const auto same = mat_add(a, PathRelMatrix(4));
  EXPECT_EQ(same.value(0, 1), 0.9);

  b.at(0, 1) = path_value({0, 3, 1}, {2, 3}, 0.9);
  EXPECT_NEAR(mat_add(a, b).value(0, 1), 0.99, 1e-15);

  b.at(0, 1) = path_value({0, 2, 3, 1}, {0, 4, 3}, 0.9);
  const auto kept = mat_add(a, b);
  EXPECT_EQ(kept.value(0, 1), 0.9);
  EXPECT_EQ(kept.at(0, 1).paths.size(), 1u);
}

TEST(NetworkMatrix, TwoPerfectNodes) {
  const auto net = make_net(2, {{0, 1}});
  const auto m = network_reliability_matrix(net, 3);
  EXPECT_EQ(m.value(0, 1), 1.0);
  EXPECT_EQ(m.value(0, 0), 1.0);
}

// Direct path keeps only its link after stripping; the detour keeps its
// interior node and both links.
TEST(NetworkMatrix, TriangleHandExpansion) {
  const auto net = make_net(3, {{0, 1}, {1, 2}, {0, 2}}, 10.0, 0.99, 0.999);
  const double direct = 0.999;
  const double detour = 0.999 * 0.99 * 0.999;
  const auto m = network_reliability_matrix(net, 2);
  EXPECT_NEAR(m.value(0, 1), 1.0 - (1.0 - direct) * (1.0 - detour), 1e-15);

  const CriticalNodeSet critical{2};
  const auto c = network_reliability_matrix(net, 2, &critical);
  EXPECT_NEAR(c.value(0, 1), 1.0 - (1.0 - direct) * (1.0 - 0.999 * 0.999), 1e-15);
}

TEST(NetworkMatrix, AgreesWithEnumerationOracle) {
  const auto r = validation::run_matrix_oracle_suite(60, 7, 4, 21);
  EXPECT_LT(r.max_error, 1e-12);
  EXPECT_EQ(r.inconsistent_values, 0);
}

TEST(NetworkMatrix, KMustBePositive) {
  const auto net = make_net(2, {{0, 1}});
  EXPECT_THROW(static_cast<void>(network_reliability_matrix(net, 0)), std::invalid_argument);
}

// ---- placement-level quantities --------------------------------------------

PlacementState state_with(const ServiceRequest& req, std::vector<std::vector<NodeId>> nodes) {
  PlacementState s = initial_state(req, Mechanism::kFullyProtected);
  s.instances.resize(req.microservices.size());
  for (std::size_t m = 1; m < nodes.size() + 1 && m < s.instances.size(); ++m) {
    for (NodeId n : nodes[m - 1]) s.instances[m].push_back(InstanceRecord{n, 1.0, 1.0});
  }
  return s;
}

void add_route(PlacementState& s, int link, int child_b, int parent_b, Path p) {
  InstanceLinkRoute r;
  r.link = link;
  r.child_instance = child_b;
  r.parent_instance = parent_b;
  r.paths.push_back(std::move(p));
  s.routes.push_back(std::move(r));
}

TEST(CriticalNodes, Examples) {
  const auto req = make_chain(3, 0);
  auto s = state_with(req, {{5}, {3}, {3, 4}});
  const auto c = critical_nodes(req, s);
  EXPECT_EQ(c, (CriticalNodeSet{0, 3, 5}));
  s = state_with(req, {{3}, {3}, {1, 2}});
  EXPECT_EQ(critical_nodes(req, s), (CriticalNodeSet{0, 3}));
}

TEST(EffectiveLink, Product) {
  EXPECT_NEAR(effective_link_probability(0.99, 0.98), 0.9702, 1e-15);
  EXPECT_EQ(effective_link_probability(1.0, 1.0), 1.0);
}

TEST(InstanceReliability, SingleParentInstance) {
  InfrastructureNetwork net;
  net.add_node(make_node(10));
  net.add_node(make_node(10));
  net.add_link(make_link(0, 1, 100, 0.9));
  auto req = make_chain(2, 0);
  req.microservices[2].failure_rate = rate_for(0.99);
  auto s = state_with(req, {{0}, {1}});
  add_route(s, 0, 0, 0, Path{{0}, {}});
  add_route(s, 1, 0, 0, Path{{0, 1}, {0}});
  const auto crit = critical_nodes(req, s);
  EXPECT_NEAR(instance_reliability(net, req, s, 1, 0, crit), 1.0, 1e-15);
  EXPECT_NEAR(instance_reliability(net, req, s, 2, 0, crit), 0.891, 1e-12);
}

TEST(InstanceReliability, TwoParentInstances) {
  InfrastructureNetwork net;
  for (int i = 0; i < 3; ++i) net.add_node(make_node(10));
  net.add_link(make_link(0, 1, 100, 0.9));
  net.add_link(make_link(2, 1, 100, 0.8));
  net.add_link(make_link(0, 2, 100, 1.0));
  auto req = make_chain(2, 0);
  req.microservices[2].failure_rate = rate_for(0.99);
  auto s = state_with(req, {{0, 2}, {1}});
  add_route(s, 0, 0, 0, Path{{0}, {}});
  add_route(s, 0, 1, 0, Path{{0, 2}, {2}});
  add_route(s, 1, 0, 0, Path{{0, 1}, {0}});
  add_route(s, 1, 0, 1, Path{{2, 1}, {1}});
  const auto crit = critical_nodes(req, s);
  EXPECT_NEAR(instance_reliability(net, req, s, 2, 0, crit), 0.99 * (1.0 - 0.1 * 0.2), 1e-12);
}

TEST(InstanceReliability, UnplacedParentThrows) {
  const auto net = make_net(2, {{0, 1}});
  const auto req = make_chain(2, 0);
  auto s = state_with(req, {{}, {1}});
  EXPECT_THROW(static_cast<void>(instance_reliability(net, req, s, 2, 0, {})), std::logic_error);
}

TEST(InstanceReliability, PerturbationHookScales) {
  const auto net = make_net(1, {});
  auto req = make_chain(1, 0);
  req.microservices[1].failure_rate = rate_for(0.9);
  auto s = state_with(req, {{0}});
  add_route(s, 0, 0, 0, Path{{0}, {}});
  ReliabilityOptions o;
  o.instance_perturbation = 0.01;
  EXPECT_NEAR(instance_reliability(net, req, s, 1, 0, {0}, o), 0.9 * 0.99, 1e-12);
}

struct TwoHostFixture {
  InfrastructureNetwork net;
  ServiceRequest req;
  PlacementState state;

  TwoHostFixture(bool same_node) : req(make_chain(1, 0)) {
    net.add_node(make_node(10));
    net.add_node(make_node(10, 0.999, 0.999));
    net.add_node(make_node(10, 0.999, 0.999));
    net.add_link(make_link(0, 1));
    net.add_link(make_link(0, 2));
    req.microservices[1].failure_rate = rate_for(0.95);
    req.backup_limit = 1;
    state = state_with(req, {{1, same_node ? NodeId{1} : NodeId{2}}});
    add_route(state, 0, 0, 0, Path{{0, 1}, {0}});
    add_route(state, 0, 1, 0, same_node ? Path{{0, 1}, {0}} : Path{{0, 2}, {1}});
  }
};

TEST(MicroserviceReliability, SingleInstanceOnCriticalNode) {
  TwoHostFixture f(true);
  f.state.instances[1].pop_back();
  f.state.routes.pop_back();
  const auto crit = critical_nodes(f.req, f.state);
  EXPECT_NEAR(microservice_reliability(f.net, f.req, f.state, 1, crit),
              instance_reliability(f.net, f.req, f.state, 1, 0, crit), 1e-15);
}

TEST(MicroserviceReliability, TwoInstancesSameNode) {
  TwoHostFixture f(true);
  const auto crit = critical_nodes(f.req, f.state);
  EXPECT_TRUE(crit.contains(1));
  EXPECT_NEAR(microservice_reliability(f.net, f.req, f.state, 1, crit), 1.0 - 0.05 * 0.05, 1e-12);
}

TEST(MicroserviceReliability, TwoInstancesDistinctNodes) {
  TwoHostFixture f(false);
  const auto crit = critical_nodes(f.req, f.state);
  EXPECT_EQ(crit, (CriticalNodeSet{0}));
  EXPECT_NEAR(microservice_reliability(f.net, f.req, f.state, 1, crit), 1.0 - (0.999 * 0.05) * (0.999 * 0.05),
              1e-12);
  ReliabilityOptions o;
  o.cross_node = CrossNodeForm::kNodeSurvival;
  EXPECT_NEAR(microservice_reliability(f.net, f.req, f.state, 1, crit, o),
              1.0 - (1.0 - 0.999 * 0.95) * (1.0 - 0.999 * 0.95), 1e-12);
  EXPECT_EQ(microservice_reliability(f.net, f.req, f.state, 0, crit), 1.0);
}

TEST(ServiceReliability, SingleInstanceOnAccessNode) {
  InfrastructureNetwork net;
  net.add_node(make_node(10, 0.9995, 0.9995));
  auto req = make_chain(1, 0);
  req.microservices[1].failure_rate = rate_for(0.98);
  auto s = state_with(req, {{0}});
  add_route(s, 0, 0, 0, Path{{0}, {}});
  EXPECT_NEAR(service_reliability(net, req, s), 0.9995 * 0.98, 1e-12);
}

TEST(ServiceReliability, PerfectComponentsGiveOne) {
  const auto net = make_net(3, {{0, 1}, {1, 2}});
  const auto req = make_chain(2, 0);
  auto s = state_with(req, {{1}, {2}});
  add_route(s, 0, 0, 0, Path{{0, 1}, {0}});
  add_route(s, 1, 0, 0, Path{{1, 2}, {1}});
  EXPECT_EQ(service_reliability(net, req, s), 1.0);
}

TEST(ServiceReliability, IncompletePlacementThrows) {
  const auto net = make_net(3, {{0, 1}, {1, 2}});
  const auto req = make_chain(2, 0);
  auto s = state_with(req, {{1}});
  add_route(s, 0, 0, 0, Path{{0, 1}, {0}});
  EXPECT_THROW(static_cast<void>(service_reliability(net, req, s)), std::logic_error);
  EXPECT_NO_THROW(static_cast<void>(partial_service_reliability(net, req, s)));
}

// Chain on a line without backups: r_G is the product of every component on
// the placement, and sampling agrees with it.
TEST(ServiceReliability, ChainEqualsComponentProductAndSampling) {
  InfrastructureNetwork net;
  const double rn[] = {0.995, 0.99, 0.985};
  for (double r : rn) net.add_node(make_node(10, r, r));
  net.add_link(make_link(0, 1, 100, 0.993));
  net.add_link(make_link(1, 2, 100, 0.997));
  auto req = make_chain(3, 0);
  const double rm[] = {0.999, 0.998, 0.996};
  const double rl[] = {0.9995, 0.9985};
  for (int m = 1; m <= 3; ++m) req.microservices[static_cast<std::size_t>(m)].failure_rate = rate_for(rm[m - 1]);
  req.links[1].failure_rate = rate_for(rl[0]);
  req.links[2].failure_rate = rate_for(rl[1]);
  auto s = state_with(req, {{0}, {1}, {2}});
  add_route(s, 0, 0, 0, Path{{0}, {}});
  add_route(s, 1, 0, 0, Path{{0, 1}, {0}});
  add_route(s, 2, 0, 0, Path{{1, 2}, {1}});
  const double expect = rn[0] * rn[1] * rn[2] * rm[0] * rm[1] * rm[2] * rl[0] * rl[1] * 0.993 * 0.997;
  const double analytic = service_reliability(net, req, s);
  EXPECT_NEAR(analytic, expect, 1e-12);

  const ActivePlacement active[] = {ActivePlacement{req, s}};
  const int samples = 100000;
  int alive = 0;
  for (int i = 0; i < samples; ++i) {
    if (evaluate_service_alive(req, s, sample_failures(active, net, repetition_seed(31, i)), net)) ++alive;
  }
  const double sigma = std::sqrt(analytic * (1.0 - analytic) / samples);
  EXPECT_NEAR(static_cast<double>(alive) / samples, analytic, 3.0 * sigma);
}

// Scaling one critical node's reliability by s scales r_G by exactly s, so
// that node enters the expanded expression once.
int check_critical_scaling(const InfrastructureNetwork& net, const ServiceRequest& req, const PlacementState& s) {
  const double base = service_reliability(net, req, s);
  int checked = 0;
  for (NodeId c : critical_nodes(req, s)) {
    auto scaled = net;
    auto& node = scaled.mutable_node(c);
    node.rel_low *= 0.9;
    node.rel_high *= 0.9;
    EXPECT_NEAR(service_reliability(scaled, req, s), 0.9 * base, 1e-12) << "node " << c;
    ++checked;
  }
  return checked;
}

TEST(ServiceReliabilityProperty, CriticalNodeAppearsOnce) {
  const auto placements = validation::small_placements(40, 5, 3, 100.0, 13);
  ASSERT_EQ(placements.size(), 40u);
  int checked = 0;
  for (const auto& fp : placements) checked += check_critical_scaling(fp.net, fp.request, fp.state);
  EXPECT_GE(checked, 40);

  // Spread placement with a backup: critical nodes off the access node and a
  // non-critical pair.
  InfrastructureNetwork net;
  for (int i = 0; i < 4; ++i) net.add_node(make_node(10, 0.97 - 0.01 * i, 0.97 - 0.01 * i));
  net.add_link(make_link(0, 1, 100, 0.98));
  net.add_link(make_link(1, 2, 100, 0.97));
  net.add_link(make_link(1, 3, 100, 0.96));
  net.add_link(make_link(0, 2, 100, 0.95));
  auto req = make_chain(2, 0);
  req.microservices[1].failure_rate = rate_for(0.99);
  req.microservices[2].failure_rate = rate_for(0.98);
  auto s = state_with(req, {{1}, {2, 3}});
  add_route(s, 0, 0, 0, Path{{0, 1}, {0}});
  add_route(s, 1, 0, 0, Path{{1, 2}, {1}});
  add_route(s, 1, 1, 0, Path{{1, 3}, {2}});
  EXPECT_EQ(critical_nodes(req, s), (CriticalNodeSet{0, 1}));
  EXPECT_EQ(check_critical_scaling(net, req, s), 2);
}

TEST(BackupProperty, AddingBackupNeverLowersMicroserviceReliability) {
  const auto r = validation::run_backup_monotonicity(200, 41);
  EXPECT_EQ(r.cases, 200);
  EXPECT_EQ(r.decreases, 0) << "worst drop " << r.worst_drop;
}

}  // namespace
}  // namespace msplace
