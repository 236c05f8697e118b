#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "msplace/experiment.hpp"
#include "msplace/simulator.hpp"

namespace msplace {
namespace {

using testing::make_chain;
using testing::make_link;
using testing::make_node;
using testing::rate_for;

SimConfig small_config(int nodes = 15, int requests = 25) {
  SimConfig c;
  c.node_count = nodes;
  c.edge_prob = 0.3;
  c.request_count = requests;
  c.repetitions = 1;
  c.threads = 1;
  c.seed = 11;
  return c;
}

ComponentFailureSample clean_sample(const InfrastructureNetwork& net) {
  ComponentFailureSample s;
  s.failed_nodes.assign(net.node_count(), 0);
  s.failed_links.assign(net.link_count(), 0);
  return s;
}

// ---- sampling -----------------------------------------------------------------

TEST(KeyedUniform, RangeDeterminismAndMean) {
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = keyed_uniform(5, 1, static_cast<std::uint64_t>(i));
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_EQ(keyed_uniform(5, 1, 2, 3), keyed_uniform(5, 1, 2, 3));
  EXPECT_NE(keyed_uniform(5, 1, 2, 3), keyed_uniform(6, 1, 2, 3));
}

// Steps until the first failure of a component failing with probability q are
// geometric with mean 1/q.
TEST(Sampling, FirstFailureIsGeometric) {
  InfrastructureNetwork net;
  net.add_node(make_node(10, 0.95, 0.95));
  const double q = 0.05;
  const int trials = 4000;
  double total = 0.0;
  std::uint64_t step = 0;
  for (int i = 0; i < trials; ++i) {
    int t = 1;
    while (!sample_failures({}, net, repetition_seed(3, static_cast<int>(step++))).node_failed(0)) ++t;
    total += t;
  }
  const double sd = std::sqrt((1.0 - q) / (q * q) / trials);
  EXPECT_NEAR(total / trials, 1.0 / q, 4.0 * sd);
}

double node_failure_frequency(const InfrastructureNetwork& net, NodeId n, int steps) {
  int failed = 0;
  for (int i = 0; i < steps; ++i) failed += sample_failures({}, net, repetition_seed(17, i)).node_failed(n) ? 1 : 0;
  return static_cast<double>(failed) / steps;
}

TEST(Sampling, NodeFailureFollowsLoad) {
  InfrastructureNetwork net;
  net.add_node(make_node(10, 0.9, 0.6, 0.5));
  const int steps = 20000;
  const double tol = 4.0 * std::sqrt(0.25 / steps);
  EXPECT_NEAR(node_failure_frequency(net, 0, steps), 0.1, tol);
  net.allocate_cpu(0, 5.0);
  EXPECT_NEAR(node_failure_frequency(net, 0, steps), 0.1, tol);
  net.allocate_cpu(0, 0.5);
  EXPECT_NEAR(node_failure_frequency(net, 0, steps), 0.4, tol);
}

TEST(Sampling, LinkAndSoftwareFailureFrequency) {
  InfrastructureNetwork net;
  net.add_node(make_node(10));
  net.add_node(make_node(10));
  net.add_link(make_link(0, 1, 100, 0.8));
  auto req = make_chain(1, 0);
  req.microservices[1].failure_rate = rate_for(0.7);
  req.links[0].failure_rate = rate_for(0.9);
  PlacementState s = initial_state(req, Mechanism::kFullyProtected);
  s.instances[1].push_back(InstanceRecord{1, 1.0, 1.0});
  s.routes.push_back(InstanceLinkRoute{0, 0, 0, {Path{{0, 1}, {0}}}, Pool::kProtected, 0.0, {}});
  const ActivePlacement active[] = {ActivePlacement{req, s}};
  const int steps = 20000;
  int link = 0, inst = 0, ilink = 0;
  for (int i = 0; i < steps; ++i) {
    const auto f = sample_failures(active, net, repetition_seed(23, i));
    link += f.link_failed(0) ? 1 : 0;
    inst += f.failed_instances.contains({0, 1, 0}) ? 1 : 0;
    ilink += f.failed_instance_links.contains({0, 0, 0, 0}) ? 1 : 0;
  }
  const double tol = 4.0 * std::sqrt(0.25 / steps);
  EXPECT_NEAR(static_cast<double>(link) / steps, 0.2, tol);
  EXPECT_NEAR(static_cast<double>(inst) / steps, 0.3, tol);
  EXPECT_NEAR(static_cast<double>(ilink) / steps, 0.1, tol);
}

// ---- liveness -----------------------------------------------------------------

struct BackupFixture {
  InfrastructureNetwork net;
  ServiceRequest req = make_chain(1, 0, 0.5, 1.0);
  PlacementState state;

  explicit BackupFixture(Mechanism mech, double capacity = 100.0) {
    for (int i = 0; i < 3; ++i) net.add_node(make_node(10));
    net.add_link(make_link(0, 1, capacity));
    net.add_link(make_link(0, 2, capacity));
    req.links[0].bw_demand = 5.0;
    state = initial_state(req, mech);
    state.instances[1] = {InstanceRecord{1, 1.0, 1.0}, InstanceRecord{2, 1.0, 1.0}};
    state.routes.push_back(InstanceLinkRoute{0, 0, 0, {Path{{0, 1}, {0}}}, Pool::kProtected, 5.0, {}});
    state.routes.push_back(
        InstanceLinkRoute{0, 1, 0, {Path{{0, 2}, {1}}}, route_pool(mech, 1, 0), 5.0, {}});
    for (const auto& r : state.routes) net.allocate_bandwidth(r.paths[0].links[0], r.bw_reserved, r.pool);
  }
};

TEST(Liveness, BackupCarriesServiceWhenPrimaryDown) {
  BackupFixture f(Mechanism::kFullyProtected);
  auto s = clean_sample(f.net);
  EXPECT_TRUE(evaluate_service_alive(f.req, f.state, s, f.net));
  s.failed_nodes[1] = 1;
  EXPECT_TRUE(evaluate_service_alive(f.req, f.state, s, f.net));
  s.failed_links[1] = 1;
  EXPECT_FALSE(evaluate_service_alive(f.req, f.state, s, f.net));
  s = clean_sample(f.net);
  s.failed_nodes[0] = 1;
  EXPECT_FALSE(evaluate_service_alive(f.req, f.state, s, f.net));
}

TEST(Liveness, SoftwareFailuresOfInstancesAndLinks) {
  BackupFixture f(Mechanism::kFullyProtected);
  auto s = clean_sample(f.net);
  s.failed_instances.emplace(0, 1, 0);
  EXPECT_TRUE(evaluate_service_alive(f.req, f.state, s, f.net));
  s.failed_instance_links.emplace(0, 0, 1, 0);
  EXPECT_FALSE(evaluate_service_alive(f.req, f.state, s, f.net));
}

TEST(Liveness, AnyLivePathOfARouteSuffices) {
  InfrastructureNetwork net;
  for (int i = 0; i < 4; ++i) net.add_node(make_node(10));
  net.add_link(make_link(0, 1));
  net.add_link(make_link(1, 3));
  net.add_link(make_link(0, 2));
  net.add_link(make_link(2, 3));
  const auto req = make_chain(1, 0);
  auto st = initial_state(req, Mechanism::kFullyProtected);
  st.instances[1].push_back(InstanceRecord{3, 1.0, 1.0});
  st.routes.push_back(InstanceLinkRoute{
      0, 0, 0, {Path{{0, 1, 3}, {0, 1}}, Path{{0, 2, 3}, {2, 3}}}, Pool::kProtected, 0.0, {}});
  auto s = clean_sample(net);
  s.failed_nodes[1] = 1;
  EXPECT_TRUE(evaluate_service_alive(req, st, s, net));
  s.failed_links[3] = 1;
  EXPECT_FALSE(evaluate_service_alive(req, st, s, net));
}

TEST(Liveness, SharedBackupNeedsProtectedHeadroom) {
  BackupFixture tight(Mechanism::kShared, 8.0);
  auto s = clean_sample(tight.net);
  s.failed_nodes[1] = 1;
  std::vector<double> claims(tight.net.link_count(), 0.0);
  // Link 1 has 8 of capacity and nothing protected: the first claim of 5 fits.
  EXPECT_TRUE(evaluate_service_alive(tight.req, tight.state, s, tight.net, &claims));
  EXPECT_EQ(claims[1], 5.0);
  // A second service sharing that link in the same step does not.
  EXPECT_FALSE(evaluate_service_alive(tight.req, tight.state, s, tight.net, &claims));
  // Without claim tracking the pool is not checked.
  EXPECT_TRUE(evaluate_service_alive(tight.req, tight.state, s, tight.net));

  BackupFixture roomy(Mechanism::kShared, 20.0);
  std::vector<double> c2(roomy.net.link_count(), 0.0);
  EXPECT_TRUE(evaluate_service_alive(roomy.req, roomy.state, s, roomy.net, &c2));
  EXPECT_TRUE(evaluate_service_alive(roomy.req, roomy.state, s, roomy.net, &c2));
}

TEST(Liveness, FullyProtectedBackupsNeverClaim) {
  BackupFixture f(Mechanism::kFullyProtected, 8.0);
  auto s = clean_sample(f.net);
  s.failed_nodes[1] = 1;
  std::vector<double> claims(f.net.link_count(), 0.0);
  EXPECT_TRUE(evaluate_service_alive(f.req, f.state, s, f.net, &claims));
  EXPECT_EQ(claims[1], 0.0);
}

// ---- bookkeeping --------------------------------------------------------------

TEST(RecordBandwidth, MeanProtectedReservation) {
  InfrastructureNetwork empty;
  EXPECT_EQ(record_bandwidth(empty), 0.0);
  InfrastructureNetwork net;
  for (int i = 0; i < 3; ++i) net.add_node(make_node(10));
  net.add_link(make_link(0, 1));
  net.add_link(make_link(1, 2));
  EXPECT_EQ(record_bandwidth(net), 0.0);
  net.allocate_bandwidth(0, 10.0, Pool::kProtected);
  net.allocate_bandwidth(1, 10.0, Pool::kProtected);
  net.allocate_bandwidth(1, 7.0, Pool::kShared);
  EXPECT_EQ(record_bandwidth(net), 10.0);
}

TEST(Histogram, BandEdges) {
  EXPECT_EQ(histogram_bucket(0.5), 0);
  EXPECT_EQ(histogram_bucket(0.98999), 0);
  EXPECT_EQ(histogram_bucket(0.99), 1);
  EXPECT_EQ(histogram_bucket(0.9995), 2);
  EXPECT_EQ(histogram_bucket(0.99995), 3);
  EXPECT_EQ(histogram_bucket(1.0), 3);
}

TEST(SimConfig, ValidateRejectsBadValues) {
  auto bad = [](auto mutate) {
    SimConfig c;
    mutate(c);
    return c;
  };
  EXPECT_NO_THROW(SimConfig{}.validate());
  EXPECT_THROW(bad([](SimConfig& c) { c.node_count = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SimConfig& c) { c.edge_prob = 0.0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SimConfig& c) { c.request_count = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SimConfig& c) { c.arrival_rate = -1.0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SimConfig& c) { c.repetitions = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SimConfig& c) { c.placement.max_hops = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](SimConfig& c) { c.workload.ms_count_min = 0; }).validate(), std::invalid_argument);
}

// ---- whole runs ---------------------------------------------------------------

TEST(Simulation, PerfectComponentsNeverFail) {
  auto c = small_config();
  c.topology.rel_low_min = c.topology.rel_low_max = 1.0;
  c.topology.rel_high_min = c.topology.rel_high_max = 1.0;
  c.topology.link_failure_rate = 0.0;
  c.workload.ms_failure_rate = 0.0;
  c.workload.link_failure_rate = 0.0;
  for (Algorithm a : {Algorithm::kSrp, Algorithm::kGrd}) {
    c.algorithm = a;
    const auto r = run_simulation(c);
    EXPECT_EQ(r.total_failures(), 0.0);
    EXPECT_GT(r.placements_succeeded, 0.0);
  }
}

TEST(Simulation, SeriesInvariants) {
  auto c = small_config(20, 40);
  c.workload.ms_failure_rate = 0.01;
  for (FailurePolicy p : {FailurePolicy::kRemove, FailurePolicy::kCountAndContinue}) {
    c.failure_policy = p;
    const auto r = run_simulation(c);
    ASSERT_FALSE(r.cumulative_failures.empty());
    EXPECT_EQ(r.cumulative_failures.size(), r.bandwidth.size());
    for (std::size_t t = 1; t < r.cumulative_failures.size(); ++t) {
      EXPECT_LE(r.cumulative_failures[t - 1], r.cumulative_failures[t]);
    }
    EXPECT_EQ(std::accumulate(r.histogram.begin(), r.histogram.end(), 0.0), r.placements_succeeded);
    EXPECT_EQ(r.placements_succeeded + r.placements_rejected, c.request_count);
    if (p == FailurePolicy::kRemove) EXPECT_LE(r.total_failures(), r.placements_succeeded);
    // Every service has expired by the default horizon.
    EXPECT_EQ(r.bandwidth.back(), 0.0);
  }
}

TEST(Simulation, CountAndContinueCountsEveryDeadStep) {
  auto c = small_config(15, 20);
  c.workload.ms_failure_rate = 0.2;
  c.failure_policy = FailurePolicy::kRemove;
  const double removed = run_simulation(c).total_failures();
  c.failure_policy = FailurePolicy::kCountAndContinue;
  const double counted = run_simulation(c).total_failures();
  EXPECT_GT(removed, 0.0);
  EXPECT_GT(counted, removed);
}

TEST(Simulation, DeterministicAcrossThreadCounts) {
  auto c = small_config();
  c.repetitions = 4;
  c.threads = 1;
  const auto a = run_batch(c);
  c.threads = 3;
  const auto b = run_batch(c);
  EXPECT_EQ(a.cumulative_failures, b.cumulative_failures);
  EXPECT_EQ(a.bandwidth, b.bandwidth);
  EXPECT_EQ(a.repetition_failures, b.repetition_failures);
  EXPECT_EQ(a.repetition_failures.size(), 4u);
}

TEST(Simulation, SharedBackupsReserveLessProtectedBandwidth) {
  auto c = small_config(20, 30);
  c.repetitions = 2;
  c.algorithm = Algorithm::kSrp;
  c.mechanism = Mechanism::kFullyProtected;
  const double full = run_batch(c).mean_bandwidth();
  c.algorithm = Algorithm::kSrpS;
  const double shared = run_batch(c).mean_bandwidth();
  EXPECT_GT(full, 0.0);
  EXPECT_LT(shared, full);
}

// Paired repetitions at default parameters: SRP should not fail more often
// than the greedy benchmark in total.
TEST(Simulation, SrpFailsLessThanGreedy) {
  SimConfig c;
  c.node_count = 30;
  c.request_count = 100;
  c.repetitions = 6;
  c.seed = 5;
  c.threads = 1;
  c.algorithm = Algorithm::kSrp;
  const auto srp = run_batch(c);
  c.algorithm = Algorithm::kGrd;
  const auto grd = run_batch(c);
  EXPECT_LT(srp.total_failures(), grd.total_failures());
  const auto cmp = compare_paired(srp.repetition_failures, grd.repetition_failures);
  EXPECT_GE(cmp.wins, cmp.losses);
}

}  // namespace
}  // namespace msplace
