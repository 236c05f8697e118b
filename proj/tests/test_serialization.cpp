#include <gtest/gtest.h>

#include <json.hpp>
#include <random>

#include "helpers.hpp"
#include "msplace/serialization.hpp"

namespace msplace {
namespace {

using nlohmann::json;

InfrastructureNetwork sample_network() {
  auto net = generate_er_topology(12, 0.4, TopologyRanges{}, 8);
  net.set_access_nodes(select_access_nodes(net, 0.2));
  return net;
}

TEST(TopologyJson, RoundTripPreservesEveryField) {
  const auto net = sample_network();
  const std::string text = topology_to_json(net);
  const auto back = topology_from_json(text);
  ASSERT_EQ(back.node_count(), net.node_count());
  ASSERT_EQ(back.link_count(), net.link_count());
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    const auto& a = net.node(static_cast<NodeId>(i));
    const auto& b = back.node(static_cast<NodeId>(i));
    EXPECT_EQ(a.cpu_capacity, b.cpu_capacity);
    EXPECT_EQ(a.load_threshold, b.load_threshold);
    EXPECT_EQ(a.rel_low, b.rel_low);
    EXPECT_EQ(a.rel_high, b.rel_high);
  }
  for (std::size_t i = 0; i < net.link_count(); ++i) {
    const auto& a = net.link(static_cast<LinkId>(i));
    const auto& b = back.link(static_cast<LinkId>(i));
    EXPECT_EQ(a.u, b.u);
    EXPECT_EQ(a.v, b.v);
    EXPECT_EQ(a.bw_capacity, b.bw_capacity);
    EXPECT_EQ(a.prop_delay_ms, b.prop_delay_ms);
    EXPECT_EQ(a.failure_rate, b.failure_rate);
  }
  EXPECT_EQ(back.access_nodes(), net.access_nodes());
  EXPECT_EQ(topology_to_json(back), text);
}

TEST(TopologyJson, RejectsMalformedInput) {
  EXPECT_THROW(static_cast<void>(topology_from_json("{not json")), ParseError);
  EXPECT_THROW(static_cast<void>(topology_from_json("[]")), ParseError);
  EXPECT_THROW(static_cast<void>(topology_from_json(R"({"nodes": [{"cpu_capacity": 1}], "links": []})")),
               ParseError);
  const std::string dangling = R"({"nodes": [{"cpu_capacity": 1, "load_threshold": 0.5, "rel_low": 1, "rel_high": 1}],
    "links": [{"u": 0, "v": 3, "bw_capacity": 1, "prop_delay": 1, "failure_rate": 0}]})";
  EXPECT_THROW(static_cast<void>(topology_from_json(dangling)), ParseError);
}

TEST(RequestsJson, RoundTrip) {
  const auto net = sample_network();
  std::mt19937_64 rng(4);
  WorkloadRanges w;
  w.cross_edge_prob = 0.3;
  std::vector<ServiceRequest> reqs;
  for (int i = 0; i < 10; ++i) {
    reqs.push_back(generate_request(w, net.access_nodes(), rng, i));
    reqs.back().arrival_time = 0.25 * i;
  }
  const std::string text = requests_to_json(reqs);
  const auto back = requests_from_json(text);
  ASSERT_EQ(back.size(), reqs.size());
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    EXPECT_EQ(back[i].id, reqs[i].id);
    EXPECT_EQ(back[i].microservices.size(), reqs[i].microservices.size());
    EXPECT_EQ(back[i].links.size(), reqs[i].links.size());
    EXPECT_EQ(back[i].backup_limit, reqs[i].backup_limit);
    EXPECT_EQ(back[i].lifetime, reqs[i].lifetime);
    EXPECT_EQ(back[i].arrival_time, reqs[i].arrival_time);
    EXPECT_EQ(back[i].access_node, reqs[i].access_node);
  }
  EXPECT_EQ(requests_to_json(back), text);
}

TEST(RequestsJson, RejectsStructurallyInvalidRequest) {
  auto req = testing::make_chain(2, 0);
  std::vector<ServiceRequest> one{req};
  auto doc = json::parse(requests_to_json(one));
  doc["requests"][0]["links"][1]["parent"] = 2;  // self loop on m_2
  EXPECT_THROW(static_cast<void>(requests_from_json(doc.dump())), ParseError);
  EXPECT_THROW(static_cast<void>(requests_from_json("{}")), ParseError);
}

TEST(PlacementJson, ListsInstancesAndRoutes) {
  auto net = testing::make_net(3, {{0, 1}, {1, 2}});
  const auto req = testing::make_chain(2, 0);
  const auto out = srp_place(net, req, PlacementConfig{});
  ASSERT_TRUE(out.success);
  const auto doc = json::parse(placement_to_json(req, out));
  EXPECT_EQ(doc.at("instances").size(), 2u);
  EXPECT_EQ(doc.at("routes").size(), req.links.size());
  EXPECT_EQ(doc.at("mechanism"), "fully-protected");
  EXPECT_TRUE(doc.at("success").get<bool>());
  EXPECT_FALSE(doc.contains("reason"));
}

TEST(ConfigJson, RoundTripAndPartialOverride) {
  SimConfig c;
  c.node_count = 37;
  c.edge_prob = 0.15;
  c.algorithm = Algorithm::kRrsp;
  c.mechanism = Mechanism::kShared;
  c.failure_policy = FailurePolicy::kCountAndContinue;
  c.topology.shared_ratio = 0.4;
  c.workload.bw_multiplier = 7.0;
  c.workload.backup_mode = BackupMode::kRandom;
  c.placement.score_mode = ScoreMode::kLiteral;
  c.placement.reliability.cross_node = CrossNodeForm::kNodeSurvival;
  const std::string text = sim_config_to_json(c);
  const auto back = sim_config_from_json(text);
  EXPECT_EQ(sim_config_to_json(back), text);

  const auto partial = sim_config_from_json(R"({"request_count": 12, "workload": {"cpu_multiplier": 3}})", c);
  EXPECT_EQ(partial.request_count, 12);
  EXPECT_EQ(partial.workload.cpu_multiplier, 3.0);
  EXPECT_EQ(partial.workload.bw_multiplier, 7.0);
  EXPECT_EQ(partial.node_count, 37);
}

TEST(ConfigJson, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(static_cast<void>(sim_config_from_json(R"({"nodecount": 5})")), ParseError);
  EXPECT_THROW(static_cast<void>(sim_config_from_json(R"({"topology": {"cpu": 5}})")), ParseError);
  EXPECT_THROW(static_cast<void>(sim_config_from_json(R"({"algorithm": "best"})")), ParseError);
  EXPECT_THROW(static_cast<void>(sim_config_from_json(R"({"node_count": "many"})")), ParseError);
  EXPECT_THROW(static_cast<void>(sim_config_from_json(R"({"node_count": -3})")), ParseError);
  EXPECT_THROW(static_cast<void>(sim_config_from_json("[1, 2")), ParseError);
}

TEST(StepCsv, GoldenOutput) {
  SimResult r;
  r.cumulative_failures = {0.0, 1.0, 1.5};
  r.bandwidth = {2.5, 0.125, 0.0};
  EXPECT_EQ(sim_result_csv(r),
            "t,cumulative_failures,mean_bandwidth\n"
            "1,0,2.5\n"
            "2,1,0.125\n"
            "3,1.5,0\n");
  EXPECT_EQ(sim_result_csv(SimResult{}), "t,cumulative_failures,mean_bandwidth\n");
}

TEST(SummaryJson, CarriesTotalsAndHistogram) {
  SimConfig c;
  SimResult r;
  r.cumulative_failures = {1.0, 3.0};
  r.bandwidth = {4.0, 2.0};
  r.histogram = {1.0, 2.0, 3.0, 4.0};
  r.placements_succeeded = 10.0;
  r.placements_rejected = 2.0;
  r.repetition_failures = {3.0};
  const auto doc = json::parse(sim_summary_json(c, r));
  EXPECT_EQ(doc.at("total_failures").get<double>(), 3.0);
  EXPECT_EQ(doc.at("mean_bandwidth").get<double>(), 3.0);
  EXPECT_EQ(doc.at("placements_succeeded").get<double>(), 10.0);
  EXPECT_EQ(doc.at("histogram").size(), 4u);
  EXPECT_TRUE(doc.contains("config"));
}

TEST(Mechanism, Names) {
  EXPECT_EQ(mechanism_name(Mechanism::kShared), "shared");
  EXPECT_EQ(parse_mechanism(mechanism_name(Mechanism::kFullyProtected)), Mechanism::kFullyProtected);
  EXPECT_EQ(parse_mechanism("protected"), Mechanism::kFullyProtected);
  EXPECT_FALSE(parse_mechanism("both").has_value());
}

}  // namespace
}  // namespace msplace
