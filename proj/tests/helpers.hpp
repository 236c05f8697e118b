#pragma once

#include <cmath>
#include <initializer_list>
#include <utility>

#include "msplace/placement.hpp"
#include "msplace/topology.hpp"
#include "msplace/workload.hpp"

namespace msplace::testing {

inline PhysicalNode make_node(double cpu, double rel_low = 1.0, double rel_high = 1.0, double threshold = 0.5) {
  PhysicalNode n;
  n.cpu_capacity = cpu;
  n.load_threshold = threshold;
  n.rel_low = rel_low;
  n.rel_high = rel_high;
  return n;
}

/// Link whose per-step reliability is exactly `rel` (up to exp/log rounding).
inline PhysicalLink make_link(NodeId u, NodeId v, double bw = 100.0, double rel = 1.0, double delay_ms = 1.0) {
  PhysicalLink l;
  l.u = u;
  l.v = v;
  l.bw_capacity = bw;
  l.prop_delay_ms = delay_ms;
  l.failure_rate = -std::log(rel);
  return l;
}

/// `n` identical nodes joined by `edges`.
inline InfrastructureNetwork make_net(int n, std::initializer_list<std::pair<NodeId, NodeId>> edges, double cpu = 10.0,
                                      double node_rel = 1.0, double link_rel = 1.0) {
  InfrastructureNetwork net;
  for (int i = 0; i < n; ++i) net.add_node(make_node(cpu, node_rel, node_rel));
  for (auto [u, v] : edges) net.add_link(make_link(u, v, 100.0, link_rel));
  return net;
}

/// m_0 -> m_1 -> ... -> m_count chain with zero software failure rates.
inline ServiceRequest make_chain(int count, NodeId access, double cpu = 0.5, double bw = 1.0) {
  ServiceRequest r;
  r.microservices.push_back(Microservice{0, 0.0, 0.0, 0.0});
  for (int i = 1; i <= count; ++i) r.microservices.push_back(Microservice{i, cpu, 10.0, 0.0});
  r.links.push_back(MicroserviceLink{0, 1, 0.0, 0.0, 50.0, 0.0});
  for (int i = 2; i <= count; ++i) r.links.push_back(MicroserviceLink{i - 1, i, bw, 0.1, 50.0, 0.0});
  r.backup_limit = 0;
  r.lifetime = 10;
  r.access_node = access;
  return r;
}

inline double rate_for(double reliability) { return -std::log(reliability); }

}  // namespace msplace::testing
