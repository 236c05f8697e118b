#include "msplace/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace msplace {

namespace {

// Ledger slack for floating-point accumulation of many small demands.
constexpr double kLedgerEps = 1e-9;

void require_index(std::size_t index, std::size_t size, const char* what) {
  if (index >= size) {
    throw std::out_of_range(std::string("unknown ") + what + " index " + std::to_string(index));
  }
}

}  // namespace

double node_reliability_at(const PhysicalNode& node, double cpu_load) {
  return cpu_load <= node.load_threshold * node.cpu_capacity ? node.rel_low : node.rel_high;
}

double node_reliability(const PhysicalNode& node) {
  return node_reliability_at(node, node.cpu_allocated);
}

double link_reliability(const PhysicalLink& link) { return std::exp(-link.failure_rate); }

InfrastructureNetwork::InfrastructureNetwork(double shared_ratio) { set_shared_ratio(shared_ratio); }

NodeId InfrastructureNetwork::add_node(PhysicalNode node) {
  if (node.cpu_capacity < 0.0 || node.cpu_allocated < 0.0 || node.cpu_allocated > node.cpu_capacity) {
    throw std::invalid_argument("node CPU ledger out of range");
  }
  if (node.load_threshold < 0.0 || node.load_threshold > 1.0) {
    throw std::invalid_argument("load threshold must be a fraction in [0,1]");
  }
  if (node.rel_low < 0.0 || node.rel_low > 1.0 || node.rel_high < 0.0 || node.rel_high > node.rel_low) {
    throw std::invalid_argument("node reliabilities must satisfy 0 <= rel_high <= rel_low <= 1");
  }
  node.id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(node);
  adjacency_.emplace_back();
  return node.id;
}

LinkId InfrastructureNetwork::add_link(PhysicalLink link) {
  if (link.u == link.v) {
    throw std::invalid_argument("self-loop links are not allowed");
  }
  if (link.u < 0 || link.v < 0 || static_cast<std::size_t>(link.u) >= nodes_.size() ||
      static_cast<std::size_t>(link.v) >= nodes_.size()) {
    throw std::invalid_argument("link endpoint does not exist");
  }
  if (find_link(link.u, link.v)) {
    throw std::invalid_argument("duplicate link");
  }
  if (link.prop_delay_ms <= 0.0 || link.failure_rate < 0.0 || link.bw_capacity < 0.0) {
    throw std::invalid_argument("link parameters out of range");
  }
  const auto id = static_cast<LinkId>(links_.size());
  links_.push_back(link);
  adjacency_[static_cast<std::size_t>(link.u)].push_back(id);
  adjacency_[static_cast<std::size_t>(link.v)].push_back(id);
  return id;
}

std::span<const LinkId> InfrastructureNetwork::incident(NodeId id) const {
  require_index(static_cast<std::size_t>(id), adjacency_.size(), "node");
  return adjacency_[static_cast<std::size_t>(id)];
}

std::optional<LinkId> InfrastructureNetwork::find_link(NodeId a, NodeId b) const {
  if (a < 0 || static_cast<std::size_t>(a) >= adjacency_.size()) return std::nullopt;
  for (LinkId e : adjacency_[static_cast<std::size_t>(a)]) {
    if (links_[static_cast<std::size_t>(e)].other(a) == b) return e;
  }
  return std::nullopt;
}

void InfrastructureNetwork::set_access_nodes(std::vector<NodeId> nodes) {
  for (NodeId n : nodes) require_index(static_cast<std::size_t>(n), nodes_.size(), "node");
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  access_nodes_ = std::move(nodes);
}

void InfrastructureNetwork::set_shared_ratio(double omega) {
  if (omega < 0.0) throw std::invalid_argument("shared ratio must be non-negative");
  shared_ratio_ = omega;
}

double InfrastructureNetwork::residual_cpu(NodeId id) const {
  const auto& n = node(id);
  return n.cpu_capacity - n.cpu_allocated;
}

double InfrastructureNetwork::pool_capacity(LinkId id, Pool pool) const {
  const auto& e = link(id);
  return pool == Pool::kProtected ? e.bw_capacity : shared_ratio_ * e.bw_capacity;
}

double InfrastructureNetwork::residual_bandwidth(LinkId id, Pool pool) const {
  const auto& e = link(id);
  return pool_capacity(id, pool) - (pool == Pool::kProtected ? e.bw_protected : e.bw_shared);
}

void InfrastructureNetwork::allocate_cpu(NodeId id, double amount) {
  if (amount < 0.0) throw std::invalid_argument("negative CPU allocation");
  auto& n = mutable_node(id);
  if (n.cpu_allocated + amount > n.cpu_capacity + kLedgerEps) {
    throw CapacityExceeded("CPU capacity exceeded on node " + std::to_string(id));
  }
  n.cpu_allocated = std::min(n.cpu_capacity, n.cpu_allocated + amount);
}

void InfrastructureNetwork::release_cpu(NodeId id, double amount) {
  if (amount < 0.0) throw std::invalid_argument("negative CPU release");
  auto& n = mutable_node(id);
  if (amount > n.cpu_allocated + kLedgerEps) {
    throw std::logic_error("releasing more CPU than allocated on node " + std::to_string(id));
  }
  n.cpu_allocated = n.cpu_allocated - amount;
  if (n.cpu_allocated < kLedgerEps) n.cpu_allocated = 0.0;
}

void InfrastructureNetwork::allocate_bandwidth(LinkId id, double amount, Pool pool) {
  if (amount < 0.0) throw std::invalid_argument("negative bandwidth allocation");
  const double cap = pool_capacity(id, pool);
  auto& e = mutable_link(id);
  double& used = pool == Pool::kProtected ? e.bw_protected : e.bw_shared;
  if (used + amount > cap + kLedgerEps) {
    throw CapacityExceeded("bandwidth capacity exceeded on link " + std::to_string(id));
  }
  used = std::min(cap, used + amount);
}

void InfrastructureNetwork::release_bandwidth(LinkId id, double amount, Pool pool) {
  if (amount < 0.0) throw std::invalid_argument("negative bandwidth release");
  auto& e = mutable_link(id);
  double& used = pool == Pool::kProtected ? e.bw_protected : e.bw_shared;
  if (amount > used + kLedgerEps) {
    throw std::logic_error("releasing more bandwidth than allocated on link " + std::to_string(id));
  }
  used -= amount;
  if (used < kLedgerEps) used = 0.0;
}

double InfrastructureNetwork::node_reliability_after(NodeId id, double extra_cpu) const {
  const auto& n = node(id);
  return node_reliability_at(n, n.cpu_allocated + extra_cpu);
}

void InfrastructureNetwork::clear_allocations() {
  for (auto& n : nodes_) n.cpu_allocated = 0.0;
  for (auto& e : links_) {
    e.bw_protected = 0.0;
    e.bw_shared = 0.0;
  }
}

void TopologyRanges::validate() const {
  auto ordered = [](double lo, double hi, const char* what) {
    if (!(lo <= hi)) throw std::invalid_argument(std::string("range is inverted: ") + what);
  };
  ordered(cpu_min, cpu_max, "cpu");
  ordered(rel_low_min, rel_low_max, "rel_low");
  ordered(rel_high_min, rel_high_max, "rel_high");
  ordered(bw_min, bw_max, "bw");
  ordered(delay_min_ms, delay_max_ms, "delay");
  if (cpu_min < 0.0 || bw_min < 0.0 || delay_min_ms <= 0.0) {
    throw std::invalid_argument("capacities must be non-negative and delays positive");
  }
  if (rel_high_max > rel_low_min || rel_high_min < 0.0 || rel_low_max > 1.0) {
    throw std::invalid_argument("high-load reliability must not exceed low-load reliability");
  }
  if (load_threshold < 0.0 || load_threshold > 1.0) {
    throw std::invalid_argument("load threshold must be in [0,1]");
  }
  if (link_failure_rate < 0.0 || shared_ratio < 0.0) {
    throw std::invalid_argument("failure rate and shared ratio must be non-negative");
  }
}

InfrastructureNetwork generate_er_topology(int node_count, double edge_prob, const TopologyRanges& ranges,
                                           std::uint64_t seed) {
  if (node_count <= 0) throw std::invalid_argument("node_count must be positive");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0)) throw std::invalid_argument("edge_prob must be in (0,1]");
  ranges.validate();

  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  InfrastructureNetwork net(ranges.shared_ratio);
  for (int i = 0; i < node_count; ++i) {
    PhysicalNode n;
    n.cpu_capacity = uniform(ranges.cpu_min, ranges.cpu_max);
    n.load_threshold = ranges.load_threshold;
    n.rel_low = uniform(ranges.rel_low_min, ranges.rel_low_max);
    n.rel_high = uniform(ranges.rel_high_min, ranges.rel_high_max);
    net.add_node(n);
  }
  std::bernoulli_distribution coin(edge_prob);
  for (int u = 0; u < node_count; ++u) {
    for (int v = u + 1; v < node_count; ++v) {
      if (!coin(rng)) continue;
      PhysicalLink e;
      e.u = u;
      e.v = v;
      e.bw_capacity = uniform(ranges.bw_min, ranges.bw_max);
      e.prop_delay_ms = uniform(ranges.delay_min_ms, ranges.delay_max_ms);
      e.failure_rate = ranges.link_failure_rate;
      net.add_link(e);
    }
  }
  return net;
}

std::vector<NodeId> select_access_nodes(const InfrastructureNetwork& net, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must be in (0,1]");
  const auto n = net.node_count();
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&net](NodeId a, NodeId b) { return net.degree(a) < net.degree(b); });
  // Guard against 0.2 * 50 = 10.000000000000002 rounding up to 11.
  auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  count = std::clamp<std::size_t>(count, n == 0 ? 0 : 1, n);
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace msplace
