#include "msplace/workload.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "msplace/pathfinding.hpp"

namespace msplace {

std::vector<int> ServiceRequest::parent_links(int m) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].child == m) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> ServiceRequest::child_links(int m) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].parent == m) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> ServiceRequest::parents(int m) const {
  std::vector<int> out;
  for (int l : parent_links(m)) out.push_back(links[static_cast<std::size_t>(l)].parent);
  return out;
}

std::vector<int> ServiceRequest::children(int m) const {
  std::vector<int> out;
  for (int l : child_links(m)) out.push_back(links[static_cast<std::size_t>(l)].child);
  return out;
}

std::vector<int> ServiceRequest::bfs_order() const {
  std::vector<int> order;
  if (size() < 1) return order;
  std::vector<char> seen(microservices.size(), 0);
  std::deque<int> queue{1};
  seen[1] = 1;
  while (!queue.empty()) {
    const int m = queue.front();
    queue.pop_front();
    order.push_back(m);
    for (int c : children(m)) {
      if (c > 0 && !seen[static_cast<std::size_t>(c)]) {
        seen[static_cast<std::size_t>(c)] = 1;
        queue.push_back(c);
      }
    }
  }
  return order;
}

void ServiceRequest::validate() const {
  const int count = static_cast<int>(microservices.size());
  if (count < 2) throw std::invalid_argument("request needs at least one real microservice");
  if (microservices[0].cpu_demand != 0.0) {
    throw std::invalid_argument("access microservice must not consume CPU");
  }
  for (const auto& l : links) {
    if (l.parent < 0 || l.parent >= count || l.child < 0 || l.child >= count) {
      throw std::invalid_argument("link endpoint out of range");
    }
    if (l.parent == l.child) throw std::invalid_argument("self dependency");
    if (l.child == 0) throw std::invalid_argument("access microservice cannot have parents");
    if (l.parent == 0 && l.child != 1) throw std::invalid_argument("access microservice may only feed m_1");
    if (l.parent != 0 && (l.bw_demand <= 0.0 || l.data_volume <= 0.0)) {
      throw std::invalid_argument("link demands must be positive");
    }
    if (l.deadline_s < 0.0) throw std::invalid_argument("negative deadline");
  }
  const auto m1_parents = parents(1);
  if (m1_parents.size() != 1 || m1_parents[0] != 0) {
    throw std::invalid_argument("m_0 must be the sole parent of m_1");
  }
  // Kahn's algorithm detects cycles.
  std::vector<int> indegree(static_cast<std::size_t>(count), 0);
  for (const auto& l : links) ++indegree[static_cast<std::size_t>(l.child)];
  std::deque<int> ready;
  for (int m = 0; m < count; ++m) {
    if (indegree[static_cast<std::size_t>(m)] == 0) ready.push_back(m);
  }
  int visited = 0;
  while (!ready.empty()) {
    const int m = ready.front();
    ready.pop_front();
    ++visited;
    for (int c : children(m)) {
      if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
    }
  }
  if (visited != count) throw std::invalid_argument("dependency graph has a cycle");
  if (static_cast<int>(bfs_order().size()) != size()) {
    throw std::invalid_argument("microservice unreachable from m_1");
  }
  if (backup_limit < 0 || backup_limit > size()) {
    throw std::invalid_argument("backup limit must lie in [0, |M|]");
  }
  if (lifetime < 1) throw std::invalid_argument("lifetime must be at least one time unit");
}

void WorkloadRanges::validate() const {
  if (ms_count_min < 1 || ms_count_max < ms_count_min) throw std::invalid_argument("bad microservice count range");
  auto ordered = [](double lo, double hi, const char* what) {
    if (!(lo <= hi) || lo < 0.0) throw std::invalid_argument(std::string("bad range: ") + what);
  };
  ordered(cpu_min, cpu_max, "cpu");
  ordered(data_min_mb, data_max_mb, "data volume");
  ordered(proc_min_ms, proc_max_ms, "processing latency");
  ordered(deadline_min_s, deadline_max_s, "deadline");
  if (!(bw_min > 0.0 && bw_min <= bw_max)) throw std::invalid_argument("bad bandwidth range");
  if (lifetime_min < 1 || lifetime_max < lifetime_min) throw std::invalid_argument("bad lifetime range");
  if (cpu_multiplier < 1.0 || bw_multiplier < 1.0) throw std::invalid_argument("multipliers must be >= 1");
  if (ms_failure_rate < 0.0 || link_failure_rate < 0.0) throw std::invalid_argument("negative failure rate");
  if (cross_edge_prob < 0.0 || cross_edge_prob > 1.0) throw std::invalid_argument("bad cross edge probability");
}

ServiceRequest generate_request(const WorkloadRanges& ranges, std::span<const NodeId> access_nodes,
                                std::mt19937_64& rng, int id) {
  if (access_nodes.empty()) throw std::invalid_argument("no access nodes to attach the request to");
  ranges.validate();
  auto uniform = [&rng](double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto uniform_int = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  ServiceRequest req;
  req.id = id;
  const int count = uniform_int(ranges.ms_count_min, ranges.ms_count_max);
  req.microservices.push_back(Microservice{0, 0.0, 0.0, 0.0});
  for (int j = 1; j <= count; ++j) {
    Microservice m;
    m.id = j;
    m.cpu_demand = uniform(ranges.cpu_min, ranges.cpu_max) * ranges.cpu_multiplier;
    m.proc_latency_ms = uniform(ranges.proc_min_ms, ranges.proc_max_ms);
    m.failure_rate = ranges.ms_failure_rate;
    req.microservices.push_back(m);
  }
  auto make_link = [&](int parent, int child) {
    MicroserviceLink l;
    l.parent = parent;
    l.child = child;
    l.bw_demand = uniform(ranges.bw_min, ranges.bw_max) * ranges.bw_multiplier;
    l.data_volume = uniform(ranges.data_min_mb, ranges.data_max_mb);
    l.deadline_s = uniform(ranges.deadline_min_s, ranges.deadline_max_s);
    l.failure_rate = ranges.link_failure_rate;
    return l;
  };
  req.links.push_back(make_link(0, 1));
  for (int j = 2; j <= count; ++j) {
    const int parent = uniform_int(1, j - 1);
    req.links.push_back(make_link(parent, j));
    if (ranges.cross_edge_prob > 0.0) {
      for (int q = 1; q < j; ++q) {
        if (q == parent) continue;
        if (std::bernoulli_distribution(ranges.cross_edge_prob)(rng)) req.links.push_back(make_link(q, j));
      }
    }
  }
  req.lifetime = uniform_int(ranges.lifetime_min, ranges.lifetime_max);
  req.access_node = access_nodes[static_cast<std::size_t>(
      uniform_int(0, static_cast<int>(access_nodes.size()) - 1))];
  req.backup_limit = ranges.backup_mode == BackupMode::kFull ? count : uniform_int(1, count);
  return req;
}

ServiceRequest generate_request(const WorkloadRanges& ranges, std::span<const NodeId> access_nodes,
                                std::uint64_t seed, int id) {
  std::mt19937_64 rng(seed);
  return generate_request(ranges, access_nodes, rng, id);
}

std::vector<double> generate_arrivals(int count, double rate, std::uint64_t seed) {
  if (count <= 0) throw std::invalid_argument("arrival count must be positive");
  if (!(rate > 0.0)) throw std::invalid_argument("arrival rate must be positive");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(rate);
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(count));
  double t = 0.0;
  for (int i = 0; i < count; ++i) {
    t += gap(rng);
    times.push_back(t);
  }
  return times;
}

double link_latency_s(const MicroserviceLink& link, std::span<const double> path_delays_ms,
                      double child_proc_latency_ms) {
  if (path_delays_ms.empty()) throw std::invalid_argument("link latency needs at least one placed path");
  double transfer = 0.0;
  if (link.data_volume > 0.0) {
    transfer = link.bw_demand > 0.0 ? link.data_volume / link.bw_demand : std::numeric_limits<double>::infinity();
  }
  const double shortest = *std::min_element(path_delays_ms.begin(), path_delays_ms.end());
  return transfer + (shortest + child_proc_latency_ms) / 1000.0;
}

double link_latency(const InfrastructureNetwork& net, const MicroserviceLink& link, std::span<const Path> placed_paths,
                    double child_proc_latency_ms) {
  std::vector<double> delays;
  delays.reserve(placed_paths.size());
  for (const auto& p : placed_paths) delays.push_back(path_delay_ms(net, p));
  return link_latency_s(link, delays, child_proc_latency_ms);
}

double software_reliability(double failure_rate, double horizon) {
  if (failure_rate < 0.0) throw std::invalid_argument("negative failure rate");
  return std::exp(-failure_rate * horizon);
}

}  // namespace msplace
