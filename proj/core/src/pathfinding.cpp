#include "msplace/pathfinding.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "msplace/workload.hpp"

namespace msplace {

namespace {

constexpr double kBwEps = 1e-9;
constexpr int kUnreached = std::numeric_limits<int>::max() / 4;
constexpr double kFar = std::numeric_limits<double>::infinity();
// Exact fallback limits: candidate path count and search nodes.
constexpr std::size_t kMaxCandidatePaths = 20000;
constexpr std::size_t kMaxSearchNodes = 200000;

bool edge_usable(const InfrastructureNetwork& net, LinkId e, double bw, Pool pool) {
  return net.residual_bandwidth(e, pool) + kBwEps >= bw;
}

std::vector<int> hop_distances(const InfrastructureNetwork& net, NodeId from, const std::vector<char>& usable) {
  std::vector<int> dist(net.node_count(), kUnreached);
  std::deque<NodeId> queue{from};
  dist[static_cast<std::size_t>(from)] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (LinkId e : net.incident(u)) {
      if (!usable[static_cast<std::size_t>(e)]) continue;
      const NodeId v = net.link(e).other(u);
      if (dist[static_cast<std::size_t>(v)] == kUnreached) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::vector<double> delay_distances(const InfrastructureNetwork& net, NodeId from, const std::vector<char>& usable) {
  std::vector<double> dist(net.node_count(), kFar);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(from)] = 0.0;
  heap.emplace(0.0, from);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (LinkId e : net.incident(u)) {
      if (!usable[static_cast<std::size_t>(e)]) continue;
      const NodeId v = net.link(e).other(u);
      const double nd = d + net.link(e).prop_delay_ms;
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  return dist;
}

// Unit-capacity flow network over split nodes: v_in = 2v, v_out = 2v + 1.
class SplitFlowGraph {
 public:
  explicit SplitFlowGraph(std::size_t vertices) : head_(vertices, -1) {}

  void add_arc(int from, int to, int cap, LinkId link) {
    arcs_.push_back({to, cap, head_[static_cast<std::size_t>(from)], link});
    head_[static_cast<std::size_t>(from)] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({from, 0, head_[static_cast<std::size_t>(to)], link});
    head_[static_cast<std::size_t>(to)] = static_cast<int>(arcs_.size()) - 1;
  }

  int max_flow(int source, int sink, int limit) {
    int flow = 0;
    std::vector<int> via(head_.size());
    while (flow < limit) {
      std::fill(via.begin(), via.end(), -1);
      std::deque<int> queue{source};
      via[static_cast<std::size_t>(source)] = -2;
      while (!queue.empty() && via[static_cast<std::size_t>(sink)] == -1) {
        const int u = queue.front();
        queue.pop_front();
        for (int a = head_[static_cast<std::size_t>(u)]; a != -1; a = arcs_[static_cast<std::size_t>(a)].next) {
          const auto& arc = arcs_[static_cast<std::size_t>(a)];
          if (arc.cap > 0 && via[static_cast<std::size_t>(arc.to)] == -1) {
            via[static_cast<std::size_t>(arc.to)] = a;
            queue.push_back(arc.to);
          }
        }
      }
      if (via[static_cast<std::size_t>(sink)] == -1) break;
      for (int v = sink; v != source;) {
        const int a = via[static_cast<std::size_t>(v)];
        arcs_[static_cast<std::size_t>(a)].cap -= 1;
        arcs_[static_cast<std::size_t>(a ^ 1)].cap += 1;
        v = arcs_[static_cast<std::size_t>(a ^ 1)].to;
      }
      ++flow;
    }
    return flow;
  }

  // Extracts one source->sink path along arcs carrying flow and cancels it.
  // Forward arcs have even indexes; flow on them equals the reverse capacity.
  std::optional<std::vector<int>> take_flow_path(int source, int sink) {
    std::vector<int> via(head_.size(), -1);
    std::vector<int> stack{source};
    via[static_cast<std::size_t>(source)] = -2;
    while (!stack.empty() && via[static_cast<std::size_t>(sink)] == -1) {
      const int u = stack.back();
      stack.pop_back();
      for (int a = head_[static_cast<std::size_t>(u)]; a != -1; a = arcs_[static_cast<std::size_t>(a)].next) {
        if ((a & 1) != 0) continue;
        const auto& arc = arcs_[static_cast<std::size_t>(a)];
        if (arcs_[static_cast<std::size_t>(a ^ 1)].cap > 0 && via[static_cast<std::size_t>(arc.to)] == -1) {
          via[static_cast<std::size_t>(arc.to)] = a;
          stack.push_back(arc.to);
        }
      }
    }
    if (via[static_cast<std::size_t>(sink)] == -1) return std::nullopt;
    std::vector<int> used;
    for (int v = sink; v != source;) {
      const int a = via[static_cast<std::size_t>(v)];
      used.push_back(a);
      arcs_[static_cast<std::size_t>(a ^ 1)].cap -= 1;
      v = arcs_[static_cast<std::size_t>(a ^ 1)].to;
    }
    std::reverse(used.begin(), used.end());
    return used;
  }

  [[nodiscard]] LinkId arc_link(int a) const { return arcs_[static_cast<std::size_t>(a)].link; }
  [[nodiscard]] int arc_to(int a) const { return arcs_[static_cast<std::size_t>(a)].to; }

 private:
  struct Arc {
    int to;
    int cap;
    int next;
    LinkId link;  // -1 for node-split arcs
  };
  std::vector<Arc> arcs_;
  std::vector<int> head_;
};

void sort_paths(const InfrastructureNetwork& net, std::vector<Path>& paths) {
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) keyed.emplace_back(path_delay_ms(net, paths[i]), i);
  std::sort(keyed.begin(), keyed.end(), [&paths](const auto& a, const auto& b) {
    const auto& pa = paths[a.second];
    const auto& pb = paths[b.second];
    if (pa.links.size() != pb.links.size()) return pa.links.size() < pb.links.size();
    if (a.first != b.first) return a.first < b.first;
    return pa.nodes < pb.nodes;
  });
  std::vector<Path> sorted;
  sorted.reserve(paths.size());
  for (const auto& [_, i] : keyed) sorted.push_back(std::move(paths[i]));
  paths = std::move(sorted);
}

// Exhaustive maximum family of interior-disjoint candidates (bounded search).
class DisjointPacker {
 public:
  DisjointPacker(std::vector<Path> candidates, std::size_t node_count, std::size_t upper_bound)
      : candidates_(std::move(candidates)), words_((node_count + 63) / 64), upper_(upper_bound) {
    masks_.reserve(candidates_.size());
    for (const auto& p : candidates_) {
      std::vector<std::uint64_t> mask(words_, 0);
      for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i) {
        const auto n = static_cast<std::size_t>(p.nodes[i]);
        mask[n / 64] |= (std::uint64_t{1} << (n % 64));
      }
      masks_.push_back(std::move(mask));
    }
  }

  std::vector<Path> solve(std::vector<std::size_t> seed) {
    best_ = std::move(seed);
    std::vector<std::uint64_t> used(words_, 0);
    std::vector<std::size_t> chosen;
    search(0, used, chosen);
    std::vector<Path> out;
    for (std::size_t i : best_) out.push_back(candidates_[i]);
    return out;
  }

  [[nodiscard]] const std::vector<Path>& candidates() const { return candidates_; }

 private:
  bool compatible(std::size_t i, const std::vector<std::uint64_t>& used) const {
    for (std::size_t w = 0; w < words_; ++w) {
      if ((masks_[i][w] & used[w]) != 0) return false;
    }
    return true;
  }

  void search(std::size_t from, std::vector<std::uint64_t>& used, std::vector<std::size_t>& chosen) {
    if (best_.size() >= upper_ || ++visited_ > kMaxSearchNodes) return;
    if (chosen.size() > best_.size()) best_ = chosen;
    std::size_t remaining = 0;
    for (std::size_t i = from; i < candidates_.size(); ++i) {
      if (compatible(i, used)) ++remaining;
    }
    if (chosen.size() + remaining <= best_.size()) return;
    for (std::size_t i = from; i < candidates_.size(); ++i) {
      if (!compatible(i, used)) continue;
      for (std::size_t w = 0; w < words_; ++w) used[w] ^= masks_[i][w];
      chosen.push_back(i);
      search(i + 1, used, chosen);
      chosen.pop_back();
      for (std::size_t w = 0; w < words_; ++w) used[w] ^= masks_[i][w];
      if (best_.size() >= upper_ || visited_ > kMaxSearchNodes) return;
    }
  }

  std::vector<Path> candidates_;
  std::vector<std::vector<std::uint64_t>> masks_;
  std::size_t words_;
  std::size_t upper_;
  std::vector<std::size_t> best_;
  std::size_t visited_ = 0;
};

}  // namespace

std::vector<NodeId> Path::interior() const {
  if (nodes.size() <= 2) return {};
  return {nodes.begin() + 1, nodes.end() - 1};
}

double path_delay_ms(const InfrastructureNetwork& net, const Path& path) {
  double total = 0.0;
  for (LinkId e : path.links) total += net.link(e).prop_delay_ms;
  return total;
}

bool internally_disjoint(const Path& a, const Path& b) {
  for (std::size_t i = 1; i + 1 < a.nodes.size(); ++i) {
    for (std::size_t j = 1; j + 1 < b.nodes.size(); ++j) {
      if (a.nodes[i] == b.nodes[j]) return false;
    }
  }
  for (LinkId x : a.links) {
    if (std::find(b.links.begin(), b.links.end(), x) != b.links.end()) return false;
  }
  return true;
}

std::vector<Path> find_idps(const InfrastructureNetwork& net, NodeId src, NodeId dst, const PathQuery& query) {
  if (src == dst) throw std::invalid_argument("find_idps needs distinct endpoints");
  if (query.max_hops < 1) throw std::invalid_argument("max_hops must be at least 1");
  if (query.bw_required < 0.0) throw std::invalid_argument("negative bandwidth requirement");
  (void)net.node(src);
  (void)net.node(dst);

  const std::size_t n = net.node_count();
  const int k = query.max_hops;
  std::vector<char> usable(net.link_count(), 0);
  for (std::size_t e = 0; e < net.link_count(); ++e) {
    usable[e] = edge_usable(net, static_cast<LinkId>(e), query.bw_required, query.pool) ? 1 : 0;
  }
  const auto ds = hop_distances(net, src, usable);
  const auto dt = hop_distances(net, dst, usable);
  if (ds[static_cast<std::size_t>(dst)] > k) return {};

  const bool has_budget = query.latency_budget_s.has_value();
  const double budget_ms = has_budget ? *query.latency_budget_s * 1000.0 : kFar;
  if (has_budget && budget_ms < 0.0) return {};
  std::vector<double> ls;
  std::vector<double> lt;
  if (has_budget) {
    ls = delay_distances(net, src, usable);
    lt = delay_distances(net, dst, usable);
    if (ls[static_cast<std::size_t>(dst)] > budget_ms + 1e-9) return {};
  }

  // An edge can sit on a qualifying path only if some orientation of it fits
  // both the hop bound and the delay budget.
  auto edge_in_scope = [&](LinkId e) {
    const auto& l = net.link(e);
    const auto u = static_cast<std::size_t>(l.u);
    const auto v = static_cast<std::size_t>(l.v);
    const bool hops_ok = std::min(ds[u] + dt[v], ds[v] + dt[u]) + 1 <= k;
    if (!hops_ok) return false;
    if (!has_budget) return true;
    return std::min(ls[u] + lt[v], ls[v] + lt[u]) + l.prop_delay_ms <= budget_ms + 1e-9;
  };

  SplitFlowGraph graph(2 * n);
  auto in = [](NodeId v) { return 2 * static_cast<int>(v); };
  auto out = [](NodeId v) { return 2 * static_cast<int>(v) + 1; };
  std::vector<char> node_in_scope(n, 0);
  std::vector<LinkId> scoped_links;
  for (std::size_t e = 0; e < net.link_count(); ++e) {
    const auto id = static_cast<LinkId>(e);
    if (!usable[e] || !edge_in_scope(id)) continue;
    scoped_links.push_back(id);
    const auto& l = net.link(id);
    node_in_scope[static_cast<std::size_t>(l.u)] = 1;
    node_in_scope[static_cast<std::size_t>(l.v)] = 1;
    if (l.v != src && l.u != dst) graph.add_arc(out(l.u), in(l.v), 1, id);
    if (l.u != src && l.v != dst) graph.add_arc(out(l.v), in(l.u), 1, id);
  }
  for (std::size_t v = 0; v < n; ++v) {
    const auto id = static_cast<NodeId>(v);
    if (node_in_scope[v] && id != src && id != dst) graph.add_arc(in(id), out(id), 1, -1);
  }
  const int limit = static_cast<int>(std::min(net.degree(src), net.degree(dst)));
  const int flow = graph.max_flow(out(src), in(dst), limit);
  if (flow == 0) return {};

  std::vector<Path> kept;
  for (int f = 0; f < flow; ++f) {
    auto arcs = graph.take_flow_path(out(src), in(dst));
    if (!arcs) break;
    Path p;
    p.nodes.push_back(src);
    for (int a : *arcs) {
      const LinkId e = graph.arc_link(a);
      if (e < 0) continue;
      p.links.push_back(e);
      p.nodes.push_back(static_cast<NodeId>(graph.arc_to(a) / 2));
    }
    const bool short_enough = static_cast<int>(p.hops()) <= k;
    const bool fast_enough = !has_budget || path_delay_ms(net, p) <= budget_ms + 1e-9;
    if (short_enough && fast_enough) kept.push_back(std::move(p));
  }

  if (static_cast<int>(kept.size()) < flow) {
    // The bound cut part of the decomposition: search the bounded path space.
    std::vector<Path> candidates;
    std::vector<char> on_path(n, 0);
    Path current;
    current.nodes.push_back(src);
    on_path[static_cast<std::size_t>(src)] = 1;
    std::vector<char> link_scoped(net.link_count(), 0);
    for (LinkId e : scoped_links) link_scoped[static_cast<std::size_t>(e)] = 1;
    bool truncated = false;
    std::function<void(NodeId, double)> dfs = [&](NodeId u, double delay) {
      if (candidates.size() >= kMaxCandidatePaths) {
        truncated = true;
        return;
      }
      for (LinkId e : net.incident(u)) {
        if (!link_scoped[static_cast<std::size_t>(e)]) continue;
        const NodeId v = net.link(e).other(u);
        if (on_path[static_cast<std::size_t>(v)]) continue;
        const auto hops = static_cast<int>(current.links.size()) + 1;
        if (hops + dt[static_cast<std::size_t>(v)] > k) continue;
        const double nd = delay + net.link(e).prop_delay_ms;
        if (has_budget && nd + lt[static_cast<std::size_t>(v)] > budget_ms + 1e-9) continue;
        current.nodes.push_back(v);
        current.links.push_back(e);
        if (v == dst) {
          candidates.push_back(current);
        } else {
          on_path[static_cast<std::size_t>(v)] = 1;
          dfs(v, nd);
          on_path[static_cast<std::size_t>(v)] = 0;
        }
        current.nodes.pop_back();
        current.links.pop_back();
      }
    };
    dfs(src, 0.0);
    (void)truncated;
    sort_paths(net, candidates);
    // Seed the search with the decomposition survivors.
    std::vector<std::size_t> seed;
    for (const auto& p : kept) {
      const auto it = std::find(candidates.begin(), candidates.end(), p);
      if (it != candidates.end()) seed.push_back(static_cast<std::size_t>(it - candidates.begin()));
    }
    if (seed.size() != kept.size()) seed.clear();
    DisjointPacker packer(std::move(candidates), n, static_cast<std::size_t>(flow));
    auto packed = packer.solve(std::move(seed));
    if (packed.size() > kept.size()) kept = std::move(packed);
  }
  sort_paths(net, kept);
  return kept;
}

std::optional<Path> shortest_feasible_path(const InfrastructureNetwork& net, NodeId src, NodeId dst,
                                           double bw_required, Pool pool, PathMetric metric,
                                           std::optional<double> latency_budget_s) {
  if (src == dst) return Path{{src}, {}};
  const std::size_t n = net.node_count();
  // Lexicographic (metric, secondary) with hop count or delay as primary.
  std::vector<double> primary(n, kFar);
  std::vector<double> secondary(n, kFar);
  std::vector<LinkId> via(n, -1);
  using Item = std::tuple<double, double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  primary[static_cast<std::size_t>(src)] = 0.0;
  secondary[static_cast<std::size_t>(src)] = 0.0;
  heap.emplace(0.0, 0.0, src);
  while (!heap.empty()) {
    const auto [p, s, u] = heap.top();
    heap.pop();
    if (p > primary[static_cast<std::size_t>(u)] ||
        (p == primary[static_cast<std::size_t>(u)] && s > secondary[static_cast<std::size_t>(u)])) {
      continue;
    }
    if (u == dst) break;
    for (LinkId e : net.incident(u)) {
      if (!edge_usable(net, e, bw_required, pool)) continue;
      const NodeId v = net.link(e).other(u);
      const double delay = net.link(e).prop_delay_ms;
      const double np = p + (metric == PathMetric::kHops ? 1.0 : delay);
      const double ns = s + (metric == PathMetric::kHops ? delay : 1.0);
      auto& bp = primary[static_cast<std::size_t>(v)];
      auto& bs = secondary[static_cast<std::size_t>(v)];
      if (np < bp || (np == bp && ns < bs)) {
        bp = np;
        bs = ns;
        via[static_cast<std::size_t>(v)] = e;
        heap.emplace(np, ns, v);
      }
    }
  }
  if (via[static_cast<std::size_t>(dst)] == -1) return std::nullopt;
  Path path;
  for (NodeId v = dst; v != src;) {
    const LinkId e = via[static_cast<std::size_t>(v)];
    path.nodes.push_back(v);
    path.links.push_back(e);
    v = net.link(e).other(v);
  }
  path.nodes.push_back(src);
  std::reverse(path.nodes.begin(), path.nodes.end());
  std::reverse(path.links.begin(), path.links.end());
  if (latency_budget_s && path_delay_ms(net, path) > *latency_budget_s * 1000.0 + 1e-9) return std::nullopt;
  return path;
}

bool path_feasible(const InfrastructureNetwork& net, const Path& path, double bw_required, Pool pool,
                   double deadline_s, double data_volume, double bw_demand, double child_proc_latency_ms) {
  for (LinkId e : path.links) {
    if (!edge_usable(net, e, bw_required, pool)) return false;
  }
  MicroserviceLink probe;
  probe.data_volume = data_volume;
  probe.bw_demand = bw_demand;
  const double delay = path_delay_ms(net, path);
  return link_latency_s(probe, std::span<const double>(&delay, 1), child_proc_latency_ms) <= deadline_s;
}

}  // namespace msplace
