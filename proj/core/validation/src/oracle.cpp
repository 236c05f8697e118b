#include "msplace/validation/oracle.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace msplace::validation {

namespace {

std::set<NodeId> interior_nodes(const Path& p) {
  std::set<NodeId> out;
  for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i) out.insert(p.nodes[i]);
  return out;
}

bool share_interior(const Path& a, const Path& b) {
  const auto ia = interior_nodes(a);
  for (NodeId n : interior_nodes(b)) {
    if (ia.contains(n)) return true;
  }
  const std::set<LinkId> la(a.links.begin(), a.links.end());
  return std::any_of(b.links.begin(), b.links.end(), [&](LinkId e) { return la.contains(e); });
}

}  // namespace

std::vector<Path> enumerate_simple_paths(const InfrastructureNetwork& net, NodeId src, NodeId dst, int hops) {
  std::vector<Path> out;
  if (src == dst || hops < 1) return out;
  Path cur{{src}, {}};
  std::vector<char> seen(net.node_count(), 0);
  seen[static_cast<std::size_t>(src)] = 1;
  std::function<void(NodeId)> dfs = [&](NodeId u) {
    if (static_cast<int>(cur.links.size()) == hops) {
      if (u == dst) out.push_back(cur);
      return;
    }
    if (u == dst) return;
    for (std::size_t e = 0; e < net.link_count(); ++e) {
      const auto& l = net.link(static_cast<LinkId>(e));
      if (l.u != u && l.v != u) continue;
      const NodeId w = l.other(u);
      if (seen[static_cast<std::size_t>(w)]) continue;
      seen[static_cast<std::size_t>(w)] = 1;
      cur.nodes.push_back(w);
      cur.links.push_back(static_cast<LinkId>(e));
      dfs(w);
      cur.nodes.pop_back();
      cur.links.pop_back();
      seen[static_cast<std::size_t>(w)] = 0;
    }
  };
  dfs(src);
  return out;
}

std::vector<Path> greedy_path_family(const InfrastructureNetwork& net, NodeId src, NodeId dst, int k) {
  std::vector<Path> family;
  for (int len = 1; len <= k; ++len) {
    const auto cls = enumerate_simple_paths(net, src, dst, len);
    bool clash = false;
    for (const auto& p : family) {
      for (const auto& q : cls) clash = clash || share_interior(p, q);
    }
    if (!clash) family.insert(family.end(), cls.begin(), cls.end());
  }
  return family;
}

double brute_force_reliability(const InfrastructureNetwork& net, NodeId src, NodeId dst, int k,
                               const CriticalNodeSet* critical) {
  if (src == dst) return 1.0;
  double fail = 1.0;
  for (const auto& p : greedy_path_family(net, src, dst, k)) {
    double r = 1.0;
    for (NodeId n : interior_nodes(p)) {
      if (critical == nullptr || !critical->contains(n)) r *= node_reliability(net.node(n));
    }
    for (LinkId e : p.links) r *= link_reliability(net.link(e));
    fail *= 1.0 - r;
  }
  return 1.0 - fail;
}

int max_disjoint_path_count(const InfrastructureNetwork& net, NodeId src, NodeId dst, int k, double bw, Pool pool) {
  std::vector<Path> all;
  for (int len = 1; len <= k; ++len) {
    for (auto& p : enumerate_simple_paths(net, src, dst, len)) {
      const bool fits = std::all_of(p.links.begin(), p.links.end(),
                                    [&](LinkId e) { return net.residual_bandwidth(e, pool) >= bw; });
      if (fits) all.push_back(std::move(p));
    }
  }
  int best = 0;
  std::vector<const Path*> chosen;
  std::function<void(std::size_t)> search = [&](std::size_t from) {
    best = std::max(best, static_cast<int>(chosen.size()));
    for (std::size_t i = from; i < all.size(); ++i) {
      const bool ok = std::none_of(chosen.begin(), chosen.end(),
                                   [&](const Path* q) { return share_interior(*q, all[i]); });
      if (!ok) continue;
      chosen.push_back(&all[i]);
      search(i + 1);
      chosen.pop_back();
    }
  };
  search(0);
  return best;
}

}  // namespace msplace::validation
