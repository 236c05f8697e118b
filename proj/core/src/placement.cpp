#include "msplace/placement.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace msplace {

namespace {

constexpr double kEps = 1e-9;

enum class Routing { kMultipath, kFewestHops, kLowestLatency };

struct Ctx {
  InfrastructureNetwork& net;
  const ServiceRequest& req;
  PlacementState& state;
  const PlacementConfig& cfg;
  std::span<const ActivePlacement> active;
  bool sprc = false;

  [[nodiscard]] ReliabilityOptions options() const {
    ReliabilityOptions o = cfg.reliability;
    o.apply_contention = o.apply_contention || sprc;
    return o;
  }
};

double transfer_seconds(const MicroserviceLink& link) {
  if (link.data_volume <= 0.0) return 0.0;
  return link.bw_demand > 0.0 ? link.data_volume / link.bw_demand : std::numeric_limits<double>::infinity();
}

void release_route(InfrastructureNetwork& net, const InstanceLinkRoute& r) {
  if (r.bw_reserved <= 0.0) return;
  for (const auto& p : r.paths) {
    for (LinkId e : p.links) net.release_bandwidth(e, r.bw_reserved, r.pool);
  }
}

bool route_link(Ctx& ctx, int l, int child_instance, int parent_instance, NodeId parent_node, NodeId child_node,
                Routing routing) {
  const auto& link = ctx.req.links[static_cast<std::size_t>(l)];
  const auto& child = ctx.req.microservices[static_cast<std::size_t>(link.child)];
  const double budget = link.deadline_s - transfer_seconds(link) - child.proc_latency_ms / 1000.0;
  if (budget < -kEps) return false;

  InstanceLinkRoute route;
  route.link = l;
  route.child_instance = child_instance;
  route.parent_instance = parent_instance;
  route.pool = route_pool(ctx.state.mechanism, child_instance, parent_instance);
  if (parent_node == child_node) {
    route.paths.push_back(Path{{parent_node}, {}});
    route.bw_reserved = 0.0;
    ctx.state.routes.push_back(std::move(route));
    return true;
  }
  route.bw_reserved = link.bw_demand;
  if (routing == Routing::kMultipath) {
    route.paths = find_idps(ctx.net, parent_node, child_node,
                            PathQuery{ctx.cfg.max_hops, link.bw_demand, route.pool, std::max(budget, 0.0)});
  } else {
    const PathMetric metric = routing == Routing::kFewestHops ? PathMetric::kHops : PathMetric::kLatency;
    auto p = shortest_feasible_path(ctx.net, parent_node, child_node, link.bw_demand, route.pool, metric,
                                    std::max(budget, 0.0));
    if (p) route.paths.push_back(std::move(*p));
  }
  if (route.paths.empty()) return false;
  if (ctx.sprc && route.pool == Pool::kShared) {
    route.contention_factor = sprc_path_factors(ctx.net, route.paths, link.bw_demand, ctx.req, ctx.state,
                                                ctx.active, ctx.cfg.literal_sprc);
  }
  if (route.bw_reserved > 0.0) {
    for (const auto& p : route.paths) {
      for (LinkId e : p.links) ctx.net.allocate_bandwidth(e, route.bw_reserved, route.pool);
    }
  }
  ctx.state.routes.push_back(std::move(route));
  return true;
}

void detach_last_instance(Ctx& ctx, int m) {
  auto& list = ctx.state.instances[static_cast<std::size_t>(m)];
  const int b = static_cast<int>(list.size()) - 1;
  auto& routes = ctx.state.routes;
  for (auto it = routes.begin(); it != routes.end();) {
    const auto& link = ctx.req.links[static_cast<std::size_t>(it->link)];
    const bool touches =
        (link.child == m && it->child_instance == b) || (link.parent == m && it->parent_instance == b);
    if (touches) {
      release_route(ctx.net, *it);
      it = routes.erase(it);
    } else {
      ++it;
    }
  }
  ctx.net.release_cpu(list.back().node, ctx.req.microservices[static_cast<std::size_t>(m)].cpu_demand);
  list.pop_back();
}

// Reserves CPU on `node` for a new instance of m and routes its links to every
// instance of each parent and each child. Each parent microservice must be
// reachable from the new instance, and a primary must reach every parent
// primary. On failure nothing is left reserved.
bool attach_instance(Ctx& ctx, int m, NodeId node, Routing routing) {
  const auto& ms = ctx.req.microservices[static_cast<std::size_t>(m)];
  if (ctx.net.residual_cpu(node) + kEps < ms.cpu_demand) return false;
  ctx.net.allocate_cpu(node, ms.cpu_demand);
  const int b = ctx.state.instance_count(m);
  ctx.state.instances[static_cast<std::size_t>(m)].push_back(InstanceRecord{node, 1.0, 1.0});

  bool ok = true;
  for (int l : ctx.req.parent_links(m)) {
    const int parent = ctx.req.links[static_cast<std::size_t>(l)].parent;
    int routed = 0;
    for (int pb = 0; pb < ctx.state.instance_count(parent); ++pb) {
      const NodeId pn = ctx.state.instances[static_cast<std::size_t>(parent)][static_cast<std::size_t>(pb)].node;
      if (route_link(ctx, l, b, pb, pn, node, routing)) {
        ++routed;
      } else if (b == 0 && pb == 0) {
        ok = false;
        break;
      }
    }
    if (!ok || routed == 0) {
      ok = false;
      break;
    }
  }
  if (ok) {
    for (int l : ctx.req.child_links(m)) {
      const int child = ctx.req.links[static_cast<std::size_t>(l)].child;
      for (int cb = 0; cb < ctx.state.instance_count(child); ++cb) {
        const NodeId cn = ctx.state.instances[static_cast<std::size_t>(child)][static_cast<std::size_t>(cb)].node;
        (void)route_link(ctx, l, cb, b, node, cn, routing);
      }
    }
  }
  if (!ok) detach_last_instance(ctx, m);
  return ok;
}

void record_sigma(Ctx& ctx, int m) {
  const auto opts = ctx.options();
  const CriticalNodeSet critical = critical_nodes(ctx.req, ctx.state);
  const int b = ctx.state.instance_count(m) - 1;
  auto& rec = ctx.state.instances[static_cast<std::size_t>(m)][static_cast<std::size_t>(b)];
  rec.instance_sigma = instance_reliability(ctx.net, ctx.req, ctx.state, m, b, critical, opts);
  rec.microservice_sigma = microservice_reliability(ctx.net, ctx.req, ctx.state, m, critical, opts);
}

void undo_microservice(Ctx& ctx, int m) {
  while (ctx.state.instance_count(m) > 0) detach_last_instance(ctx, m);
}

bool hosts_instance_of(const PlacementState& state, int m, NodeId node) {
  const auto& list = state.instances[static_cast<std::size_t>(m)];
  return std::any_of(list.begin(), list.end(), [node](const InstanceRecord& r) { return r.node == node; });
}

double literal_score(Ctx& ctx, int m, NodeId node, bool was_critical, double r_before) {
  const int b = ctx.state.instance_count(m) - 1;
  const CriticalNodeSet critical = critical_nodes(ctx.req, ctx.state);
  const auto opts = ctx.options();
  double rf = 1.0;
  for (int l : ctx.req.parent_links(m)) {
    double rb = 0.0;
    for (const auto& r : ctx.state.routes) {
      if (r.link == l && r.child_instance == b) rb = op_plus(rb, route_reliability(ctx.net, r, critical, opts));
    }
    rf *= rb;
  }
  const double r_after = ctx.net.node_reliability(node);
  return was_critical ? rf * r_after / r_before : rf * r_after;
}

bool place_one(Ctx& ctx, int m) {
  const auto& ms = ctx.req.microservices[static_cast<std::size_t>(m)];
  const auto& blacklist = ctx.state.blacklist[static_cast<std::size_t>(m)];
  const CriticalNodeSet critical_before = critical_nodes(ctx.req, ctx.state);
  double best = 0.0;
  std::optional<NodeId> best_node;
  for (std::size_t j = 0; j < ctx.net.node_count(); ++j) {
    const auto node = static_cast<NodeId>(j);
    if (blacklist.contains(node) || hosts_instance_of(ctx.state, m, node)) continue;
    if (ctx.net.residual_cpu(node) + kEps < ms.cpu_demand) continue;
    const double r_before = ctx.net.node_reliability(node);
    if (!attach_instance(ctx, m, node, Routing::kMultipath)) continue;
    double score = 0.0;
    if (ctx.cfg.score_mode == ScoreMode::kServiceModel) {
      score = partial_service_reliability(ctx.net, ctx.req, ctx.state, ctx.options());
      // Critical nodes are already inside the product; for any other host the
      // load-induced change of its reliability still counts.
      if (!critical_nodes(ctx.req, ctx.state).contains(node)) score *= ctx.net.node_reliability(node) / r_before;
    } else {
      score = literal_score(ctx, m, node, critical_before.contains(node), r_before);
    }
    detach_last_instance(ctx, m);
    if (best < score) {
      best = score;
      best_node = node;
    }
  }
  if (!best_node) return false;
  if (!attach_instance(ctx, m, *best_node, Routing::kMultipath)) return false;
  record_sigma(ctx, m);
  return true;
}

void backups(Ctx& ctx) {
  std::set<int> candidates;
  for (int m = 1; m <= ctx.req.size(); ++m) candidates.insert(m);
  int placed = 0;
  while (placed < ctx.req.backup_limit && !candidates.empty()) {
    std::optional<int> m_min;
    double r_min = 1.0;
    for (int m : candidates) {
      const double sigma = ctx.state.instances[static_cast<std::size_t>(m)].back().microservice_sigma;
      if (r_min > sigma) {
        r_min = sigma;
        m_min = m;
      }
    }
    if (!m_min) break;
    if (!place_one(ctx, *m_min)) {
      candidates.erase(*m_min);
      continue;
    }
    ++placed;
  }
}

PlacementOutcome finish(Ctx& ctx, bool success, std::string reason) {
  PlacementOutcome out;
  if (!success) {
    release_placement(ctx.net, ctx.req, ctx.state);
    out.reason = std::move(reason);
    out.state = initial_state(ctx.req, ctx.state.mechanism);
    out.state.backtrack_count = ctx.state.backtrack_count;
    return out;
  }
  out.success = true;
  out.reliability = service_reliability(ctx.net, ctx.req, ctx.state, ctx.options());
  out.state = ctx.state;
  return out;
}

PlacementOutcome srp_common(InfrastructureNetwork& net, const ServiceRequest& request, const PlacementConfig& config,
                            Mechanism mechanism, bool sprc, std::span<const ActivePlacement> active) {
  request.validate();
  PlacementState state = initial_state(request, mechanism);
  Ctx ctx{net, request, state, config, active, sprc};
  const std::vector<int> queue = request.bfs_order();
  while (true) {
    auto next = std::find_if(queue.begin(), queue.end(), [&](int m) { return !state.is_placed(m); });
    if (next == queue.end()) break;
    const int m = *next;
    if (place_one(ctx, m)) continue;
    if (m == 1 || state.backtrack_count >= config.backtrack_limit) {
      return finish(ctx, false, m == 1 ? "root microservice could not be placed" : "backtrack limit reached");
    }
    // Undo the parents of m together with everything placed below them.
    std::set<int> undo;
    std::vector<int> frontier;
    for (int p : request.parents(m)) {
      if (p == 0 || !state.is_placed(p)) continue;
      state.blacklist[static_cast<std::size_t>(p)].insert(state.instances[static_cast<std::size_t>(p)][0].node);
      if (undo.insert(p).second) frontier.push_back(p);
    }
    while (!frontier.empty()) {
      const int u = frontier.back();
      frontier.pop_back();
      for (int c : request.children(u)) {
        if (state.is_placed(c) && undo.insert(c).second) frontier.push_back(c);
      }
    }
    for (auto it = queue.rbegin(); it != queue.rend(); ++it) {
      if (undo.contains(*it)) undo_microservice(ctx, *it);
    }
    ++state.backtrack_count;
  }
  backups(ctx);
  return finish(ctx, true, {});
}

// Candidate nodes for a new instance of m ranked by reliability (current, or
// after adding the instance), highest first, ties by node index. Backups avoid
// nodes that already host m.
std::vector<NodeId> ranked_nodes(const Ctx& ctx, int m, bool after_placement) {
  const auto& ms = ctx.req.microservices[static_cast<std::size_t>(m)];
  std::set<NodeId> hosting;
  for (const auto& rec : ctx.state.instances[static_cast<std::size_t>(m)]) hosting.insert(rec.node);
  std::vector<std::pair<double, NodeId>> scored;
  for (std::size_t j = 0; j < ctx.net.node_count(); ++j) {
    const auto node = static_cast<NodeId>(j);
    if (hosting.contains(node)) continue;
    if (ctx.net.residual_cpu(node) + kEps < ms.cpu_demand) continue;
    const double r = after_placement ? ctx.net.node_reliability_after(node, ms.cpu_demand)
                                     : ctx.net.node_reliability(node);
    scored.emplace_back(r, node);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<NodeId> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.second);
  return out;
}

bool greedy_instance(Ctx& ctx, int m, Routing routing, bool after_placement) {
  for (NodeId node : ranked_nodes(ctx, m, after_placement)) {
    if (attach_instance(ctx, m, node, routing)) {
      record_sigma(ctx, m);
      return true;
    }
  }
  return false;
}

void round_robin_backups(Ctx& ctx, const std::vector<int>& order, Routing routing, bool after_placement) {
  int placed = 0;
  while (placed < ctx.req.backup_limit) {
    bool progress = false;
    for (int m : order) {
      if (placed >= ctx.req.backup_limit) break;
      if (greedy_instance(ctx, m, routing, after_placement)) {
        ++placed;
        progress = true;
      }
    }
    if (!progress) break;
  }
}

std::vector<int> index_order(const ServiceRequest& req) {
  std::vector<int> order;
  for (int m = 1; m <= req.size(); ++m) order.push_back(m);
  return order;
}

PlacementOutcome greedy_common(InfrastructureNetwork& net, const ServiceRequest& request,
                               const PlacementConfig& config, Routing routing, bool with_backups) {
  request.validate();
  PlacementState state = initial_state(request, config.mechanism);
  Ctx ctx{net, request, state, config, {}, false};
  for (int m : request.bfs_order()) {
    if (!greedy_instance(ctx, m, routing, false)) return finish(ctx, false, "no feasible node for a microservice");
  }
  if (with_backups) round_robin_backups(ctx, index_order(request), routing, false);
  return finish(ctx, true, {});
}

}  // namespace

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kSrp: return "SRP";
    case Algorithm::kSrpS: return "SRP-S";
    case Algorithm::kDaip: return "DAIP";
    case Algorithm::kRrsp: return "RRSP";
    case Algorithm::kGrd: return "Grd";
    case Algorithm::kGrdB: return "Grd-B";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (Algorithm a : {Algorithm::kSrp, Algorithm::kSrpS, Algorithm::kDaip, Algorithm::kRrsp, Algorithm::kGrd,
                      Algorithm::kGrdB}) {
    std::string n;
    for (char c : algorithm_name(a)) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (n == lower) return a;
  }
  return std::nullopt;
}

Pool route_pool(Mechanism mechanism, int child_instance, int parent_instance) {
  if (mechanism == Mechanism::kShared && (child_instance != 0 || parent_instance != 0)) return Pool::kShared;
  return Pool::kProtected;
}

PlacementState initial_state(const ServiceRequest& request, Mechanism mechanism) {
  PlacementState state;
  state.mechanism = mechanism;
  state.instances.assign(static_cast<std::size_t>(request.size() + 1), {});
  state.instances[0].push_back(InstanceRecord{request.access_node, 1.0, 1.0});
  state.blacklist.assign(static_cast<std::size_t>(request.size() + 1), {});
  return state;
}

PlacementOutcome place_request(Algorithm algorithm, InfrastructureNetwork& net, const ServiceRequest& request,
                               const PlacementConfig& config, std::span<const ActivePlacement> active) {
  switch (algorithm) {
    case Algorithm::kSrp: return srp_place(net, request, config, active);
    case Algorithm::kSrpS: return srp_s_place(net, request, config, active);
    case Algorithm::kDaip: return daip_place(net, request, config);
    case Algorithm::kRrsp: return rrsp_place(net, request, config);
    case Algorithm::kGrd: return grd_place(net, request, config);
    case Algorithm::kGrdB: return grd_b_place(net, request, config);
  }
  throw std::invalid_argument("unknown algorithm");
}

PlacementOutcome srp_place(InfrastructureNetwork& net, const ServiceRequest& request, const PlacementConfig& config,
                           std::span<const ActivePlacement> active) {
  return srp_common(net, request, config, config.mechanism, false, active);
}

PlacementOutcome srp_s_place(InfrastructureNetwork& net, const ServiceRequest& request, const PlacementConfig& config,
                             std::span<const ActivePlacement> active) {
  return srp_common(net, request, config, Mechanism::kShared, true, active);
}

PlacementOutcome daip_place(InfrastructureNetwork& net, const ServiceRequest& request, const PlacementConfig& config) {
  return greedy_common(net, request, config, Routing::kLowestLatency, true);
}

PlacementOutcome grd_place(InfrastructureNetwork& net, const ServiceRequest& request, const PlacementConfig& config) {
  return greedy_common(net, request, config, Routing::kFewestHops, false);
}

PlacementOutcome grd_b_place(InfrastructureNetwork& net, const ServiceRequest& request, const PlacementConfig& config) {
  return greedy_common(net, request, config, Routing::kFewestHops, true);
}

PlacementOutcome rrsp_place(InfrastructureNetwork& net, const ServiceRequest& request, const PlacementConfig& config) {
  request.validate();
  PlacementState state = initial_state(request, config.mechanism);
  Ctx ctx{net, request, state, config, {}, false};
  std::mt19937_64 rng(config.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(request.id + 1)));

  // Random full assignments scored by the product of post-placement node
  // reliabilities over the nodes they use.
  struct Candidate {
    double score;
    std::vector<NodeId> nodes;  // indexed by microservice
  };
  std::vector<Candidate> pool;
  const int count = request.size();
  for (int t = 0; t < std::max(config.rrsp_candidates, 1); ++t) {
    std::map<NodeId, double> extra;
    std::vector<NodeId> nodes(static_cast<std::size_t>(count + 1), request.access_node);
    bool valid = true;
    for (int m = 1; m <= count && valid; ++m) {
      const double demand = request.microservices[static_cast<std::size_t>(m)].cpu_demand;
      std::vector<NodeId> feasible;
      for (std::size_t j = 0; j < net.node_count(); ++j) {
        const auto node = static_cast<NodeId>(j);
        if (net.residual_cpu(node) - extra[node] + kEps >= demand) feasible.push_back(node);
      }
      if (feasible.empty()) {
        valid = false;
        break;
      }
      const NodeId pick =
          feasible[std::uniform_int_distribution<std::size_t>(0, feasible.size() - 1)(rng)];
      nodes[static_cast<std::size_t>(m)] = pick;
      extra[pick] += demand;
    }
    if (!valid) continue;
    double score = 1.0;
    for (const auto& [node, add] : extra) score *= net.node_reliability_after(node, add);
    pool.push_back(Candidate{score, std::move(nodes)});
  }
  std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

  bool placed = false;
  for (const auto& cand : pool) {
    bool ok = true;
    for (int m : request.bfs_order()) {
      if (!attach_instance(ctx, m, cand.nodes[static_cast<std::size_t>(m)], Routing::kFewestHops)) {
        ok = false;
        break;
      }
      record_sigma(ctx, m);
    }
    if (ok) {
      placed = true;
      break;
    }
    const auto order = request.bfs_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) undo_microservice(ctx, *it);
  }
  if (!placed) return finish(ctx, false, "no random candidate solution could be routed");

  // Backups by descending degree in the dependency graph.
  std::vector<int> order = index_order(request);
  auto degree = [&](int m) { return request.parent_links(m).size() + request.child_links(m).size(); };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return degree(a) > degree(b); });
  round_robin_backups(ctx, order, Routing::kFewestHops, true);
  return finish(ctx, true, {});
}

bool place_one_microservice(InfrastructureNetwork& net, const ServiceRequest& request, int m, PlacementState& state,
                            const PlacementConfig& config, bool use_sprc, std::span<const ActivePlacement> active) {
  if (m < 1 || m > request.size()) throw std::out_of_range("microservice index out of range");
  for (int p : request.parents(m)) {
    if (!state.is_placed(p)) throw std::logic_error("parents must be placed first");
  }
  Ctx ctx{net, request, state, config, active, use_sprc};
  return place_one(ctx, m);
}

void backup_placement(InfrastructureNetwork& net, const ServiceRequest& request, PlacementState& state,
                      const PlacementConfig& config, bool use_sprc, std::span<const ActivePlacement> active) {
  Ctx ctx{net, request, state, config, active, use_sprc};
  backups(ctx);
}

std::vector<double> sprc_path_factors(const InfrastructureNetwork& net, std::span<const Path> paths, double bw_demand,
                                      const ServiceRequest& own_request, const PlacementState& own_state,
                                      std::span<const ActivePlacement> active, bool literal) {
  std::vector<double> factors;
  factors.reserve(paths.size());
  for (const Path& p : paths) {
    const std::set<LinkId> edges(p.links.begin(), p.links.end());
    // (service, microservice, instance) -> inactivation probability
    std::map<std::tuple<int, int, int>, double> contenders;
    auto scan = [&](const ServiceRequest& req, const PlacementState& st) {
      for (const auto& r : st.routes) {
        if (r.pool != Pool::kShared || r.bw_reserved <= 0.0) continue;
        const auto& link = req.links[static_cast<std::size_t>(r.link)];
        const bool child_side = r.child_instance > 0;
        const int ms = child_side ? link.child : link.parent;
        const int inst = child_side ? r.child_instance : r.parent_instance;
        bool contended = false;
        for (const auto& q : r.paths) {
          for (LinkId e : q.links) {
            if (!edges.contains(e)) continue;
            const auto& pl = net.link(e);
            if (pl.bw_capacity < pl.bw_protected + r.bw_reserved + bw_demand) contended = true;
          }
        }
        if (!contended) continue;
        double all_lower_fail = 1.0;
        const auto& list = st.instances[static_cast<std::size_t>(ms)];
        for (int b = 0; b < inst && b < static_cast<int>(list.size()); ++b) {
          all_lower_fail *= 1.0 - list[static_cast<std::size_t>(b)].instance_sigma;
        }
        contenders[{req.id, ms, inst}] = 1.0 - all_lower_fail;
      }
    };
    scan(own_request, own_state);
    for (const auto& a : active) {
      if (a.request.id == own_request.id) continue;
      scan(a.request, a.state);
    }
    double acc = 0.0;
    for (const auto& [key, inactive] : contenders) acc += literal ? inactive : 1.0 - inactive;
    factors.push_back(literal ? std::clamp(acc, 0.0, 1.0) : std::clamp(1.0 - acc, 0.0, 1.0));
  }
  return factors;
}

double sprc_path_reliability(const InfrastructureNetwork& net, std::span<const Path> paths, double bw_demand,
                             const ServiceRequest& own_request, const PlacementState& own_state,
                             std::span<const ActivePlacement> active, const CriticalNodeSet& critical, bool literal) {
  const auto factors = sprc_path_factors(net, paths, bw_demand, own_request, own_state, active, literal);
  double fail = 1.0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].is_local()) return 1.0;
    fail *= 1.0 - factors[i] * stripped_path_reliability(net, paths[i], &critical);
  }
  return 1.0 - fail;
}

void release_placement(InfrastructureNetwork& net, const ServiceRequest& request, const PlacementState& state) {
  for (const auto& r : state.routes) release_route(net, r);
  for (std::size_t m = 1; m < state.instances.size(); ++m) {
    for (const auto& rec : state.instances[m]) net.release_cpu(rec.node, request.microservices[m].cpu_demand);
  }
}

std::vector<std::string> audit_placement(const InfrastructureNetwork& net, const ServiceRequest& request,
                                         const PlacementState& state) {
  std::vector<std::string> issues;
  auto add = [&issues](const std::string& s) { issues.push_back(s); };
  const auto node_count = static_cast<NodeId>(net.node_count());

  for (std::size_t i = 0; i < net.node_count(); ++i) {
    const auto& n = net.node(static_cast<NodeId>(i));
    if (n.cpu_allocated > n.cpu_capacity + kEps || n.cpu_allocated < -kEps) {
      add("cpu capacity exceeded on node " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < net.link_count(); ++i) {
    const auto id = static_cast<LinkId>(i);
    const auto& l = net.link(id);
    if (l.bw_protected > l.bw_capacity + kEps || l.bw_protected < -kEps) {
      add("protected bandwidth exceeded on link " + std::to_string(i));
    }
    if (l.bw_shared > net.pool_capacity(id, Pool::kShared) + kEps || l.bw_shared < -kEps) {
      add("shared bandwidth exceeded on link " + std::to_string(i));
    }
  }
  if (static_cast<int>(state.instances.size()) != request.size() + 1) {
    add("instance table does not match the request");
    return issues;
  }
  if (state.instances[0].size() != 1 || state.instances[0][0].node != request.access_node) {
    add("access microservice is not pinned to the access node");
  }
  int backups = 0;
  for (int m = 1; m <= request.size(); ++m) {
    const auto& list = state.instances[static_cast<std::size_t>(m)];
    if (list.empty()) add("microservice " + std::to_string(m) + " has no instance");
    backups += std::max(0, static_cast<int>(list.size()) - 1);
    for (const auto& rec : list) {
      if (rec.node < 0 || rec.node >= node_count) add("instance on unknown node");
    }
  }
  if (request.backup_limit > request.size()) add("backup limit exceeds the microservice count");
  if (backups > request.backup_limit) add("more backups than the backup limit");

  for (const auto& r : state.routes) {
    if (r.link < 0 || r.link >= static_cast<int>(request.links.size())) {
      add("route for unknown link");
      continue;
    }
    const auto& link = request.links[static_cast<std::size_t>(r.link)];
    if (r.child_instance >= state.instance_count(link.child) ||
        r.parent_instance >= (link.parent == 0 ? 1 : state.instance_count(link.parent))) {
      add("route to a missing instance");
      continue;
    }
    const NodeId from = state.instances[static_cast<std::size_t>(link.parent)][static_cast<std::size_t>(r.parent_instance)].node;
    const NodeId to = state.instances[static_cast<std::size_t>(link.child)][static_cast<std::size_t>(r.child_instance)].node;
    if (r.paths.empty()) add("route without paths");
    for (const auto& p : r.paths) {
      if (p.nodes.empty() || p.nodes.front() != from || p.nodes.back() != to) add("path endpoints mismatch");
      if (p.links.size() + 1 != p.nodes.size()) {
        add("malformed path");
        continue;
      }
      std::set<NodeId> seen(p.nodes.begin(), p.nodes.end());
      if (seen.size() != p.nodes.size()) add("path is not simple");
      for (std::size_t i = 0; i < p.links.size(); ++i) {
        const auto found = net.find_link(p.nodes[i], p.nodes[i + 1]);
        if (!found || *found != p.links[i]) add("path uses a missing link");
      }
    }
    if (!r.paths.empty()) {
      const double latency = link_latency(net, link, r.paths, request.microservices[static_cast<std::size_t>(link.child)].proc_latency_ms);
      if (latency > link.deadline_s + kEps) add("link deadline missed on link " + std::to_string(r.link));
    }
    if (r.pool != route_pool(state.mechanism, r.child_instance, r.parent_instance)) {
      add("route reserves from the wrong pool");
    }
  }
  for (std::size_t l = 0; l < request.links.size(); ++l) {
    if (state.find_route(static_cast<int>(l), 0, 0) == nullptr) {
      add("primary link " + std::to_string(l) + " is not routed");
    }
  }
  return issues;
}

bool ledger_consistent(const InfrastructureNetwork& net, std::span<const ActivePlacement> active, std::string* detail,
                       double tol) {
  std::vector<double> cpu(net.node_count(), 0.0);
  std::vector<double> prot(net.link_count(), 0.0);
  std::vector<double> shared(net.link_count(), 0.0);
  for (const auto& a : active) {
    for (std::size_t m = 1; m < a.state.instances.size(); ++m) {
      for (const auto& rec : a.state.instances[m]) {
        cpu[static_cast<std::size_t>(rec.node)] += a.request.microservices[m].cpu_demand;
      }
    }
    for (const auto& r : a.state.routes) {
      for (const auto& p : r.paths) {
        for (LinkId e : p.links) {
          (r.pool == Pool::kProtected ? prot : shared)[static_cast<std::size_t>(e)] += r.bw_reserved;
        }
      }
    }
  }
  std::ostringstream why;
  bool ok = true;
  for (std::size_t i = 0; i < cpu.size(); ++i) {
    if (std::abs(cpu[i] - net.node(static_cast<NodeId>(i)).cpu_allocated) > tol) {
      ok = false;
      why << "node " << i << " cpu ledger " << net.node(static_cast<NodeId>(i)).cpu_allocated << " vs " << cpu[i]
          << "; ";
    }
  }
  for (std::size_t i = 0; i < prot.size(); ++i) {
    const auto& l = net.link(static_cast<LinkId>(i));
    if (std::abs(prot[i] - l.bw_protected) > tol || std::abs(shared[i] - l.bw_shared) > tol) {
      ok = false;
      why << "link " << i << " bandwidth ledger mismatch; ";
    }
  }
  if (detail != nullptr) *detail = why.str();
  return ok;
}

}  // namespace msplace
