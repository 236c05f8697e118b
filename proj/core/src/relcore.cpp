#include "msplace/relcore.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace msplace {

namespace {

constexpr double kTol = 1e-12;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double family_value(const std::vector<RelPath>& paths) {
  double fail = 1.0;
  for (const auto& p : paths) fail *= 1.0 - p.reliability;
  return 1.0 - fail;
}

void push_unique(std::vector<RelPath>& out, const RelPath& p) {
  for (const auto& q : out) {
    if (q.path == p.path) return;
  }
  out.push_back(p);
}

// Path content for the product rule: every node but the destination, plus
// every link.
bool contents_overlap(const Path& a, const Path& b) {
  for (std::size_t i = 0; i + 1 < a.nodes.size(); ++i) {
    for (std::size_t j = 0; j + 1 < b.nodes.size(); ++j) {
      if (a.nodes[i] == b.nodes[j]) return true;
    }
  }
  for (LinkId x : a.links) {
    if (std::find(b.links.begin(), b.links.end(), x) != b.links.end()) return true;
  }
  return false;
}

bool contains_node(const Path& p, NodeId n) { return std::find(p.nodes.begin(), p.nodes.end(), n) != p.nodes.end(); }

Path concat(const Path& a, const Path& b) {
  Path out = a;
  out.nodes.insert(out.nodes.end(), b.nodes.begin() + 1, b.nodes.end());
  out.links.insert(out.links.end(), b.links.begin(), b.links.end());
  return out;
}

void check_order(const PathRelMatrix& a, const PathRelMatrix& b) {
  if (a.order() != b.order()) throw std::invalid_argument("matrix order mismatch");
}

}  // namespace

RelValue RelValue::scalar(double v) { return RelValue{v, 1.0 - v, {}}; }

RelValue RelValue::single(Path path, double reliability) {
  RelValue out;
  out.value = reliability;
  out.unreliability = 1.0 - reliability;
  out.paths.push_back(RelPath{std::move(path), reliability});
  return out;
}

RelValue RelValue::family(std::vector<RelPath> paths) {
  RelValue out;
  double fail = 1.0;
  for (const auto& p : paths) fail *= 1.0 - p.reliability;
  out.value = 1.0 - fail;
  out.unreliability = fail;
  out.paths = std::move(paths);
  return out;
}

bool RelValue::consistent(double tol) const {
  if (paths.empty()) return true;
  return std::abs(value - family_value(paths)) <= tol;
}

double total_path_reliability(std::span<const double> path_reliabilities) {
  double fail = 1.0;
  for (double r : path_reliabilities) fail *= 1.0 - r;
  return 1.0 - fail;
}

double op_plus(double x, double y) { return x + y - x * y; }

double op_minus(double x, double y) {
  if (y == 0.0) return x;
  if (!(y >= 0.0 && y < 1.0 && y <= x + kTol && x <= 1.0)) {
    throw std::domain_error("op_minus needs 0 <= y < 1 and y <= x");
  }
  return (x - y) / (1.0 - y);
}

RelValue op_plus(const RelValue& x, const RelValue& y) {
  if (!x.has_provenance() && x.value == 0.0) return y;
  if (!y.has_provenance() && y.value == 0.0) return x;
  if (x.has_provenance() && y.has_provenance()) {
    std::vector<RelPath> merged = x.paths;
    for (const auto& p : y.paths) push_unique(merged, p);
    return RelValue::family(std::move(merged));
  }
  RelValue out;
  out.value = op_plus(x.value, y.value);
  out.unreliability = x.unreliability * y.unreliability;
  out.paths = x.paths;
  for (const auto& p : y.paths) push_unique(out.paths, p);
  return out;
}

RelValue op_minus(const RelValue& x, double y) {
  static_cast<void>(op_minus(x.value, y));  // domain check
  if (y == 0.0) return RelValue::scalar(x.value);
  RelValue out;
  out.unreliability = std::min(1.0, x.unreliability / (1.0 - y));
  out.value = 1.0 - out.unreliability;
  return out;
}

bool provenance_overlap(const RelValue& x, const RelValue& y) {
  for (const auto& a : x.paths) {
    for (const auto& b : y.paths) {
      if (contents_overlap(a.path, b.path)) return true;
    }
  }
  return false;
}

RelValue op_times(const RelValue& x, const RelValue& y) {
  if (!x.has_provenance() || !y.has_provenance()) {
    // A bare scalar scales each path of the other operand.
    const RelValue& scalar = x.has_provenance() ? y : x;
    const RelValue& fam = x.has_provenance() ? x : y;
    if (!fam.has_provenance()) return RelValue::scalar(x.value * y.value);
    std::vector<RelPath> scaled = fam.paths;
    for (auto& p : scaled) p.reliability *= scalar.value;
    RelValue out = RelValue::family(std::move(scaled));
    if (fam.paths.size() == 1 || scalar.value == 1.0) {
      out.value = fam.value * scalar.value;
      out.unreliability = 1.0 - out.value;
    }
    return out;
  }
  if (provenance_overlap(x, y)) return RelValue::scalar(0.0);
  std::vector<RelPath> out;
  for (const auto& a : x.paths) {
    for (const auto& b : y.paths) {
      if (a.path.destination() != b.path.source()) {
        throw std::invalid_argument("op_times: paths do not join");
      }
      push_unique(out, RelPath{concat(a.path, b.path), a.reliability * b.reliability});
    }
  }
  return RelValue::family(std::move(out));
}

PathRelMatrix::PathRelMatrix(std::size_t order) : order_(order), entries_(order * order) {}

PathRelMatrix one_step_matrix(const InfrastructureNetwork& net) {
  PathRelMatrix m(net.node_count());
  for (std::size_t id = 0; id < net.link_count(); ++id) {
    const auto& l = net.link(static_cast<LinkId>(id));
    const double re = net.link_reliability(static_cast<LinkId>(id));
    m.at(static_cast<std::size_t>(l.u), static_cast<std::size_t>(l.v)) =
        RelValue::single(Path{{l.u, l.v}, {static_cast<LinkId>(id)}}, net.node_reliability(l.u) * re);
    m.at(static_cast<std::size_t>(l.v), static_cast<std::size_t>(l.u)) =
        RelValue::single(Path{{l.v, l.u}, {static_cast<LinkId>(id)}}, net.node_reliability(l.v) * re);
  }
  return m;
}

PathRelMatrix mat_mul(const PathRelMatrix& a, const PathRelMatrix& b) {
  check_order(a, b);
  const std::size_t n = a.order();
  PathRelMatrix c(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      RelValue acc;
      for (std::size_t mid = 0; mid < n; ++mid) {
        const RelValue& left = a.at(i, mid);
        const RelValue& right = b.at(mid, j);
        if (left.value == 0.0 && !left.has_provenance()) continue;
        if (right.value == 0.0 && !right.has_provenance()) continue;
        RelValue lhs = left;
        if (lhs.has_provenance() && right.has_provenance()) {
          // Walks that already pass through j cannot be extended to j.
          std::erase_if(lhs.paths, [&](const RelPath& p) { return contains_node(p.path, static_cast<NodeId>(j)); });
          if (lhs.paths.empty()) continue;
          lhs = RelValue::family(std::move(lhs.paths));
        }
        acc = op_plus(acc, op_times(lhs, right));
      }
      c.at(i, j) = std::move(acc);
    }
  }
  return c;
}

PathRelMatrix mat_add(const PathRelMatrix& a, const PathRelMatrix& b) {
  check_order(a, b);
  const std::size_t n = a.order();
  PathRelMatrix c(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const RelValue& x = a.at(i, j);
      const RelValue& y = b.at(i, j);
      bool intersect = false;
      for (const auto& p : x.paths) {
        for (const auto& q : y.paths) {
          if (!internally_disjoint(p.path, q.path)) {
            intersect = true;
            break;
          }
        }
        if (intersect) break;
      }
      c.at(i, j) = intersect ? x : op_plus(x, y);
    }
  }
  return c;
}

PathRelMatrix accumulated_path_matrix(const InfrastructureNetwork& net, int k) {
  if (k < 1) throw std::invalid_argument("path length bound must be at least 1");
  const PathRelMatrix step = one_step_matrix(net);
  PathRelMatrix power = step;
  PathRelMatrix acc = step;
  for (int len = 2; len <= k; ++len) {
    power = mat_mul(power, step);
    acc = mat_add(acc, power);
  }
  return acc;
}

double stripped_path_reliability(const InfrastructureNetwork& net, const Path& path, const CriticalNodeSet* critical) {
  double r = 1.0;
  for (std::size_t i = 1; i + 1 < path.nodes.size(); ++i) {
    const NodeId n = path.nodes[i];
    if (critical != nullptr && critical->contains(n)) continue;
    r *= net.node_reliability(n);
  }
  for (LinkId l : path.links) r *= net.link_reliability(l);
  return r;
}

PathRelMatrix network_reliability_matrix(const InfrastructureNetwork& net, int k, const CriticalNodeSet* critical) {
  const PathRelMatrix acc = accumulated_path_matrix(net, k);
  const std::size_t n = acc.order();
  PathRelMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        out.at(i, j) = RelValue::scalar(1.0);
        continue;
      }
      std::vector<RelPath> stripped;
      for (const auto& p : acc.at(i, j).paths) {
        stripped.push_back(RelPath{p.path, stripped_path_reliability(net, p.path, critical)});
      }
      out.at(i, j) = RelValue::family(std::move(stripped));
    }
  }
  return out;
}

CriticalNodeSet critical_nodes(const ServiceRequest& request, const PlacementState& state) {
  CriticalNodeSet out;
  out.insert(request.access_node);
  for (std::size_t m = 1; m < state.instances.size(); ++m) {
    const auto& inst = state.instances[m];
    if (inst.empty()) continue;
    const NodeId first = inst.front().node;
    const bool all_same =
        std::all_of(inst.begin(), inst.end(), [first](const InstanceRecord& r) { return r.node == first; });
    if (all_same) out.insert(first);
  }
  return out;
}

double effective_link_probability(double link_software_rel, double end_to_end_rel) {
  return link_software_rel * end_to_end_rel;
}

double route_reliability(const InfrastructureNetwork& net, const InstanceLinkRoute& route,
                         const CriticalNodeSet& critical, const ReliabilityOptions& options) {
  double fail = 1.0;
  for (std::size_t i = 0; i < route.paths.size(); ++i) {
    const Path& p = route.paths[i];
    if (p.is_local()) return 1.0;
    double r = stripped_path_reliability(net, p, &critical);
    if (options.apply_contention && i < route.contention_factor.size()) r *= route.contention_factor[i];
    fail *= 1.0 - r;
  }
  return 1.0 - fail;
}

double instance_reliability(const InfrastructureNetwork& net, const ServiceRequest& request,
                            const PlacementState& state, int m, int b, const CriticalNodeSet& critical,
                            const ReliabilityOptions& options) {
  const auto& ms = request.microservices.at(static_cast<std::size_t>(m));
  double sigma = software_reliability(ms.failure_rate);
  for (int l : request.parent_links(m)) {
    const auto& link = request.links[static_cast<std::size_t>(l)];
    const int parent = link.parent;
    const int parent_count = parent == 0 ? 1 : state.instance_count(parent);
    if (parent_count == 0) throw std::logic_error("instance reliability needs every parent placed");
    const double rl = software_reliability(link.failure_rate);
    double fail = 1.0;
    for (int pb = 0; pb < parent_count; ++pb) {
      const InstanceLinkRoute* route = state.find_route(l, b, pb);
      if (route == nullptr) continue;
      const double kappa = effective_link_probability(rl, route_reliability(net, *route, critical, options));
      fail *= 1.0 - kappa;
    }
    sigma *= 1.0 - fail;
  }
  return clamp01(sigma * (1.0 - options.instance_perturbation));
}

double microservice_reliability(const InfrastructureNetwork& net, const ServiceRequest& request,
                                const PlacementState& state, int m, const CriticalNodeSet& critical,
                                const ReliabilityOptions& options) {
  if (m == 0) return 1.0;
  std::map<NodeId, double> node_fail;  // node -> prod (1 - sigma_{m(b)})
  for (int b = 0; b < state.instance_count(m); ++b) {
    const NodeId n = state.instances[static_cast<std::size_t>(m)][static_cast<std::size_t>(b)].node;
    const double s = instance_reliability(net, request, state, m, b, critical, options);
    auto [it, inserted] = node_fail.try_emplace(n, 1.0);
    it->second *= 1.0 - s;
  }
  double fail = 1.0;
  for (const auto& [n, f] : node_fail) {
    const double sigma_mn = 1.0 - f;
    if (critical.contains(n)) {
      fail *= 1.0 - sigma_mn;
    } else if (options.cross_node == CrossNodeForm::kLiteral) {
      fail *= net.node_reliability(n) * (1.0 - sigma_mn);
    } else {
      fail *= 1.0 - net.node_reliability(n) * sigma_mn;
    }
  }
  return clamp01(1.0 - fail);
}

namespace {

double service_product(const InfrastructureNetwork& net, const ServiceRequest& request, const PlacementState& state,
                       const ReliabilityOptions& options, bool require_complete) {
  const CriticalNodeSet critical = critical_nodes(request, state);
  double r = 1.0;
  for (NodeId n : critical) r *= net.node_reliability(n);
  for (int m = 1; m < request.size() + 1; ++m) {
    if (!state.is_placed(m)) {
      if (require_complete) throw std::logic_error("service reliability needs a complete placement");
      continue;
    }
    r *= microservice_reliability(net, request, state, m, critical, options);
  }
  return r;
}

}  // namespace

double service_reliability(const InfrastructureNetwork& net, const ServiceRequest& request,
                           const PlacementState& state, const ReliabilityOptions& options) {
  return service_product(net, request, state, options, true);
}

double partial_service_reliability(const InfrastructureNetwork& net, const ServiceRequest& request,
                                   const PlacementState& state, const ReliabilityOptions& options) {
  return service_product(net, request, state, options, false);
}

int PlacementState::total_instances() const {
  int total = 0;
  for (std::size_t m = 1; m < instances.size(); ++m) total += static_cast<int>(instances[m].size());
  return total;
}

const InstanceLinkRoute* PlacementState::find_route(int link, int child_instance, int parent_instance) const {
  for (const auto& r : routes) {
    if (r.link == link && r.child_instance == child_instance && r.parent_instance == parent_instance) return &r;
  }
  return nullptr;
}

}  // namespace msplace
