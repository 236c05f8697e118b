#include "msplace/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace msplace {

namespace {

constexpr double kEps = 1e-9;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class LivenessCheck {
 public:
  LivenessCheck(const ServiceRequest& req, const PlacementState& state, const ComponentFailureSample& sample,
                const InfrastructureNetwork& net, std::vector<double>* claims)
      : req_(req), state_(state), sample_(sample), net_(net), claims_(claims) {
    status_.resize(state.instances.size());
    for (std::size_t m = 0; m < state.instances.size(); ++m) status_[m].assign(state.instances[m].size(), kUnknown);
  }

  bool alive() {
    if (sample_.node_failed(req_.access_node)) return false;
    for (int m : req_.bfs_order()) {
      bool any = false;
      for (int b = 0; b < state_.instance_count(m) && !any; ++b) any = operational(m, b);
      if (!any) return false;
    }
    return true;
  }

 private:
  enum : char { kUnknown, kUp, kDown };

  bool path_up(const Path& p) const {
    for (NodeId n : p.nodes) {
      if (sample_.node_failed(n)) return false;
    }
    for (LinkId e : p.links) {
      if (sample_.link_failed(e)) return false;
    }
    return true;
  }

  bool try_claim(const Path& p, double bw) {
    if (claims_ == nullptr || bw <= 0.0) return true;
    for (LinkId e : p.links) {
      const auto& l = net_.link(e);
      if (l.bw_protected + (*claims_)[static_cast<std::size_t>(e)] + bw > l.bw_capacity + kEps) return false;
    }
    for (LinkId e : p.links) (*claims_)[static_cast<std::size_t>(e)] += bw;
    return true;
  }

  bool connected(const InstanceLinkRoute& r) {
    if (sample_.failed_instance_links.contains({req_.id, r.link, r.child_instance, r.parent_instance})) return false;
    const bool needs_claim = r.pool == Pool::kShared;
    for (const auto& p : r.paths) {
      if (!path_up(p)) continue;
      if (!needs_claim || try_claim(p, r.bw_reserved)) return true;
    }
    return false;
  }

  bool operational(int m, int b) {
    if (m == 0) return !sample_.node_failed(req_.access_node);
    char& s = status_[static_cast<std::size_t>(m)][static_cast<std::size_t>(b)];
    if (s != kUnknown) return s == kUp;
    s = kDown;
    const NodeId node = state_.instances[static_cast<std::size_t>(m)][static_cast<std::size_t>(b)].node;
    if (sample_.node_failed(node) || sample_.failed_instances.contains({req_.id, m, b})) return false;
    for (int l : req_.parent_links(m)) {
      const int f = req_.links[static_cast<std::size_t>(l)].parent;
      const int count = f == 0 ? 1 : state_.instance_count(f);
      bool ok = false;
      for (int pb = 0; pb < count && !ok; ++pb) {
        const InstanceLinkRoute* r = state_.find_route(l, b, pb);
        if (r == nullptr || !operational(f, pb)) continue;
        ok = connected(*r);
      }
      if (!ok) return false;
    }
    s = kUp;
    return true;
  }

  const ServiceRequest& req_;
  const PlacementState& state_;
  const ComponentFailureSample& sample_;
  const InfrastructureNetwork& net_;
  std::vector<double>* claims_;
  std::vector<std::vector<char>> status_;
};

void accumulate(SimResult& into, const SimResult& r) {
  const std::size_t len = std::max(into.cumulative_failures.size(), r.cumulative_failures.size());
  auto pad = [len](std::vector<double>& v, double fill) {
    if (v.size() < len) v.resize(len, fill);
  };
  const double last_into = into.cumulative_failures.empty() ? 0.0 : into.cumulative_failures.back();
  pad(into.cumulative_failures, last_into);
  pad(into.bandwidth, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    into.cumulative_failures[t] +=
        t < r.cumulative_failures.size() ? r.cumulative_failures[t] : r.total_failures();
    into.bandwidth[t] += t < r.bandwidth.size() ? r.bandwidth[t] : 0.0;
  }
  for (std::size_t i = 0; i < into.histogram.size(); ++i) into.histogram[i] += r.histogram[i];
  into.placements_succeeded += r.placements_succeeded;
  into.placements_rejected += r.placements_rejected;
}

}  // namespace

void SimConfig::validate() const {
  if (node_count <= 0) throw std::invalid_argument("node_count must be positive");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0)) throw std::invalid_argument("edge_prob must lie in (0, 1]");
  if (!(access_fraction > 0.0 && access_fraction <= 1.0)) {
    throw std::invalid_argument("access_fraction must lie in (0, 1]");
  }
  if (request_count <= 0) throw std::invalid_argument("request_count must be positive");
  if (!(arrival_rate > 0.0)) throw std::invalid_argument("arrival_rate must be positive");
  if (repetitions <= 0) throw std::invalid_argument("repetitions must be positive");
  if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
  if (placement.max_hops < 1) throw std::invalid_argument("max_hops must be at least 1");
  if (placement.backtrack_limit < 0) throw std::invalid_argument("backtrack limit must be non-negative");
  if (placement.rrsp_candidates < 1) throw std::invalid_argument("rrsp_candidates must be at least 1");
  topology.validate();
  workload.validate();
}

int histogram_bucket(double reliability) {
  int bucket = 0;
  for (double edge : kHistogramEdges) {
    if (reliability >= edge) ++bucket;
  }
  return bucket;
}

double SimResult::mean_bandwidth() const {
  if (bandwidth.empty()) return 0.0;
  double sum = 0.0;
  for (double b : bandwidth) sum += b;
  return sum / static_cast<double>(bandwidth.size());
}

double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d,
                     std::uint64_t e) {
  std::uint64_t h = splitmix(seed);
  for (std::uint64_t k : {a, b, c, d, e}) h = splitmix(h ^ k);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

ComponentFailureSample sample_failures(std::span<const ActivePlacement> active, const InfrastructureNetwork& net,
                                       std::uint64_t step_seed) {
  ComponentFailureSample s;
  s.failed_nodes.assign(net.node_count(), 0);
  s.failed_links.assign(net.link_count(), 0);
  for (std::size_t n = 0; n < net.node_count(); ++n) {
    const double q = 1.0 - net.node_reliability(static_cast<NodeId>(n));
    s.failed_nodes[n] = keyed_uniform(step_seed, 1, n) < q ? 1 : 0;
  }
  for (std::size_t e = 0; e < net.link_count(); ++e) {
    const double q = 1.0 - net.link_reliability(static_cast<LinkId>(e));
    s.failed_links[e] = keyed_uniform(step_seed, 2, e) < q ? 1 : 0;
  }
  for (const auto& a : active) {
    const auto id = static_cast<std::uint64_t>(a.request.id);
    for (std::size_t m = 1; m < a.state.instances.size(); ++m) {
      const double q = 1.0 - software_reliability(a.request.microservices[m].failure_rate);
      for (std::size_t b = 0; b < a.state.instances[m].size(); ++b) {
        if (q > 0.0 && keyed_uniform(step_seed, 3, id, m, b) < q) {
          s.failed_instances.emplace(a.request.id, static_cast<int>(m), static_cast<int>(b));
        }
      }
    }
    for (const auto& r : a.state.routes) {
      const double q = 1.0 - software_reliability(a.request.links[static_cast<std::size_t>(r.link)].failure_rate);
      if (q > 0.0 && keyed_uniform(step_seed, 4, id, static_cast<std::uint64_t>(r.link),
                                   static_cast<std::uint64_t>(r.child_instance),
                                   static_cast<std::uint64_t>(r.parent_instance)) < q) {
        s.failed_instance_links.emplace(a.request.id, r.link, r.child_instance, r.parent_instance);
      }
    }
  }
  return s;
}

bool evaluate_service_alive(const ServiceRequest& request, const PlacementState& state,
                            const ComponentFailureSample& sample, const InfrastructureNetwork& net,
                            std::vector<double>* claims) {
  LivenessCheck check(request, state, sample, net, state.mechanism == Mechanism::kShared ? claims : nullptr);
  return check.alive();
}

double record_bandwidth(const InfrastructureNetwork& net) {
  if (net.link_count() == 0) return 0.0;
  double sum = 0.0;
  for (const auto& l : net.links()) sum += l.bw_protected;
  return sum / static_cast<double>(net.link_count());
}

std::uint64_t repetition_seed(std::uint64_t base, int rep) {
  return splitmix(base ^ splitmix(0x5eedULL + static_cast<std::uint64_t>(rep)));
}

SimResult run_simulation(const SimConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = cfg.seed;
  InfrastructureNetwork net = generate_er_topology(cfg.node_count, cfg.edge_prob, cfg.topology, splitmix(seed ^ 1));
  net.set_access_nodes(select_access_nodes(net, cfg.access_fraction));

  const std::vector<double> arrivals = generate_arrivals(cfg.request_count, cfg.arrival_rate, splitmix(seed ^ 2));
  std::vector<ServiceRequest> requests;
  requests.reserve(arrivals.size());
  {
    std::mt19937_64 rng(splitmix(seed ^ 3));
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
      ServiceRequest r = generate_request(cfg.workload, net.access_nodes(), rng, static_cast<int>(i));
      r.arrival_time = arrivals[i];
      requests.push_back(std::move(r));
    }
  }
  const int horizon = cfg.horizon > 0
                          ? cfg.horizon
                          : static_cast<int>(std::ceil(arrivals.back())) + cfg.workload.lifetime_max + 1;

  PlacementConfig pc = cfg.placement;
  pc.mechanism = cfg.algorithm == Algorithm::kSrpS ? Mechanism::kShared : cfg.mechanism;

  SimResult result;
  result.cumulative_failures.reserve(static_cast<std::size_t>(horizon));
  result.bandwidth.reserve(static_cast<std::size_t>(horizon));
  std::vector<ActivePlacement> active;
  std::vector<int> started;  // step at which each active service was placed
  std::size_t next = 0;
  double failures = 0.0;
  std::vector<double> claims(net.link_count(), 0.0);

  auto remove_at = [&](std::size_t i) {
    release_placement(net, active[i].request, active[i].state);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(i));
    started.erase(started.begin() + static_cast<std::ptrdiff_t>(i));
  };

  for (int t = 1; t <= horizon; ++t) {
    while (next < requests.size() && requests[next].arrival_time <= static_cast<double>(t)) {
      const ServiceRequest& req = requests[next];
      pc.seed = splitmix(seed ^ splitmix(0xa11ce + next));
      PlacementOutcome out = place_request(cfg.algorithm, net, req, pc, active);
      if (out.success) {
        result.placements_succeeded += 1.0;
        result.histogram[static_cast<std::size_t>(histogram_bucket(out.reliability))] += 1.0;
        result.request_reliability.push_back(out.reliability);
        active.push_back(ActivePlacement{req, std::move(out.state)});
        started.push_back(t);
      } else {
        result.placements_rejected += 1.0;
      }
      ++next;
    }

    const std::uint64_t step_seed = splitmix(seed ^ splitmix(0xfa11ULL + static_cast<std::uint64_t>(t)));
    const ComponentFailureSample sample = sample_failures(active, net, step_seed);
    std::fill(claims.begin(), claims.end(), 0.0);
    std::vector<char> dead(active.size(), 0);
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (!evaluate_service_alive(active[i].request, active[i].state, sample, net, &claims)) {
        failures += 1.0;
        dead[i] = 1;
      }
    }
    for (std::size_t i = active.size(); i-- > 0;) {
      const bool expired = t - started[i] + 1 >= active[i].request.lifetime;
      if ((dead[i] && cfg.failure_policy == FailurePolicy::kRemove) || expired) remove_at(i);
    }
    result.cumulative_failures.push_back(failures);
    result.bandwidth.push_back(record_bandwidth(net));
  }
  result.repetition_failures = {failures};
  result.repetition_bandwidth = {result.mean_bandwidth()};
  result.repetition_succeeded = {result.placements_succeeded};
  return result;
}

SimResult run_batch(const SimConfig& cfg) {
  cfg.validate();
  std::vector<SimResult> runs(static_cast<std::size_t>(cfg.repetitions));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next++; r < cfg.repetitions; r = next++) {
      SimConfig c = cfg;
      c.seed = repetition_seed(cfg.seed, r);
      runs[static_cast<std::size_t>(r)] = run_simulation(c);
    }
  };
  const int threads = std::max(1, std::min(cfg.threads > 0 ? cfg.threads
                                                           : static_cast<int>(std::thread::hardware_concurrency()),
                                           cfg.repetitions));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SimResult total;
  for (const auto& r : runs) {
    accumulate(total, r);
    total.repetition_failures.push_back(r.total_failures());
    total.repetition_bandwidth.push_back(r.mean_bandwidth());
    total.repetition_succeeded.push_back(r.placements_succeeded);
  }
  const double n = static_cast<double>(cfg.repetitions);
  for (auto& v : total.cumulative_failures) v /= n;
  for (auto& v : total.bandwidth) v /= n;
  for (auto& v : total.histogram) v /= n;
  total.placements_succeeded /= n;
  total.placements_rejected /= n;
  total.repetitions = cfg.repetitions;
  return total;
}

}  // namespace msplace
