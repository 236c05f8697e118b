#include "msplace/serialization.hpp"

#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

namespace msplace {

using nlohmann::json;

namespace {

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

template <typename T>
T field(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad field '") + key + "': " + e.what());
  }
}

// Copies obj[key] into `out` when present.
template <typename T>
void maybe(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
  if (!obj.is_object()) throw ParseError(std::string(where) + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items()) {
    if (!ok.contains(k)) throw ParseError(std::string("unknown key '") + k + "' in " + where);
  }
}

json path_json(const Path& p) { return json{{"nodes", p.nodes}, {"links", p.links}}; }

std::string pool_name(Pool p) { return p == Pool::kProtected ? "protected" : "shared"; }

}  // namespace

std::string_view mechanism_name(Mechanism m) {
  return m == Mechanism::kFullyProtected ? "fully-protected" : "shared";
}

std::optional<Mechanism> parse_mechanism(std::string_view name) {
  if (name == "fully-protected" || name == "protected") return Mechanism::kFullyProtected;
  if (name == "shared") return Mechanism::kShared;
  return std::nullopt;
}

std::string topology_to_json(const InfrastructureNetwork& net) {
  json nodes = json::array();
  for (const auto& n : net.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"cpu_capacity", n.cpu_capacity},
                     {"load_threshold", n.load_threshold},
                     {"rel_low", n.rel_low},
                     {"rel_high", n.rel_high}});
  }
  json links = json::array();
  for (const auto& l : net.links()) {
    links.push_back({{"u", l.u},
                     {"v", l.v},
                     {"bw_capacity", l.bw_capacity},
                     {"prop_delay", l.prop_delay_ms},
                     {"failure_rate", l.failure_rate}});
  }
  json out{{"nodes", nodes}, {"links", links}, {"access_nodes", net.access_nodes()}, {"shared_ratio", net.shared_ratio()}};
  return out.dump(2);
}

InfrastructureNetwork topology_from_json(std::string_view text) {
  const json doc = parse(text);
  if (!doc.is_object()) throw ParseError("topology must be a JSON object");
  double omega = 1.0;
  maybe(doc, "shared_ratio", omega);
  try {
    InfrastructureNetwork net(omega);
    const json& nodes = doc.at("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const json& n = nodes[i];
      if (n.contains("id") && n.at("id").get<std::size_t>() != i) throw ParseError("node ids must be 0..N-1 in order");
      PhysicalNode node;
      node.cpu_capacity = field<double>(n, "cpu_capacity");
      node.load_threshold = field<double>(n, "load_threshold");
      node.rel_low = field<double>(n, "rel_low");
      node.rel_high = field<double>(n, "rel_high");
      net.add_node(node);
    }
    for (const json& l : doc.at("links")) {
      PhysicalLink link;
      link.u = field<NodeId>(l, "u");
      link.v = field<NodeId>(l, "v");
      link.bw_capacity = field<double>(l, "bw_capacity");
      link.prop_delay_ms = field<double>(l, "prop_delay");
      link.failure_rate = field<double>(l, "failure_rate");
      net.add_link(link);
    }
    std::vector<NodeId> access;
    maybe(doc, "access_nodes", access);
    net.set_access_nodes(std::move(access));
    return net;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad topology: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("bad topology: ") + e.what());
  }
}

std::string requests_to_json(std::span<const ServiceRequest> requests) {
  json arr = json::array();
  for (const auto& r : requests) {
    json ms = json::array();
    for (const auto& m : r.microservices) {
      ms.push_back({{"id", m.id},
                    {"cpu_demand", m.cpu_demand},
                    {"proc_latency", m.proc_latency_ms},
                    {"failure_rate", m.failure_rate}});
    }
    json links = json::array();
    for (const auto& l : r.links) {
      links.push_back({{"parent", l.parent},
                       {"child", l.child},
                       {"bw_demand", l.bw_demand},
                       {"data_volume", l.data_volume},
                       {"deadline", l.deadline_s},
                       {"failure_rate", l.failure_rate}});
    }
    arr.push_back({{"id", r.id},
                   {"microservices", ms},
                   {"links", links},
                   {"backup_limit", r.backup_limit},
                   {"lifetime", r.lifetime},
                   {"arrival_time", r.arrival_time},
                   {"access_node", r.access_node}});
  }
  return json{{"requests", arr}}.dump(2);
}

std::vector<ServiceRequest> requests_from_json(std::string_view text) {
  const json doc = parse(text);
  const json& arr = doc.is_object() && doc.contains("requests") ? doc.at("requests") : doc;
  if (!arr.is_array()) throw ParseError("expected an array of requests");
  std::vector<ServiceRequest> out;
  for (const json& r : arr) {
    ServiceRequest req;
    req.id = field<int>(r, "id");
    for (const json& m : r.at("microservices")) {
      req.microservices.push_back(Microservice{field<int>(m, "id"), field<double>(m, "cpu_demand"),
                                               field<double>(m, "proc_latency"), field<double>(m, "failure_rate")});
    }
    for (const json& l : r.at("links")) {
      req.links.push_back(MicroserviceLink{field<int>(l, "parent"), field<int>(l, "child"),
                                           field<double>(l, "bw_demand"), field<double>(l, "data_volume"),
                                           field<double>(l, "deadline"), field<double>(l, "failure_rate")});
    }
    req.backup_limit = field<int>(r, "backup_limit");
    req.lifetime = field<int>(r, "lifetime");
    maybe(r, "arrival_time", req.arrival_time);
    req.access_node = field<NodeId>(r, "access_node");
    try {
      req.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("request ") + std::to_string(req.id) + ": " + e.what());
    }
    out.push_back(std::move(req));
  }
  return out;
}

std::string placement_to_json(const ServiceRequest& request, const PlacementOutcome& outcome) {
  json instances = json::array();
  for (std::size_t m = 1; m < outcome.state.instances.size(); ++m) {
    for (std::size_t b = 0; b < outcome.state.instances[m].size(); ++b) {
      const auto& rec = outcome.state.instances[m][b];
      instances.push_back({{"microservice", m},
                           {"instance", b},
                           {"primary", b == 0},
                           {"node", rec.node},
                           {"instance_sigma", rec.instance_sigma},
                           {"microservice_sigma", rec.microservice_sigma}});
    }
  }
  json routes = json::array();
  for (const auto& r : outcome.state.routes) {
    const auto& link = request.links[static_cast<std::size_t>(r.link)];
    json paths = json::array();
    for (const auto& p : r.paths) paths.push_back(path_json(p));
    routes.push_back({{"link", r.link},
                      {"parent", link.parent},
                      {"child", link.child},
                      {"parent_instance", r.parent_instance},
                      {"child_instance", r.child_instance},
                      {"pool", pool_name(r.pool)},
                      {"bandwidth", r.bw_reserved},
                      {"paths", paths}});
  }
  json out{{"request", request.id},
           {"success", outcome.success},
           {"mechanism", std::string(mechanism_name(outcome.state.mechanism))},
           {"backtracks", outcome.state.backtrack_count},
           {"instances", instances},
           {"routes", routes},
           {"reliability", outcome.reliability}};
  if (!outcome.success) out["reason"] = outcome.reason;
  return out.dump(2);
}

std::string sim_result_csv(const SimResult& result) {
  std::ostringstream os;
  os << kStepCsvHeader << '\n' << std::setprecision(10);
  for (std::size_t t = 0; t < result.cumulative_failures.size(); ++t) {
    os << t + 1 << ',' << result.cumulative_failures[t] << ','
       << (t < result.bandwidth.size() ? result.bandwidth[t] : 0.0) << '\n';
  }
  return os.str();
}

std::string sim_config_to_json(const SimConfig& cfg) {
  const auto& t = cfg.topology;
  const auto& w = cfg.workload;
  const auto& p = cfg.placement;
  json out{
      {"node_count", cfg.node_count},
      {"edge_prob", cfg.edge_prob},
      {"access_fraction", cfg.access_fraction},
      {"request_count", cfg.request_count},
      {"arrival_rate", cfg.arrival_rate},
      {"algorithm", std::string(algorithm_name(cfg.algorithm))},
      {"mechanism", std::string(mechanism_name(cfg.mechanism))},
      {"repetitions", cfg.repetitions},
      {"seed", cfg.seed},
      {"failure_policy", cfg.failure_policy == FailurePolicy::kRemove ? "remove" : "count-and-continue"},
      {"horizon", cfg.horizon},
      {"threads", cfg.threads},
      {"topology",
       {{"cpu_min", t.cpu_min},
        {"cpu_max", t.cpu_max},
        {"load_threshold", t.load_threshold},
        {"rel_low_min", t.rel_low_min},
        {"rel_low_max", t.rel_low_max},
        {"rel_high_min", t.rel_high_min},
        {"rel_high_max", t.rel_high_max},
        {"bw_min", t.bw_min},
        {"bw_max", t.bw_max},
        {"delay_min_ms", t.delay_min_ms},
        {"delay_max_ms", t.delay_max_ms},
        {"link_failure_rate", t.link_failure_rate},
        {"shared_ratio", t.shared_ratio}}},
      {"workload",
       {{"ms_count_min", w.ms_count_min},
        {"ms_count_max", w.ms_count_max},
        {"cpu_min", w.cpu_min},
        {"cpu_max", w.cpu_max},
        {"data_min_mb", w.data_min_mb},
        {"data_max_mb", w.data_max_mb},
        {"proc_min_ms", w.proc_min_ms},
        {"proc_max_ms", w.proc_max_ms},
        {"bw_min", w.bw_min},
        {"bw_max", w.bw_max},
        {"deadline_min_s", w.deadline_min_s},
        {"deadline_max_s", w.deadline_max_s},
        {"lifetime_min", w.lifetime_min},
        {"lifetime_max", w.lifetime_max},
        {"ms_failure_rate", w.ms_failure_rate},
        {"link_failure_rate", w.link_failure_rate},
        {"cpu_multiplier", w.cpu_multiplier},
        {"bw_multiplier", w.bw_multiplier},
        {"cross_edge_prob", w.cross_edge_prob},
        {"backup_mode", w.backup_mode == BackupMode::kFull ? "full" : "random"}}},
      {"placement",
       {{"max_hops", p.max_hops},
        {"backtrack_limit", p.backtrack_limit},
        {"score_mode", p.score_mode == ScoreMode::kServiceModel ? "service-model" : "literal"},
        {"literal_sprc", p.literal_sprc},
        {"rrsp_candidates", p.rrsp_candidates},
        {"cross_node", p.reliability.cross_node == CrossNodeForm::kLiteral ? "literal" : "node-survival"}}}};
  return out.dump(2);
}

SimConfig sim_config_from_json(std::string_view text, SimConfig base) {
  const json doc = parse(text);
  reject_unknown(doc,
                 {"node_count", "edge_prob", "access_fraction", "request_count", "arrival_rate", "algorithm",
                  "mechanism", "repetitions", "seed", "failure_policy", "horizon", "threads", "topology", "workload",
                  "placement"},
                 "config");
  SimConfig cfg = std::move(base);
  maybe(doc, "node_count", cfg.node_count);
  maybe(doc, "edge_prob", cfg.edge_prob);
  maybe(doc, "access_fraction", cfg.access_fraction);
  maybe(doc, "request_count", cfg.request_count);
  maybe(doc, "arrival_rate", cfg.arrival_rate);
  maybe(doc, "repetitions", cfg.repetitions);
  maybe(doc, "seed", cfg.seed);
  maybe(doc, "horizon", cfg.horizon);
  maybe(doc, "threads", cfg.threads);
  if (doc.contains("algorithm")) {
    const auto a = parse_algorithm(field<std::string>(doc, "algorithm"));
    if (!a) throw ParseError("unknown algorithm");
    cfg.algorithm = *a;
  }
  if (doc.contains("mechanism")) {
    const auto m = parse_mechanism(field<std::string>(doc, "mechanism"));
    if (!m) throw ParseError("unknown mechanism");
    cfg.mechanism = *m;
  }
  if (doc.contains("failure_policy")) {
    const auto s = field<std::string>(doc, "failure_policy");
    if (s == "remove") {
      cfg.failure_policy = FailurePolicy::kRemove;
    } else if (s == "count-and-continue") {
      cfg.failure_policy = FailurePolicy::kCountAndContinue;
    } else {
      throw ParseError("failure_policy must be 'remove' or 'count-and-continue'");
    }
  }
  if (doc.contains("topology")) {
    const json& t = doc.at("topology");
    reject_unknown(t,
                   {"cpu_min", "cpu_max", "load_threshold", "rel_low_min", "rel_low_max", "rel_high_min",
                    "rel_high_max", "bw_min", "bw_max", "delay_min_ms", "delay_max_ms", "link_failure_rate",
                    "shared_ratio"},
                   "topology");
    auto& r = cfg.topology;
    maybe(t, "cpu_min", r.cpu_min);
    maybe(t, "cpu_max", r.cpu_max);
    maybe(t, "load_threshold", r.load_threshold);
    maybe(t, "rel_low_min", r.rel_low_min);
    maybe(t, "rel_low_max", r.rel_low_max);
    maybe(t, "rel_high_min", r.rel_high_min);
    maybe(t, "rel_high_max", r.rel_high_max);
    maybe(t, "bw_min", r.bw_min);
    maybe(t, "bw_max", r.bw_max);
    maybe(t, "delay_min_ms", r.delay_min_ms);
    maybe(t, "delay_max_ms", r.delay_max_ms);
    maybe(t, "link_failure_rate", r.link_failure_rate);
    maybe(t, "shared_ratio", r.shared_ratio);
  }
  if (doc.contains("workload")) {
    const json& w = doc.at("workload");
    reject_unknown(w,
                   {"ms_count_min", "ms_count_max", "cpu_min", "cpu_max", "data_min_mb", "data_max_mb",
                    "proc_min_ms", "proc_max_ms", "bw_min", "bw_max", "deadline_min_s", "deadline_max_s",
                    "lifetime_min", "lifetime_max", "ms_failure_rate", "link_failure_rate", "cpu_multiplier",
                    "bw_multiplier", "cross_edge_prob", "backup_mode"},
                   "workload");
    auto& r = cfg.workload;
    maybe(w, "ms_count_min", r.ms_count_min);
    maybe(w, "ms_count_max", r.ms_count_max);
    maybe(w, "cpu_min", r.cpu_min);
    maybe(w, "cpu_max", r.cpu_max);
    maybe(w, "data_min_mb", r.data_min_mb);
    maybe(w, "data_max_mb", r.data_max_mb);
    maybe(w, "proc_min_ms", r.proc_min_ms);
    maybe(w, "proc_max_ms", r.proc_max_ms);
    maybe(w, "bw_min", r.bw_min);
    maybe(w, "bw_max", r.bw_max);
    maybe(w, "deadline_min_s", r.deadline_min_s);
    maybe(w, "deadline_max_s", r.deadline_max_s);
    maybe(w, "lifetime_min", r.lifetime_min);
    maybe(w, "lifetime_max", r.lifetime_max);
    maybe(w, "ms_failure_rate", r.ms_failure_rate);
    maybe(w, "link_failure_rate", r.link_failure_rate);
    maybe(w, "cpu_multiplier", r.cpu_multiplier);
    maybe(w, "bw_multiplier", r.bw_multiplier);
    maybe(w, "cross_edge_prob", r.cross_edge_prob);
    if (w.contains("backup_mode")) {
      const auto s = field<std::string>(w, "backup_mode");
      if (s == "full") {
        r.backup_mode = BackupMode::kFull;
      } else if (s == "random") {
        r.backup_mode = BackupMode::kRandom;
      } else {
        throw ParseError("backup_mode must be 'full' or 'random'");
      }
    }
  }
  if (doc.contains("placement")) {
    const json& p = doc.at("placement");
    reject_unknown(p, {"max_hops", "backtrack_limit", "score_mode", "literal_sprc", "rrsp_candidates", "cross_node"},
                   "placement");
    auto& r = cfg.placement;
    maybe(p, "max_hops", r.max_hops);
    maybe(p, "backtrack_limit", r.backtrack_limit);
    maybe(p, "literal_sprc", r.literal_sprc);
    maybe(p, "rrsp_candidates", r.rrsp_candidates);
    if (p.contains("score_mode")) {
      const auto s = field<std::string>(p, "score_mode");
      if (s == "service-model") {
        r.score_mode = ScoreMode::kServiceModel;
      } else if (s == "literal") {
        r.score_mode = ScoreMode::kLiteral;
      } else {
        throw ParseError("score_mode must be 'service-model' or 'literal'");
      }
    }
    if (p.contains("cross_node")) {
      const auto s = field<std::string>(p, "cross_node");
      if (s == "literal") {
        r.reliability.cross_node = CrossNodeForm::kLiteral;
      } else if (s == "node-survival") {
        r.reliability.cross_node = CrossNodeForm::kNodeSurvival;
      } else {
        throw ParseError("cross_node must be 'literal' or 'node-survival'");
      }
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

std::string sim_summary_json(const SimConfig& cfg, const SimResult& result) {
  json out{{"config", json::parse(sim_config_to_json(cfg))},
           {"repetitions", result.repetitions},
           {"total_failures", result.total_failures()},
           {"mean_bandwidth", result.mean_bandwidth()},
           {"placements_succeeded", result.placements_succeeded},
           {"placements_rejected", result.placements_rejected},
           {"histogram",
            {{"below_0.99", result.histogram[0]},
             {"0.99_to_0.999", result.histogram[1]},
             {"0.999_to_0.9999", result.histogram[2]},
             {"at_least_0.9999", result.histogram[3]}}},
           {"repetition_failures", result.repetition_failures}};
  return out.dump(2);
}

}  // namespace msplace
