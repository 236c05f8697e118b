#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "msplace/experiment.hpp"
#include "msplace/serialization.hpp"
#include "msplace/simulator.hpp"
#include "msplace/validation/suites.hpp"

namespace msplace::cli {

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string default_output_dir() {
  const char* env = std::getenv(kOutputDirEnv);
  return env != nullptr && *env != '\0' ? env : "msplace-out";
}

// Flags shared by the commands that build a SimConfig. Each one overrides the
// config file only when given.
struct ConfigFlags {
  std::string config_path;
  int node_count = 0;
  double edge_prob = 0.0;
  int request_count = 0;
  double arrival_rate = 0.0;
  std::string algorithm;
  std::string mechanism;
  int repetitions = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  int horizon = 0;
  double shared_ratio = 0.0;
  double cpu_multiplier = 0.0;
  double bw_multiplier = 0.0;
  std::string backup_mode;
  std::vector<CLI::Option*> opts;

  void attach(CLI::App& app, bool placement_flags) {
    app.add_option("-c,--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    opts = {
        app.add_option("--nodes", node_count, "number of physical nodes"),
        app.add_option("--edge-prob", edge_prob, "Erdos-Renyi edge probability"),
        app.add_option("--requests", request_count, "number of service requests"),
        app.add_option("--arrival-rate", arrival_rate, "Poisson arrival rate per step"),
        placement_flags ? app.add_option("--algorithm", algorithm, "SRP, SRP-S, DAIP, RRSP, Grd or Grd-B") : nullptr,
        placement_flags ? app.add_option("--mechanism", mechanism, "fully-protected or shared") : nullptr,
        placement_flags ? app.add_option("--reps", repetitions, "repetitions per run") : nullptr,
        app.add_option("--seed", seed, "base seed"),
        placement_flags ? app.add_option("--threads", threads, "worker threads (0 = hardware)") : nullptr,
        placement_flags ? app.add_option("--horizon", horizon, "simulated steps (0 = automatic)") : nullptr,
        app.add_option("--shared-ratio", shared_ratio, "shared-pool ratio omega"),
        app.add_option("--cpu-multiplier", cpu_multiplier, "scale of microservice CPU demands"),
        app.add_option("--bw-multiplier", bw_multiplier, "scale of microservice link bandwidth demands"),
        app.add_option("--backup-mode", backup_mode, "full or random backup budgets"),
    };
  }

  [[nodiscard]] bool given(std::size_t i) const { return opts[i] != nullptr && opts[i]->count() > 0; }

  [[nodiscard]] SimConfig build() const {
    SimConfig cfg;
    try {
      if (!config_path.empty()) cfg = sim_config_from_json(read_file(config_path));
    } catch (const ParseError& e) {
      throw ConfigError(config_path + ": " + e.what());
    }
    if (given(0)) cfg.node_count = node_count;
    if (given(1)) cfg.edge_prob = edge_prob;
    if (given(2)) cfg.request_count = request_count;
    if (given(3)) cfg.arrival_rate = arrival_rate;
    if (given(4)) {
      const auto a = parse_algorithm(algorithm);
      if (!a) throw ConfigError("unknown algorithm '" + algorithm + "'");
      cfg.algorithm = *a;
    }
    if (given(5)) {
      const auto m = parse_mechanism(mechanism);
      if (!m) throw ConfigError("unknown mechanism '" + mechanism + "'");
      cfg.mechanism = *m;
    }
    if (given(6)) cfg.repetitions = repetitions;
    if (given(7)) cfg.seed = seed;
    if (given(8)) cfg.threads = threads;
    if (given(9)) cfg.horizon = horizon;
    if (given(10)) cfg.topology.shared_ratio = shared_ratio;
    if (given(11)) cfg.workload.cpu_multiplier = cpu_multiplier;
    if (given(12)) cfg.workload.bw_multiplier = bw_multiplier;
    if (given(13)) {
      if (backup_mode == "full") {
        cfg.workload.backup_mode = BackupMode::kFull;
      } else if (backup_mode == "random") {
        cfg.workload.backup_mode = BackupMode::kRandom;
      } else {
        throw ConfigError("backup mode must be 'full' or 'random'");
      }
    }
    if (cfg.algorithm == Algorithm::kSrpS) cfg.mechanism = Mechanism::kShared;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return cfg;
  }
};

int cmd_simulate(const ConfigFlags& flags, const std::string& out_dir, std::ostream& out) {
  const SimConfig cfg = flags.build();
  const SimResult res = run_batch(cfg);
  const std::filesystem::path dir(out_dir);
  write_file(dir / "steps.csv", sim_result_csv(res));
  write_file(dir / "summary.json", sim_summary_json(cfg, res));
  out << std::setprecision(6) << "algorithm=" << algorithm_name(cfg.algorithm)
      << " mechanism=" << mechanism_name(cfg.mechanism) << " repetitions=" << res.repetitions
      << " mean_total_failures=" << res.total_failures() << " mean_bandwidth=" << res.mean_bandwidth()
      << " placed=" << res.placements_succeeded << " rejected=" << res.placements_rejected << '\n';
  out << "wrote " << (dir / "steps.csv").string() << " and " << (dir / "summary.json").string() << '\n';
  return kExitOk;
}

int cmd_sweep(const ConfigFlags& flags, const std::string& axis, const std::vector<double>& values,
              const std::vector<std::string>& algorithms, const std::string& out_dir, std::ostream& out) {
  ExperimentSpec spec;
  spec.base = flags.build();
  const auto a = parse_sweep_axis(axis);
  if (!a) throw ConfigError("unknown sweep axis '" + axis + "'");
  spec.axis = *a;
  spec.values = values;
  for (const auto& name : algorithms) {
    const auto c = parse_contender(name);
    if (!c) throw ConfigError("unknown algorithm '" + name + "'");
    spec.contenders.push_back(*c);
  }
  spec.output_dir = out_dir;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  out << kSummaryCsvHeader << '\n';
  for (const auto& row : run_experiment(spec)) out << summary_row_csv(row) << '\n';
  out << "wrote " << (std::filesystem::path(out_dir) / "summary.csv").string() << '\n';
  return kExitOk;
}

struct ValidateFlags {
  std::string suite = "all";
  double perturbation = 0.0;
  std::uint64_t seed = 1;
  int mc_samples = 100000;
  int audit_placements = 10000;
};

int cmd_validate(const ValidateFlags& f, std::ostream& out) {
  using namespace validation;
  bool all_ok = true;
  auto want = [&f](std::string_view s) { return f.suite == "all" || f.suite == s; };
  auto line = [&](bool ok, std::string_view name, const std::string& detail) {
    out << (ok ? "PASS " : "FAIL ") << name << ' ' << detail << '\n';
    all_ok = all_ok && ok;
  };
  std::ostringstream d;
  d << std::setprecision(3);
  if (want("operators")) {
    const auto r = run_operator_suite(100000, f.seed);
    d.str("");
    d << "triples=" << r.triples << " max_comm=" << r.max_commutativity_error
      << " max_assoc=" << r.max_associativity_error << " max_inverse=" << r.max_inverse_error
      << " overlap_nonzero=" << r.overlap_nonzero << '/' << r.overlap_cases;
    line(r.passed(), "operators", d.str());
  }
  if (want("matrix")) {
    const auto r = run_matrix_oracle_suite(200, 7, 4, f.seed);
    d.str("");
    d << "graphs=" << r.graphs << " entries=" << r.entries << " max_error=" << r.max_error
      << " inconsistent=" << r.inconsistent_values;
    line(r.passed(), "matrix", d.str());
  }
  if (want("montecarlo")) {
    ReliabilityOptions opts;
    opts.instance_perturbation = f.perturbation;
    const auto placements = small_placements(20, 5, 3, 100.0, f.seed);
    const auto r = run_monte_carlo_suite(placements, f.mc_samples, f.seed, opts);
    d.str("");
    d << "agreeing=" << r.agreeing() << '/' << r.cases.size() << " max_abs_z=" << r.max_abs_z()
      << " samples=" << f.mc_samples << " perturbation=" << f.perturbation;
    line(r.cases.size() == 20 && r.agreeing() >= 19, "montecarlo", d.str());
  }
  if (want("audit")) {
    const auto r = run_constraint_audit(f.audit_placements, f.seed);
    d.str("");
    d << "placements=" << r.placements << " accepted=" << r.accepted << " violations=" << r.violations
      << " ledger_errors=" << r.ledger_errors;
    line(r.passed(), "audit", d.str());
    for (const auto& p : r.first_problems) out << "  " << p << '\n';
  }
  if (want("monotonicity")) {
    const auto r = run_backup_monotonicity(1000, f.seed);
    d.str("");
    d << "cases=" << r.cases << " decreases=" << r.decreases << " worst_drop=" << r.worst_drop;
    line(r.passed() && r.cases == 1000, "monotonicity", d.str());
  }
  return all_ok ? kExitOk : kExitSuiteFailure;
}

int cmd_gen_topology(const ConfigFlags& flags, const std::string& output, std::ostream& out) {
  const SimConfig cfg = flags.build();
  InfrastructureNetwork net = generate_er_topology(cfg.node_count, cfg.edge_prob, cfg.topology, cfg.seed);
  net.set_access_nodes(select_access_nodes(net, cfg.access_fraction));
  const std::string text = topology_to_json(net) + "\n";
  if (output.empty() || output == "-") {
    out << text;
  } else {
    write_file(output, text);
  }
  return kExitOk;
}

int cmd_gen_workload(const ConfigFlags& flags, const std::string& topology_path, const std::string& output,
                     std::ostream& out) {
  const SimConfig cfg = flags.build();
  std::vector<NodeId> access;
  if (!topology_path.empty()) {
    try {
      access = topology_from_json(read_file(topology_path)).access_nodes();
    } catch (const ParseError& e) {
      throw ConfigError(topology_path + ": " + e.what());
    }
  } else {
    InfrastructureNetwork net = generate_er_topology(cfg.node_count, cfg.edge_prob, cfg.topology, cfg.seed);
    access = select_access_nodes(net, cfg.access_fraction);
  }
  if (access.empty()) throw ConfigError("the topology has no access nodes");
  const auto arrivals = generate_arrivals(cfg.request_count, cfg.arrival_rate, cfg.seed ^ 0x5eedULL);
  std::mt19937_64 rng(cfg.seed);
  std::vector<ServiceRequest> reqs;
  for (int i = 0; i < cfg.request_count; ++i) {
    ServiceRequest r = generate_request(cfg.workload, access, rng, i);
    r.arrival_time = arrivals[static_cast<std::size_t>(i)];
    reqs.push_back(std::move(r));
  }
  const std::string text = requests_to_json(reqs) + "\n";
  if (output.empty() || output == "-") {
    out << text;
  } else {
    write_file(output, text);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reliability-aware microservice placement simulator"};
  app.name(args.empty() ? "msplace" : std::filesystem::path(args[0]).filename().string());
  app.require_subcommand(1);

  std::string out_dir = default_output_dir();

  ConfigFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "run repetitions of one configuration");
  sim_flags.attach(*simulate, true);
  simulate->add_option("-o,--output-dir", out_dir, "directory for steps.csv and summary.json");

  ConfigFlags sweep_flags;
  std::string axis = "none";
  std::vector<double> values;
  std::vector<std::string> algorithms{"SRP", "DAIP", "RRSP", "Grd", "Grd-B"};
  auto* sweep = app.add_subcommand("sweep", "compare algorithms over a parameter sweep");
  sweep_flags.attach(*sweep, true);
  sweep->add_option("--axis", axis, "none, edge_prob, node_count, cpu_multiplier, bw_multiplier or backup_mode");
  sweep->add_option("--values", values, "sweep points (backup_mode: 0 = full, 1 = random)")->delimiter(',');
  sweep->add_option("--algorithms", algorithms, "algorithms, optionally with /shared or /fully-protected")
      ->delimiter(',');
  sweep->add_option("-o,--output-dir", out_dir, "directory for the per-run CSVs and summary.csv");

  ValidateFlags vflags;
  auto* validate = app.add_subcommand("validate", "run the model validation suites");
  validate->add_option("--suite", vflags.suite, "all, operators, matrix, montecarlo, audit or monotonicity")
      ->check(CLI::IsMember({"all", "operators", "matrix", "montecarlo", "audit", "monotonicity"}));
  validate->add_option("--perturb", vflags.perturbation,
                       "relative perturbation of every instance reliability on the analytic side");
  validate->add_option("--seed", vflags.seed, "suite seed");
  validate->add_option("--samples", vflags.mc_samples, "Monte Carlo samples per placement")
      ->check(CLI::PositiveNumber);
  validate->add_option("--audit-placements", vflags.audit_placements, "fuzzed placements for the audit")
      ->check(CLI::PositiveNumber);

  ConfigFlags topo_flags;
  std::string topo_out;
  auto* gen_topo = app.add_subcommand("gen-topology", "write a random topology as JSON");
  topo_flags.attach(*gen_topo, false);
  gen_topo->add_option("-o,--output", topo_out, "output file (default stdout)");

  ConfigFlags wl_flags;
  std::string wl_topology;
  std::string wl_out;
  auto* gen_wl = app.add_subcommand("gen-workload", "write random service requests as JSON");
  wl_flags.attach(*gen_wl, false);
  gen_wl->add_option("--topology", wl_topology, "topology JSON supplying the access nodes")
      ->check(CLI::ExistingFile);
  gen_wl->add_option("-o,--output", wl_out, "output file (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfigError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_flags, out_dir, out);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, axis, values, algorithms, out_dir, out);
    if (validate->parsed()) return cmd_validate(vflags, out);
    if (gen_topo->parsed()) return cmd_gen_topology(topo_flags, topo_out, out);
    if (gen_wl->parsed()) return cmd_gen_workload(wl_flags, wl_topology, wl_out, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace msplace::cli
