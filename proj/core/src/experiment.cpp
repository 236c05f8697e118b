#include "msplace/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "msplace/serialization.hpp"

namespace msplace {

std::string_view sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNone:
      return "none";
    case SweepAxis::kEdgeProb:
      return "edge_prob";
    case SweepAxis::kNodeCount:
      return "node_count";
    case SweepAxis::kCpuMultiplier:
      return "cpu_multiplier";
    case SweepAxis::kBwMultiplier:
      return "bw_multiplier";
    case SweepAxis::kBackupMode:
      return "backup_mode";
  }
  return "none";
}

std::optional<SweepAxis> parse_sweep_axis(std::string_view name) {
  for (SweepAxis a : {SweepAxis::kNone, SweepAxis::kEdgeProb, SweepAxis::kNodeCount, SweepAxis::kCpuMultiplier,
                      SweepAxis::kBwMultiplier, SweepAxis::kBackupMode}) {
    if (sweep_axis_name(a) == name) return a;
  }
  return std::nullopt;
}

std::string contender_label(const Contender& c) {
  std::string out(algorithm_name(c.algorithm));
  if (c.algorithm != Algorithm::kSrpS && c.mechanism == Mechanism::kShared) out += "/shared";
  return out;
}

std::optional<Contender> parse_contender(std::string_view text) {
  Contender c;
  const auto slash = text.find('/');
  const auto alg = parse_algorithm(text.substr(0, slash));
  if (!alg) return std::nullopt;
  c.algorithm = *alg;
  if (slash != std::string_view::npos) {
    const auto mech = parse_mechanism(text.substr(slash + 1));
    if (!mech) return std::nullopt;
    c.mechanism = *mech;
  }
  if (c.algorithm == Algorithm::kSrpS) c.mechanism = Mechanism::kShared;
  return c;
}

void ExperimentSpec::validate() const {
  base.validate();
  if (contenders.empty()) throw std::invalid_argument("at least one algorithm is required");
  if (axis == SweepAxis::kNone && !values.empty()) throw std::invalid_argument("sweep values given without an axis");
  if (axis != SweepAxis::kNone && values.empty()) throw std::invalid_argument("sweep axis given without values");
  for (double v : values) apply_sweep_point(base, axis, v).validate();
}

SimConfig apply_sweep_point(const SimConfig& base, SweepAxis axis, double value) {
  SimConfig cfg = base;
  switch (axis) {
    case SweepAxis::kNone:
      break;
    case SweepAxis::kEdgeProb:
      cfg.edge_prob = value;
      break;
    case SweepAxis::kNodeCount:
      if (value != std::floor(value)) throw std::invalid_argument("node_count sweep values must be integers");
      cfg.node_count = static_cast<int>(value);
      break;
    case SweepAxis::kCpuMultiplier:
      cfg.workload.cpu_multiplier = value;
      break;
    case SweepAxis::kBwMultiplier:
      cfg.workload.bw_multiplier = value;
      break;
    case SweepAxis::kBackupMode:
      if (value != 0.0 && value != 1.0) throw std::invalid_argument("backup_mode values are 0 (full) or 1 (random)");
      cfg.workload.backup_mode = value == 0.0 ? BackupMode::kFull : BackupMode::kRandom;
      break;
  }
  return cfg;
}

std::string sweep_value_label(SweepAxis axis, double value) {
  if (axis == SweepAxis::kNone) return "-";
  if (axis == SweepAxis::kBackupMode) return value == 0.0 ? "full" : "random";
  std::ostringstream os;
  os << value;
  return os.str();
}

std::string summary_row_csv(const SummaryRow& row) {
  std::ostringstream os;
  os << std::setprecision(10) << row.sweep_axis << ',' << row.sweep_value << ',' << row.algorithm << ','
     << row.mean_total_failures << ',' << row.mean_bandwidth << ',' << row.success_rate;
  return os.str();
}

std::vector<SummaryRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::filesystem::create_directories(spec.output_dir);
  std::ofstream summary(spec.output_dir / "summary.csv");
  if (!summary) throw std::runtime_error("cannot write " + (spec.output_dir / "summary.csv").string());
  summary << kSummaryCsvHeader << '\n' << std::flush;

  const std::vector<double> points = spec.axis == SweepAxis::kNone ? std::vector<double>{0.0} : spec.values;
  std::vector<SummaryRow> rows;
  for (double v : points) {
    for (const auto& c : spec.contenders) {
      SimConfig cfg = apply_sweep_point(spec.base, spec.axis, v);
      cfg.algorithm = c.algorithm;
      cfg.mechanism = c.mechanism;
      const SimResult res = run_batch(cfg);

      SummaryRow row;
      row.sweep_axis = std::string(sweep_axis_name(spec.axis));
      row.sweep_value = sweep_value_label(spec.axis, v);
      row.algorithm = contender_label(c);
      row.mean_total_failures = res.total_failures();
      row.mean_bandwidth = res.mean_bandwidth();
      const double offered = res.placements_succeeded + res.placements_rejected;
      row.success_rate = offered > 0.0 ? res.placements_succeeded / offered : 0.0;
      row.repetition_failures = res.repetition_failures;

      std::string file = row.algorithm;
      for (char& ch : file) {
        if (ch == '/') ch = '_';
      }
      if (spec.axis != SweepAxis::kNone) file = row.sweep_axis + "_" + row.sweep_value + "_" + file;
      std::ofstream(spec.output_dir / (file + ".csv")) << sim_result_csv(res);
      summary << summary_row_csv(row) << '\n' << std::flush;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

double sign_test_p(int wins, int losses) {
  const int n = wins + losses;
  if (n <= 0) return 1.0;
  // Sum of C(n, k) / 2^n for k >= wins, in log space.
  double p = 0.0;
  for (int k = wins; k <= n; ++k) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  }
  return std::min(1.0, p);
}

PairedComparison compare_paired(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in length");
  PairedComparison out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) {
      ++out.wins;
    } else if (a[i] > b[i]) {
      ++out.losses;
    } else {
      ++out.ties;
    }
  }
  return out;
}

}  // namespace msplace
