#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msplace/simulator.hpp"

namespace msplace {

enum class SweepAxis { kNone, kEdgeProb, kNodeCount, kCpuMultiplier, kBwMultiplier, kBackupMode };

[[nodiscard]] std::string_view sweep_axis_name(SweepAxis axis);
/// "none", "edge_prob", "node_count", "cpu_multiplier", "bw_multiplier", "backup_mode".
[[nodiscard]] std::optional<SweepAxis> parse_sweep_axis(std::string_view name);

/// One compared configuration: an algorithm and the mechanism it runs under.
struct Contender {
  Algorithm algorithm = Algorithm::kSrp;
  Mechanism mechanism = Mechanism::kFullyProtected;
};

/// Display label: the algorithm name, with "/shared" appended when a
/// non-SRP-S algorithm runs under the shared mechanism.
[[nodiscard]] std::string contender_label(const Contender& c);
/// Accepts "SRP", "SRP/shared", "DAIP/fully-protected", ...
[[nodiscard]] std::optional<Contender> parse_contender(std::string_view text);

struct ExperimentSpec {
  SimConfig base;
  SweepAxis axis = SweepAxis::kNone;
  /// Sweep points. For kBackupMode: 0 = full, 1 = random.
  std::vector<double> values;
  std::vector<Contender> contenders;
  std::filesystem::path output_dir;

  /// Throws std::invalid_argument when the experiment is unusable.
  void validate() const;
};

struct SummaryRow {
  std::string sweep_axis;
  std::string sweep_value;
  std::string algorithm;
  double mean_total_failures = 0.0;
  double mean_bandwidth = 0.0;
  double success_rate = 0.0;
  std::vector<double> repetition_failures;
};

inline constexpr std::string_view kSummaryCsvHeader =
    "sweep_axis,sweep_value,algorithm,mean_total_failures,mean_bandwidth,success_rate";

/// `base` with the sweep point applied.
[[nodiscard]] SimConfig apply_sweep_point(const SimConfig& base, SweepAxis axis, double value);
[[nodiscard]] std::string sweep_value_label(SweepAxis axis, double value);

/// Runs run_batch for every sweep point and contender, all on the base seed so
/// that contenders see paired repetitions. Writes one step CSV per run and
/// summary.csv into output_dir; summary rows are flushed as they complete so
/// an interrupted sweep keeps its finished points.
std::vector<SummaryRow> run_experiment(const ExperimentSpec& spec);

[[nodiscard]] std::string summary_row_csv(const SummaryRow& row);

/// One-sided exact sign test: P(X >= wins) for X ~ Binomial(wins + losses, 1/2).
/// Ties are dropped by the caller. 1 when there are no untied pairs.
[[nodiscard]] double sign_test_p(int wins, int losses);

struct PairedComparison {
  int wins = 0;    // pairs where a < b
  int losses = 0;  // pairs where a > b
  int ties = 0;
  [[nodiscard]] double p_value() const { return sign_test_p(wins, losses); }
};

/// Compares paired per-repetition values where lower is better for `a`.
[[nodiscard]] PairedComparison compare_paired(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace msplace
