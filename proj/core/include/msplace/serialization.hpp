#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "msplace/placement.hpp"
#include "msplace/simulator.hpp"
#include "msplace/topology.hpp"
#include "msplace/workload.hpp"

namespace msplace {

/// Thrown for malformed or semantically invalid JSON input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[nodiscard]] std::string topology_to_json(const InfrastructureNetwork& net);
/// Allocations are not part of the format; the loaded network is idle.
[[nodiscard]] InfrastructureNetwork topology_from_json(std::string_view text);

[[nodiscard]] std::string requests_to_json(std::span<const ServiceRequest> requests);
[[nodiscard]] std::vector<ServiceRequest> requests_from_json(std::string_view text);

/// Instances, routes, recorded sigmas and the placement-time reliability.
[[nodiscard]] std::string placement_to_json(const ServiceRequest& request, const PlacementOutcome& outcome);

/// Column header of the per-step CSV.
inline constexpr std::string_view kStepCsvHeader = "t,cumulative_failures,mean_bandwidth";
[[nodiscard]] std::string sim_result_csv(const SimResult& result);
[[nodiscard]] std::string sim_summary_json(const SimConfig& cfg, const SimResult& result);

[[nodiscard]] std::string sim_config_to_json(const SimConfig& cfg);
/// Overrides the fields present in `text` on top of `base`. Unknown keys are
/// rejected so that typos do not silently fall back to defaults.
[[nodiscard]] SimConfig sim_config_from_json(std::string_view text, SimConfig base = {});

[[nodiscard]] std::string_view mechanism_name(Mechanism m);
[[nodiscard]] std::optional<Mechanism> parse_mechanism(std::string_view name);

}  // namespace msplace
