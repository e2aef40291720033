#ifndef LMIX_CLI_SIMULATION_HPP
#define LMIX_CLI_SIMULATION_HPP

#include "lmix/asymptotics.hpp"
#include "lmix/cli/scenarios.hpp"
#include "lmix/mixture_estimator.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lmix::cli {

/// Every field has a JSON key of the same name (see config_from_json).
struct SimulationConfig {
  std::string scenario;
  std::optional<Scenario> custom;  // JSON key "custom"; takes the place of a named scenario
  std::size_t reps = 1;
  std::optional<std::size_t> n;  // scenario default when unset
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string divergence = "chi2";
  bool asymptotics = false;
  bool timing = true;
  std::optional<std::vector<Eigen::VectorXd>> starts;  // scenario list when unset
  std::string out;                                     // output prefix; empty means stdout

  void validate() const;
};

/// Reads a JSON object into `base`; unknown keys are rejected.
SimulationConfig config_from_json(const nlohmann::json& doc, SimulationConfig base = {});

/// The custom scenario when set, otherwise the named one.
Scenario resolve_scenario(const SimulationConfig& config);

/// Replication seed k (1-based): splitmix64(master + k).
std::uint64_t replication_seed(std::uint64_t master, std::size_t k);

struct AsymptoticSummary {
  Eigen::VectorXd standard_errors;
  double sigma_asymmetry = 0.0;        // max |Σ − Σᵗ|
  double covariance_asymmetry = 0.0;   // max |S − Sᵗ|
  double sigma_min_eigenvalue = 0.0;   // relative to the trace
  double covariance_min_eigenvalue = 0.0;
  double pj_max = 0.0;                 // max |P·J|
  double condition_omega = 0.0;
  double condition_information = 0.0;
  double richardson = 0.0;
};

AsymptoticSummary summarize(const AsymptoticReport& rep);

struct ReplicationRow {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  EstimationResult result;
  std::optional<AsymptoticSummary> asymptotics;
  std::string asymptotics_error;
  double seconds = 0.0;
};

struct ColumnSummary {
  std::string name;
  std::size_t count = 0;
  double mean = 0.0;
  std::optional<double> sd;  // sample sd; unset with fewer than two rows
};

struct SimulationReport {
  SimulationConfig config;
  std::string scenario_description;
  std::size_t n = 0;
  std::vector<std::string> parameter_names;
  std::vector<ReplicationRow> rows;
  std::vector<ColumnSummary> summary;
  std::size_t failures = 0;

  /// More than 20% of replications failed.
  bool failed() const { return failures * 5 > rows.size(); }
};

/// R replications from child seeds; failures are recorded per row. Rows are
/// ordered by replication index whatever the completion order.
SimulationReport run_simulation(const SimulationConfig& config);

/// Columns: rep, lambda, theta..., alpha..., objective, phi_plus, seconds, then
/// se.<name>... when asymptotics were requested. Failed rows carry empty fields.
std::string simulation_csv(const SimulationReport& report);
nlohmann::json simulation_json(const SimulationReport& report);

/// Column means and sds over successful rows.
std::vector<ColumnSummary> summarize_columns(const std::vector<std::string>& names,
                                             const std::vector<std::vector<double>>& rows);

}  // namespace lmix::cli

#endif  // LMIX_CLI_SIMULATION_HPP
