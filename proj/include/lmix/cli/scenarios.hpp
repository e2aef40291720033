#ifndef LMIX_CLI_SCENARIOS_HPP
#define LMIX_CLI_SCENARIOS_HPP

#include "lmix/mixture_estimator.hpp"

#include "json.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace lmix::cli {

/// A published simulation setting: true law, semiparametric model, box and
/// start list. φ is always (λ, θ_free, α_free).
struct Scenario {
  std::string name;
  std::string description;
  MixtureSpec truth;
  SemiparametricModel model;
  ParameterSpace space;
  std::vector<Eigen::VectorXd> starts;
  std::size_t default_n;
};

std::vector<std::string> scenario_names();

/// Throws InputError for an unknown name.
Scenario make_scenario(std::string_view name);

/// Explicit scenario from a JSON object:
///   {"name": "...", "lambda": 0.3, "n": 1000, "orders": [2, 3, 4],
///    "parametric": {"family": "weibull", "params": {"shape": 1.5}, "free": ["shape"]},
///    "unknown": {"family": "lognormal", "params": {"mu": 3, "sigma": 0.5}, "free": ["mu"]},
///    "lambda_bounds": [0.005, 0.995], "starts": [[0.5, 1, 2]]}
/// Only name, n, orders, lambda_bounds and starts are optional. The true point
/// and every start must lie inside the box.
Scenario scenario_from_json(const nlohmann::json& doc);

}  // namespace lmix::cli

#endif  // LMIX_CLI_SCENARIOS_HPP
