#include "lmix/cli/simulation.hpp"

#include "lmix/cli/io.hpp"
#include "lmix/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

namespace lmix::cli {

void SimulationConfig::validate() const {
  if (scenario.empty() && !custom) throw InputError("a scenario is required");
  if (reps < 1) throw InputError("reps must be at least 1");
  if (jobs < 1) throw InputError("jobs must be at least 1");
  if (n && *n < 30) throw InputError("n must be at least 30");
  (void)DivergenceGenerator::parse(divergence);
}

SimulationConfig config_from_json(const nlohmann::json& doc, SimulationConfig base) {
  if (!doc.is_object()) throw InputError("config must be a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "scenario") {
        base.scenario = value.get<std::string>();
      } else if (key == "reps") {
        base.reps = value.get<std::size_t>();
      } else if (key == "n") {
        base.n = value.get<std::size_t>();
      } else if (key == "seed") {
        base.seed = value.get<std::uint64_t>();
      } else if (key == "jobs") {
        base.jobs = value.get<int>();
      } else if (key == "divergence") {
        base.divergence = value.get<std::string>();
      } else if (key == "asymptotics") {
        base.asymptotics = value.get<bool>();
      } else if (key == "timing") {
        base.timing = value.get<bool>();
      } else if (key == "out") {
        base.out = value.get<std::string>();
      } else if (key == "custom") {
        base.custom = scenario_from_json(value);
      } else if (key == "starts") {
        std::vector<Eigen::VectorXd> starts;
        for (const auto& s : value) {
          const auto v = s.get<std::vector<double>>();
          starts.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
        }
        base.starts = std::move(starts);
      } else {
        throw InputError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config value has the wrong type: ") + e.what());
  }
  return base;
}

Scenario resolve_scenario(const SimulationConfig& config) {
  return config.custom ? *config.custom : make_scenario(config.scenario);
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t k) {
  return splitmix64(master + static_cast<std::uint64_t>(k));
}

AsymptoticSummary summarize(const AsymptoticReport& rep) {
  AsymptoticSummary s;
  s.standard_errors = rep.standard_errors;
  s.sigma_asymmetry = (rep.sigma - rep.sigma.transpose()).cwiseAbs().maxCoeff();
  s.covariance_asymmetry = (rep.covariance - rep.covariance.transpose()).cwiseAbs().maxCoeff();
  s.sigma_min_eigenvalue = relative_min_eigenvalue(rep.sigma);
  s.covariance_min_eigenvalue = relative_min_eigenvalue(rep.covariance);
  s.pj_max = (rep.p * rep.jacobian).cwiseAbs().maxCoeff();
  s.condition_omega = rep.condition_omega;
  s.condition_information = rep.condition_information;
  s.richardson = rep.richardson;
  return s;
}

std::vector<ColumnSummary> summarize_columns(const std::vector<std::string>& names,
                                             const std::vector<std::vector<double>>& rows) {
  std::vector<ColumnSummary> out;
  for (std::size_t c = 0; c < names.size(); ++c) {
    ColumnSummary s;
    s.name = names[c];
    double sum = 0.0;
    for (const auto& r : rows) sum += r[c];
    s.count = rows.size();
    if (s.count > 0) s.mean = sum / static_cast<double>(s.count);
    if (s.count > 1) {
      double ss = 0.0;
      for (const auto& r : rows) ss += (r[c] - s.mean) * (r[c] - s.mean);
      s.sd = std::sqrt(ss / static_cast<double>(s.count - 1));
    }
    out.push_back(s);
  }
  return out;
}

namespace {

ReplicationRow run_replication(const Scenario& sc, const SimulationConfig& config, std::size_t n,
                               const std::vector<Eigen::VectorXd>& starts, const EstimationOptions& options,
                               std::size_t k) {
  ReplicationRow row;
  row.rep = k;
  row.seed = replication_seed(config.seed, k);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const std::vector<double> data = sample_mixture(sc.truth, n, row.seed);
    row.result = estimate(data, sc.model, sc.space, starts, options);
    row.ok = true;
    if (config.asymptotics) {
      try {
        const EmpiricalCdf fn(data);
        row.asymptotics = summarize(asymptotic_report(sc.model, row.result.phi, fn, n));
      } catch (const Error& e) {
        row.asymptotics_error = e.what();
      }
    }
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  if (config.timing) row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::vector<double> row_values(const ReplicationRow& r, bool with_se) {
  std::vector<double> v{r.result.lambda};
  for (Eigen::Index i = 0; i < r.result.theta.size(); ++i) v.push_back(r.result.theta[i]);
  for (Eigen::Index i = 0; i < r.result.alpha.size(); ++i) v.push_back(r.result.alpha[i]);
  v.push_back(r.result.objective);
  if (with_se)
    for (Eigen::Index i = 0; i < r.asymptotics->standard_errors.size(); ++i)
      v.push_back(r.asymptotics->standard_errors[i]);
  return v;
}

std::vector<std::string> value_names(const SimulationReport& report, bool with_se) {
  std::vector<std::string> names = report.parameter_names;
  names.push_back("objective");
  if (with_se)
    for (const auto& p : report.parameter_names) names.push_back("se." + p);
  return names;
}

}  // namespace

SimulationReport run_simulation(const SimulationConfig& config) {
  config.validate();
  const Scenario sc = resolve_scenario(config);
  SimulationReport report;
  report.config = config;
  report.scenario_description = sc.description;
  report.n = config.n.value_or(sc.default_n);
  report.parameter_names = sc.model.parameter_names();
  const std::vector<Eigen::VectorXd> starts = config.starts.value_or(sc.starts);
  EstimationOptions options;
  options.generator = DivergenceGenerator::parse(config.divergence);

  report.rows.resize(config.reps);
  const int jobs = std::clamp(config.jobs, 1, static_cast<int>(config.reps));
  if (jobs == 1) {
    for (std::size_t k = 1; k <= config.reps; ++k)
      report.rows[k - 1] = run_replication(sc, config, report.n, starts, options, k);
  } else {
    std::atomic<std::size_t> next{1};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k <= config.reps; k = next++)
          report.rows[k - 1] = run_replication(sc, config, report.n, starts, options, k);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<std::vector<double>> values, se_values;
  for (const auto& r : report.rows) {
    if (!r.ok) {
      ++report.failures;
      continue;
    }
    values.push_back(row_values(r, false));
  }
  report.summary = summarize_columns(value_names(report, false), values);
  if (config.asymptotics) {
    for (const auto& r : report.rows)
      if (r.ok && r.asymptotics) se_values.push_back(row_values(r, true));
    const auto names = value_names(report, true);
    const auto with_se = summarize_columns(names, se_values);
    for (std::size_t c = report.summary.size(); c < with_se.size(); ++c) report.summary.push_back(with_se[c]);
  }
  return report;
}

std::string simulation_csv(const SimulationReport& report) {
  std::ostringstream out;
  out << "rep";
  for (const auto& p : report.parameter_names) out << ',' << p;
  out << ",objective,phi_plus,seconds";
  if (report.config.asymptotics)
    for (const auto& p : report.parameter_names) out << ",se." << p;
  out << '\n';
  const std::size_t width = report.parameter_names.size() + 3;
  for (const auto& r : report.rows) {
    out << r.rep;
    if (r.ok) {
      const auto v = row_values(r, false);
      for (double x : v) out << ',' << format_number(x);
      out << ',' << (r.result.phi_plus ? 1 : 0) << ',' << format_number(r.seconds);
    } else {
      for (std::size_t i = 0; i < width; ++i) out << ',';
    }
    if (report.config.asymptotics) {
      for (std::size_t i = 0; i < report.parameter_names.size(); ++i) {
        out << ',';
        if (r.ok && r.asymptotics) out << format_number(r.asymptotics->standard_errors[static_cast<Eigen::Index>(i)]);
      }
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json simulation_json(const SimulationReport& report) {
  const Scenario sc = resolve_scenario(report.config);
  nlohmann::json j;
  j["scenario"] = sc.name;
  j["description"] = report.scenario_description;
  j["n"] = report.n;
  j["reps"] = report.config.reps;
  j["seed"] = report.config.seed;
  j["divergence"] = DivergenceGenerator::parse(report.config.divergence).name();
  j["parameter_names"] = report.parameter_names;
  j["timing"] = report.config.timing;
  j["failures"] = report.failures;
  j["failed"] = report.failed();
  auto summary = nlohmann::json::object();
  for (const auto& c : report.summary)
    summary[c.name] = {{"mean", c.count > 0 ? number(c.mean) : nlohmann::json(nullptr)},
                       {"sd", c.sd ? number(*c.sd) : nlohmann::json(nullptr)},
                       {"count", c.count}};
  j["summary"] = summary;
  auto rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json row{{"rep", r.rep}, {"seed", r.seed}, {"ok", r.ok}, {"seconds", number(r.seconds)}};
    if (r.ok) {
      row["estimate"] = estimation_json(sc.model, r.result);
    } else {
      row["error"] = r.error;
    }
    if (r.asymptotics) {
      const AsymptoticSummary& a = *r.asymptotics;
      row["asymptotics"] = {{"standard_errors", named_json(report.parameter_names, a.standard_errors)},
                            {"sigma_asymmetry", number(a.sigma_asymmetry)},
                            {"covariance_asymmetry", number(a.covariance_asymmetry)},
                            {"sigma_min_eigenvalue", number(a.sigma_min_eigenvalue)},
                            {"covariance_min_eigenvalue", number(a.covariance_min_eigenvalue)},
                            {"pj_max", number(a.pj_max)},
                            {"condition_omega", number(a.condition_omega)},
                            {"condition_information", number(a.condition_information)},
                            {"richardson", number(a.richardson)},
                            {"plug_in", true}};
    } else if (!r.asymptotics_error.empty()) {
      row["asymptotics_error"] = r.asymptotics_error;
    }
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

}  // namespace lmix::cli
