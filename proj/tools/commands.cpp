#include "lmix/cli/commands.hpp"

#include "lmix/asymptotics.hpp"
#include "lmix/cli/io.hpp"
#include "lmix/cli/scenarios.hpp"
#include "lmix/cli/simulation.hpp"
#include "lmix/errors.hpp"
#include "lmix/splq_estimator.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace lmix::cli {

namespace {

ComponentDistribution family_default(std::string_view name) {
  switch (parse_family(name)) {
    case Family::weibull: return ComponentDistribution::weibull(1.0, 1.0);
    case Family::two_sided_weibull: return ComponentDistribution::two_sided_weibull(1.0, 1.0);
    case Family::lognormal: return ComponentDistribution::lognormal(0.0, 1.0);
    case Family::gaussian: return ComponentDistribution::gaussian(0.0, 1.0);
    case Family::exponential: return ComponentDistribution::exponential(1.0);
  }
  throw InputError("unknown family");
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

/// "scale=0.5,shape=2" applied on top of the family defaults.
ComponentDistribution component(const std::string& family, const std::string& params, const std::string& free) {
  ComponentDistribution d = family_default(family);
  for (const auto& item : split_names(params)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("parameter '" + item + "' must look like name=value");
    const auto value = parse_number_list(item.substr(eq + 1), "parameter " + item.substr(0, eq));
    if (value.size() != 1) throw InputError("parameter '" + item + "' takes one value");
    d = d.with_param(item.substr(0, eq), value[0]);
  }
  d.set_free(split_names(free));
  return d;
}

std::vector<int> parse_orders(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_number_list(text, "orders")) {
    if (v != std::floor(v)) throw InputError("orders must be integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<Eigen::VectorXd> parse_starts(const std::vector<std::string>& texts) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& t : texts) {
    const auto v = parse_number_list(t, "start");
    out.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return out;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty())
    out << text;
  else
    write_text_file(path, text);
}

struct EstimateArgs {
  std::string data, scenario, divergence = "chi2", out;
  std::string parametric, parametric_params, parametric_free;
  std::string unknown, unknown_params, unknown_free;
  std::string orders = "2,3,4", lambda_bounds;
  std::vector<std::string> starts;
  bool asymptotics = false;
  int jobs = 1;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  const std::vector<double> data = read_data_file(a.data);
  std::optional<SemiparametricModel> model;
  std::optional<ParameterSpace> space;
  std::vector<Eigen::VectorXd> starts = parse_starts(a.starts);
  if (!a.scenario.empty()) {
    const Scenario sc = make_scenario(a.scenario);
    model = sc.model;
    space = sc.space;
    if (starts.empty()) starts = sc.starts;
  } else {
    if (a.parametric.empty() || a.unknown.empty())
      throw InputError("estimate needs --scenario or both --parametric and --unknown");
    model.emplace(component(a.parametric, a.parametric_params, a.parametric_free),
                  ConstraintModel(component(a.unknown, a.unknown_params, a.unknown_free), parse_orders(a.orders)));
    space = ParameterSpace::defaults(*model);
    if (starts.empty()) {
      SemiparametricModel::Point p{0.5, model->parametric_template().free_values(),
                                   model->constraints().family_template().free_values()};
      starts.push_back(model->join(p));
    }
  }
  if (!a.lambda_bounds.empty()) {
    const auto b = parse_number_list(a.lambda_bounds, "lambda-bounds");
    if (b.size() != 2) throw InputError("lambda-bounds takes lo,hi");
    space = space->with_lambda(b[0], b[1]);
  }
  EstimationOptions opt;
  opt.generator = DivergenceGenerator::parse(a.divergence);
  opt.jobs = a.jobs;
  const EstimationResult r = estimate(data, *model, *space, starts, opt);
  nlohmann::json j = estimation_json(*model, r);
  j["n"] = data.size();
  j["divergence"] = opt.generator.name();
  if (a.asymptotics) {
    const EmpiricalCdf fn(data);
    j["asymptotics"] = asymptotics_json(r.names, asymptotic_report(*model, r.phi, fn, data.size()));
  }
  emit(a.out, j.dump(2) + "\n", out);
  return kExitOk;
}

struct DistArgs {
  std::string family, orders = "2,3,4";
  std::map<std::string, double> params;
};

int cmd_lmom_dist(const DistArgs& a, std::ostream& out) {
  ComponentDistribution d = family_default(a.family);
  for (const auto& [name, value] : a.params) d = d.with_param(name, value);
  const std::vector<int> orders = parse_orders(a.orders);
  const Eigen::VectorXd l = component_lmoments(d, orders);
  nlohmann::json j;
  j["family"] = std::string(family_name(d.family()));
  j["params"] = named_json(d.param_names(), d.params());
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < orders.size(); ++i)
    arr.push_back({{"order", orders[i]}, {"value", number(l[static_cast<Eigen::Index>(i)])}});
  j["lmoments"] = arr;
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_lmom_sample(const std::string& path, int max_order, std::ostream& out) {
  const std::vector<double> data = read_data_file(path);
  const LMomentVector l = sample_lmoments(data, max_order);
  nlohmann::json j;
  j["n"] = data.size();
  auto arr = nlohmann::json::array();
  for (int r = 1; r <= max_order; ++r) arr.push_back({{"order", r}, {"value", number(l.at(r))}});
  j["lmoments"] = arr;
  out << j.dump(2) << "\n";
  return kExitOk;
}

struct CurveArgs {
  double lambda_star = 0.0, a1_star = 0.0, a0_star = 0.0, step = 0.001;
  CurveOptions options;
  std::string out;
};

int cmd_identifiability(const CurveArgs& a, std::ostream& out) {
  if (!(a.step > 0.0 && a.step < 0.5)) throw InputError("lambda-step must lie in (0, 0.5)");
  // i / cells keeps grid values such as 0.7 exact when the step divides 1.
  const double cells = std::round(1.0 / a.step);
  const bool exact = std::abs(cells * a.step - 1.0) < 1e-9;
  std::vector<double> grid;
  for (int i = 1; i * a.step < 1.0 - 1e-12; ++i) grid.push_back(exact ? i / cells : i * a.step);
  const auto pts = identifiability_curve_exponential(a.lambda_star, a.a1_star, a.a0_star, grid, a.options);
  std::ostringstream csv;
  csv << "lambda,a1,residual,phi_plus\n";
  for (const auto& p : pts)
    csv << format_number(p.lambda) << ',' << format_number(p.rate) << ',' << format_number(p.residual) << ','
        << (p.phi_plus ? 1 : 0) << '\n';
  emit(a.out, csv.str(), out);
  return kExitOk;
}

struct SplqArgs {
  std::string data, family = "weibull", params, free = "scale,shape", orders = "2,3,4", divergence = "chi2", out;
  std::vector<std::string> starts;
  int jobs = 1;
};

int cmd_splq(const SplqArgs& a, std::ostream& out) {
  const std::vector<double> data = read_data_file(a.data);
  const ConstraintModel model(component(a.family, a.params, a.free), parse_orders(a.orders));
  EstimationOptions opt;
  opt.generator = DivergenceGenerator::parse(a.divergence);
  opt.jobs = a.jobs;
  const SplqFit fit = splq_fit(data, model, default_alpha_box(model), parse_starts(a.starts), opt);
  nlohmann::json j = splq_json(fit);
  j["n"] = data.size();
  j["divergence"] = opt.generator.name();
  emit(a.out, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_simulate(SimulationConfig config, std::ostream& out) {
  const SimulationReport report = run_simulation(config);
  const std::string json = simulation_json(report).dump(2) + "\n";
  if (config.out.empty()) {
    out << json;
  } else {
    write_text_file(config.out + ".csv", simulation_csv(report));
    write_text_file(config.out + ".json", json);
    for (const auto& c : report.summary)
      out << c.name << ": mean " << format_number(c.mean) << " sd " << (c.sd ? format_number(*c.sd) : "-") << '\n';
  }
  return report.failed() ? kExitEstimation : kExitOk;
}

int cmd_scenarios(std::ostream& out) {
  for (const auto& name : scenario_names()) {
    const Scenario s = make_scenario(name);
    out << name << "  n=" << s.default_n << "  " << s.description << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semiparametric two-component mixtures under L-moment constraints"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Estimate (lambda, theta, alpha) from a data file");
  c_est->add_option("--data", est.data, "CSV file, one value per line, optional header x")->required();
  c_est->add_option("--scenario", est.scenario, "Take model, box and starts from a named scenario");
  c_est->add_option("--parametric", est.parametric, "Parametric family");
  c_est->add_option("--parametric-params", est.parametric_params, "name=value,... for the parametric family");
  c_est->add_option("--parametric-free", est.parametric_free, "Comma-separated free parameters (theta)");
  c_est->add_option("--unknown", est.unknown, "Family of the L-moment model of the unknown component");
  c_est->add_option("--unknown-params", est.unknown_params, "name=value,... for the unknown family");
  c_est->add_option("--unknown-free", est.unknown_free, "Comma-separated free parameters (alpha)");
  c_est->add_option("--orders", est.orders, "L-moment orders used as constraints");
  c_est->add_option("--start", est.starts, "Start point lambda,theta...,alpha... (repeatable)");
  c_est->add_option("--lambda-bounds", est.lambda_bounds, "lo,hi inside [0.005, 0.995]");
  c_est->add_option("--divergence", est.divergence, "chi2 | kl | modified-kl | hellinger | cr:<gamma>");
  c_est->add_option("--jobs", est.jobs, "Parallel starts");
  c_est->add_flag("--asymptotics", est.asymptotics, "Add the plug-in asymptotic covariance");
  c_est->add_option("--out", est.out, "Write JSON here instead of stdout");

  auto* c_lmom = app.add_subcommand("lmom", "L-moments of a distribution or a sample");
  c_lmom->require_subcommand(1);
  DistArgs dist;
  std::map<std::string, double> dist_values;
  auto* c_dist = c_lmom->add_subcommand("dist", "Population L-moments of a family");
  c_dist->add_option("family", dist.family, "weibull | two-sided-weibull | lognormal | gaussian | exponential")
      ->required();
  for (const char* p : {"scale", "shape", "mu", "sigma", "rate"})
    c_dist->add_option(std::string("--") + p, dist_values[p], std::string("Parameter ") + p);
  c_dist->add_option("--orders", dist.orders, "Comma-separated orders");
  std::string sample_path;
  int sample_order = 4;
  auto* c_sample = c_lmom->add_subcommand("sample", "Unbiased sample L-moments of a data file");
  c_sample->add_option("file", sample_path, "CSV file")->required();
  c_sample->add_option("--max-order", sample_order, "Highest order");

  CurveArgs curve;
  auto* c_curve = app.add_subcommand("identifiability-expo", "Identifiability curve of a two-exponential mixture");
  c_curve->add_option("--lambda-star", curve.lambda_star, "True weight of the first component")->required();
  c_curve->add_option("--a1-star", curve.a1_star, "True rate of the first component")->required();
  c_curve->add_option("--a0-star", curve.a0_star, "True rate of the second component")->required();
  c_curve->add_option("--lambda-step", curve.step, "Grid step for lambda in (0, 1)");
  c_curve->add_option("--rate-lo", curve.options.rate_lo, "Lower end of the a1 scan");
  c_curve->add_option("--rate-hi", curve.options.rate_hi, "Upper end of the a1 scan");
  c_curve->add_option("--scan", curve.options.scan_points, "Scan points for sign changes");
  c_curve->add_option("--out", curve.out, "Write CSV here instead of stdout");

  SplqArgs splq;
  auto* c_splq = app.add_subcommand("splq-fit", "Fit an L-moment model by the spacing-sum plug-in");
  c_splq->add_option("--data", splq.data, "CSV file")->required();
  c_splq->add_option("--family", splq.family, "Model family");
  c_splq->add_option("--params", splq.params, "name=value,... for fixed parameters and start values");
  c_splq->add_option("--free", splq.free, "Comma-separated free parameters");
  c_splq->add_option("--orders", splq.orders, "L-moment orders used as constraints");
  c_splq->add_option("--start", splq.starts, "Start point (repeatable)");
  c_splq->add_option("--divergence", splq.divergence, "Divergence");
  c_splq->add_option("--jobs", splq.jobs, "Parallel starts");
  c_splq->add_option("--out", splq.out, "Write JSON here instead of stdout");

  SimulationConfig sim;
  std::string config_path;
  std::size_t sim_n = 0;
  bool no_timing = false;
  std::vector<std::string> sim_starts;
  auto* c_sim = app.add_subcommand("simulate", "Replicated estimation on a named scenario");
  auto* o_scenario = c_sim->add_option("--scenario", sim.scenario, "Scenario name (see `scenarios`)");
  auto* o_reps = c_sim->add_option("--reps", sim.reps, "Replications");
  auto* o_n = c_sim->add_option("--n", sim_n, "Sample size (scenario default when omitted)");
  auto* o_seed = c_sim->add_option("--seed", sim.seed, "Master seed");
  auto* o_jobs = c_sim->add_option("--jobs", sim.jobs, "Parallel replications");
  auto* o_div = c_sim->add_option("--divergence", sim.divergence, "Divergence");
  auto* o_asym = c_sim->add_flag("--asymptotics", sim.asymptotics, "Plug-in standard errors per replication");
  auto* o_notime = c_sim->add_flag("--no-timing", no_timing, "Report zero seconds so output is byte-reproducible");
  auto* o_out = c_sim->add_option("--out", sim.out, "Output prefix: writes <prefix>.csv and <prefix>.json");
  auto* o_starts = c_sim->add_option("--start", sim_starts, "Start point (repeatable)");
  c_sim->add_option("--config", config_path, "JSON config; flags override its values");

  auto* c_list = app.add_subcommand("scenarios", "List the built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (c_est->parsed()) return cmd_estimate(est, out);
    if (c_dist->parsed()) {
      for (const auto& [name, value] : dist_values)
        if (c_dist->get_option("--" + name)->count() > 0) dist.params[name] = value;
      return cmd_lmom_dist(dist, out);
    }
    if (c_sample->parsed()) return cmd_lmom_sample(sample_path, sample_order, out);
    if (c_curve->parsed()) return cmd_identifiability(curve, out);
    if (c_splq->parsed()) return cmd_splq(splq, out);
    if (c_list->parsed()) return cmd_scenarios(out);
    if (c_sim->parsed()) {
      SimulationConfig cfg;
      if (!config_path.empty()) cfg = config_from_json(read_json_file(config_path));
      if (o_scenario->count()) {
        cfg.scenario = sim.scenario;
        cfg.custom.reset();
      }
      if (o_reps->count()) cfg.reps = sim.reps;
      if (o_n->count()) cfg.n = sim_n;
      if (o_seed->count()) cfg.seed = sim.seed;
      if (o_jobs->count()) cfg.jobs = sim.jobs;
      if (o_div->count()) cfg.divergence = sim.divergence;
      if (o_asym->count()) cfg.asymptotics = true;
      if (o_notime->count() && no_timing) cfg.timing = false;
      if (o_out->count()) cfg.out = sim.out;
      if (o_starts->count()) cfg.starts = parse_starts(sim_starts);
      return cmd_simulate(cfg, out);
    }
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    err << "estimation failed: " << e.what() << '\n';
    return kExitEstimation;
  }
  return kExitInput;
}

}  // namespace lmix::cli
