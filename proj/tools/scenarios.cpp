#include "lmix/cli/scenarios.hpp"

#include "lmix/errors.hpp"

#include <algorithm>
#include <sstream>

namespace lmix::cli {

namespace {

const std::vector<int> kOrders{2, 3, 4};

std::string short_number(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::vector<Eigen::VectorXd> points(std::initializer_list<std::initializer_list<double>> list) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& p : list) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(p.size()));
    Eigen::Index i = 0;
    for (double x : p) v[i++] = x;
    out.push_back(v);
  }
  return out;
}

Scenario build(std::string name, std::string description, double lambda_star, ComponentDistribution parametric,
               std::string_view parametric_free, ComponentDistribution unknown, std::string_view unknown_free,
               std::vector<Eigen::VectorXd> starts, std::size_t n) {
  MixtureSpec truth{lambda_star, parametric, unknown};
  ComponentDistribution p = parametric, u = unknown;
  p.set_free({parametric_free});
  u.set_free({unknown_free});
  SemiparametricModel model(p, ConstraintModel(u, kOrders));
  ParameterSpace space = ParameterSpace::defaults(model);
  return {std::move(name), std::move(description), truth, model, space, std::move(starts), n};
}

// Weibull-parametric / lognormal-unknown starts (λ, ν, μ): the published list
// plus the lognormal-parametric list mapped to the complementary weight.
std::vector<Eigen::VectorXd> weibull_lognormal_starts() {
  return points({{0.1, 0.5, 1.0},
                 {0.15, 0.5, 0.7},
                 {0.05, 1.5, 2.5},
                 {0.1, 1.0, 3.0},
                 {0.2, 1.0, 2.0},
                 {0.5, 1.0, 2.0},
                 {0.2, 1.0, 1.0},
                 {0.3, 1.5, 3.0},
                 {0.3, 2.0, 2.0},
                 {0.5, 2.0, 4.0},
                 {0.5, 2.0, 1.5}});
}

Scenario table2(std::string name, std::size_t n) {
  return build(std::move(name), "0.7 LN(mu=3 free, sigma=0.5) + 0.3 Weibull(scale=1, shape=1.5 free)", 0.7,
               ComponentDistribution::lognormal(3.0, 0.5), "mu", ComponentDistribution::weibull(1.0, 1.5), "shape",
               points({{0.8, 2.0, 1.0},
                       {0.5, 2.0, 1.0},
                       {0.8, 1.0, 1.0},
                       {0.7, 3.0, 1.5},
                       {0.7, 2.0, 2.0},
                       {0.5, 4.0, 2.0},
                       {0.5, 1.5, 2.0}}),
               n);
}

Scenario table3(std::string name, double lambda_star, double shape, std::size_t n) {
  return build(std::move(name),
               "Weibull(scale=1, shape free) weight " + short_number(lambda_star) +
                   " + LN(mu=3 free, sigma=0.5)",
               lambda_star, ComponentDistribution::weibull(1.0, shape), "shape",
               ComponentDistribution::lognormal(3.0, 0.5), "mu", weibull_lognormal_starts(), n);
}

Scenario table4(std::string name, double lambda_star, double scale, double shape,
                std::vector<Eigen::VectorXd> starts, std::size_t n) {
  return build(std::move(name),
               "Gaussian(mu=0 free, sigma=0.5) weight " + short_number(lambda_star) +
                   " + two-sided Weibull(scale fixed, shape free)",
               lambda_star, ComponentDistribution::gaussian(0.0, 0.5), "mu",
               ComponentDistribution::two_sided_weibull(scale, shape), "shape", std::move(starts), n);
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"table1-mix1", "table2",      "table2-n100", "table2-n1000", "table2-n10000", "table3-mix1",
          "table3-mix2", "table3-mix3", "table4-mix1", "table4-mix2",  "table4-mix3",   "table4-mix4"};
}

Scenario make_scenario(std::string_view name) {
  if (name == "table1-mix1")
    return build("table1-mix1", "0.3 Weibull(scale=0.5, shape=2 free) + 0.7 Weibull(scale=1, shape=1 free)", 0.3,
                 ComponentDistribution::weibull(0.5, 2.0), "shape", ComponentDistribution::weibull(1.0, 1.0), "shape",
                 points({{0.5, 1.5, 1.5}, {0.2, 2.5, 0.8}, {0.4, 3.0, 1.2}, {0.3, 1.0, 1.0}, {0.6, 2.0, 2.0},
                         {0.15, 1.5, 0.7}}),
                 10000);
  if (name == "table2") return table2("table2", 1000);
  if (name == "table2-n100") return table2("table2-n100", 100);
  if (name == "table2-n1000") return table2("table2-n1000", 1000);
  if (name == "table2-n10000") return table2("table2-n10000", 10000);
  if (name == "table3-mix1") return table3("table3-mix1", 0.3, 1.5, 1000);
  if (name == "table3-mix2") return table3("table3-mix2", 0.1, 1.0, 10000);
  if (name == "table3-mix3") return table3("table3-mix3", 0.05, 0.4, 50000);
  if (name == "table4-mix1")
    return table4("table4-mix1", 0.7, 1.5, 3.0,
                  points({{0.8, 1.0, 1.0}, {0.5, -1.0, 2.5}, {0.8, 0.5, 2.0}, {0.7, 0.0, 3.0}, {0.7, 1.0, 4.0},
                          {0.5, 2.0, 3.5}}),
                  100);
  if (name == "table4-mix2")
    return table4("table4-mix2", 0.3, 1.5, 3.0,
                  points({{0.2, 1.0, 1.0}, {0.5, -1.0, 2.5}, {0.2, 0.5, 2.0}, {0.3, 0.0, 3.0}, {0.3, 1.0, 4.0}}), 100);
  if (name == "table4-mix3")
    return table4("table4-mix3", 0.05, 2.0, 1.5,
                  points({{0.1, 1.0, 1.0}, {0.05, -1.0, 2.5}, {0.03, 0.5, 2.0}, {0.01, 0.0, 1.5}, {0.005, 1.0, 0.7}}),
                  5000);
  if (name == "table4-mix4")
    return table4("table4-mix4", 0.01, 2.0, 1.5, points({{0.1, 1.0, 1.0}, {0.005, 1.0, 0.7}}), 100000);
  std::string known;
  for (const auto& n : scenario_names()) known += (known.empty() ? "" : ", ") + n;
  throw InputError("unknown scenario '" + std::string(name) + "' (known: " + known + ")");
}

namespace {

void reject_unknown_keys(const nlohmann::json& doc, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  if (!doc.is_object()) throw InputError(where + " must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw InputError("unknown key '" + key + "' in " + where);
}

ComponentDistribution component_from_json(const nlohmann::json& doc, const std::string& where) {
  reject_unknown_keys(doc, {"family", "params", "free"}, where);
  if (!doc.contains("family")) throw InputError(where + " needs a family");
  const Family family = parse_family(doc.at("family").get<std::string>());
  ComponentDistribution d = [&] {
    switch (family) {
      case Family::weibull: return ComponentDistribution::weibull(1.0, 1.0);
      case Family::two_sided_weibull: return ComponentDistribution::two_sided_weibull(1.0, 1.0);
      case Family::lognormal: return ComponentDistribution::lognormal(0.0, 1.0);
      case Family::gaussian: return ComponentDistribution::gaussian(0.0, 1.0);
      case Family::exponential: return ComponentDistribution::exponential(1.0);
    }
    throw InputError("unknown family");
  }();
  if (doc.contains("params"))
    for (const auto& [name, value] : doc.at("params").items()) d = d.with_param(name, value.get<double>());
  if (doc.contains("free")) d.set_free(doc.at("free").get<std::vector<std::string>>());
  return d;
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& doc) {
  reject_unknown_keys(doc, {"name", "lambda", "n", "orders", "parametric", "unknown", "lambda_bounds", "starts"},
                      "custom scenario");
  try {
    if (!doc.contains("lambda") || !doc.contains("parametric") || !doc.contains("unknown"))
      throw InputError("custom scenario needs lambda, parametric and unknown");
    const ComponentDistribution p = component_from_json(doc.at("parametric"), "custom.parametric");
    const ComponentDistribution u = component_from_json(doc.at("unknown"), "custom.unknown");
    const std::vector<int> orders = doc.contains("orders") ? doc.at("orders").get<std::vector<int>>() : kOrders;
    const MixtureSpec truth{doc.at("lambda").get<double>(), p, u};
    truth.validate();
    SemiparametricModel model(p, ConstraintModel(u, orders));
    ParameterSpace space = ParameterSpace::defaults(model);
    if (doc.contains("lambda_bounds")) {
      const auto b = doc.at("lambda_bounds").get<std::vector<double>>();
      if (b.size() != 2) throw InputError("lambda_bounds takes [lo, hi]");
      space = space.with_lambda(b[0], b[1]);
    }
    const Eigen::VectorXd star = model.join({truth.lambda_star, p.free_values(), u.free_values()});
    if (!space.box.contains(star)) throw InputError("the true parameter lies outside the parameter box");
    std::vector<Eigen::VectorXd> starts;
    if (doc.contains("starts")) {
      for (const auto& s : doc.at("starts")) {
        const auto v = s.get<std::vector<double>>();
        starts.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
      }
    } else {
      starts.push_back(model.join({0.5, p.free_values(), u.free_values()}));
    }
    for (const auto& s : starts)
      if (s.size() != model.dim() || !space.box.contains(s)) throw InputError("a custom start lies outside the box");
    std::ostringstream description;
    description << short_number(truth.lambda_star) << ' ' << family_name(p.family()) << " + "
                << short_number(1.0 - truth.lambda_star) << ' ' << family_name(u.family());
    return {doc.value("name", std::string("custom")), description.str(), truth, model, space, std::move(starts),
            doc.value("n", std::size_t{1000})};
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("custom scenario has a value of the wrong type: ") + e.what());
  }
}

}  // namespace lmix::cli
