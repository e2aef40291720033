#include "lmix/cli/io.hpp"

#include "lmix/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lmix::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<double> read_data_csv(std::istream& in, const std::string& label) {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string field = trim(line);
    if (field.empty()) continue;
    if (first_content && (field == "x" || field == "\"x\"")) {
      first_content = false;
      continue;
    }
    first_content = false;
    double v = 0.0;
    if (!parse_double(field, v))
      throw InputError(label + ":" + std::to_string(lineno) + ": expected one number per line, got '" + field + "'");
    if (!std::isfinite(v)) throw InputError(label + ":" + std::to_string(lineno) + ": value is not finite");
    out.push_back(v);
  }
  if (out.empty()) throw InputError(label + ": no observations");
  return out;
}

std::vector<double> read_data_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  return read_data_csv(in, path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  }
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (!parse_double(trim(item), v)) throw InputError(what + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw InputError(what + ": empty list");
  return out;
}

nlohmann::json number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
  return a;
}

nlohmann::json named_json(const std::vector<std::string>& names, const Eigen::VectorXd& v) {
  auto o = nlohmann::json::object();
  for (std::size_t i = 0; i < names.size(); ++i) o[names[i]] = number(v[static_cast<Eigen::Index>(i)]);
  return o;
}

nlohmann::json start_trace_json(const StartTrace& t) {
  nlohmann::json j{{"start", vector_json(t.start)},
                   {"final", vector_json(t.final_point)},
                   {"value", number(t.value)},
                   {"iterations", t.iterations},
                   {"evaluations", t.evaluations},
                   {"converged", t.converged}};
  if (!t.error.empty()) j["error"] = t.error;
  return j;
}

nlohmann::json estimation_json(const SemiparametricModel& model, const EstimationResult& r) {
  const auto theta_names = model.parametric_template().free_names();
  const auto alpha_names = model.constraints().family_template().free_names();
  nlohmann::json j;
  j["lambda"] = number(r.lambda);
  j["theta"] = named_json(theta_names, r.theta);
  j["alpha"] = named_json(alpha_names, r.alpha);
  j["xi"] = vector_json(r.xi);
  j["objective"] = number(r.objective);
  j["phi_plus"] = r.phi_plus;
  j["best_start"] = r.best_start;
  j["parameter_names"] = r.names;
  auto starts = nlohmann::json::array();
  for (const auto& t : r.starts) starts.push_back(start_trace_json(t));
  j["starts"] = starts;
  j["warnings"] = r.warnings;
  return j;
}

nlohmann::json asymptotics_json(const std::vector<std::string>& names, const AsymptoticReport& rep) {
  return {{"plug_in", true},
          {"n", rep.n},
          {"standard_errors", named_json(names, rep.standard_errors)},
          {"sigma", matrix_json(rep.sigma)},
          {"jacobian", matrix_json(rep.jacobian)},
          {"omega", matrix_json(rep.omega)},
          {"sigma_tilde", matrix_json(rep.sigma_tilde)},
          {"h", matrix_json(rep.h)},
          {"p", matrix_json(rep.p)},
          {"covariance", matrix_json(rep.covariance)},
          {"condition_omega", number(rep.condition_omega)},
          {"condition_information", number(rep.condition_information)},
          {"richardson", number(rep.richardson)}};
}

nlohmann::json splq_json(const SplqFit& fit) {
  auto starts = nlohmann::json::array();
  for (const auto& t : fit.starts) starts.push_back(start_trace_json(t));
  return {{"alpha", named_json(fit.names, fit.alpha)},
          {"xi", vector_json(fit.xi)},
          {"objective", number(fit.objective)},
          {"b", vector_json(fit.b)},
          {"omega", matrix_json(fit.omega)},
          {"spacings", fit.spacings.size()},
          {"best_start", fit.best_start},
          {"starts", starts}};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace lmix::cli
