#ifndef LMIX_CLI_IO_HPP
#define LMIX_CLI_IO_HPP

#include "lmix/asymptotics.hpp"
#include "lmix/mixture_estimator.hpp"
#include "lmix/splq_estimator.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lmix::cli {

/// One value per line; an optional first line `x` is a header. Blank lines are
/// skipped. Errors name the file and line.
std::vector<double> read_data_csv(std::istream& in, const std::string& label);
std::vector<double> read_data_file(const std::string& path);

/// Parses a JSON document, reporting parse errors with line and column.
nlohmann::json read_json_file(const std::string& path);

/// 17 significant digits; nan and inf spelled as such.
std::string format_number(double x);

/// "1,2.5,3" → vector; errors name `what`.
std::vector<double> parse_number_list(const std::string& text, const std::string& what);

/// Finite values as JSON numbers (shortest round-trip text), others as null.
nlohmann::json number(double x);
nlohmann::json vector_json(const Eigen::VectorXd& v);
nlohmann::json matrix_json(const Eigen::MatrixXd& m);
nlohmann::json named_json(const std::vector<std::string>& names, const Eigen::VectorXd& v);

nlohmann::json start_trace_json(const StartTrace& t);
nlohmann::json estimation_json(const SemiparametricModel& model, const EstimationResult& r);
nlohmann::json asymptotics_json(const std::vector<std::string>& names, const AsymptoticReport& rep);
nlohmann::json splq_json(const SplqFit& fit);

/// Writes `text` to `path`, throwing InputError when the file cannot be opened.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace lmix::cli

#endif  // LMIX_CLI_IO_HPP
