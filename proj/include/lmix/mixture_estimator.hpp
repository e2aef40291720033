#ifndef LMIX_MIXTURE_ESTIMATOR_HPP
#define LMIX_MIXTURE_ESTIMATOR_HPP

#include "lmix/dual_solver.hpp"
#include "lmix/nelder_mead.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace lmix {

inline constexpr double kLambdaFloor = 0.005;
inline constexpr double kLambdaCeil = 0.995;

/// Compact box over φ = (λ, θ_free, α_free). Fixed parameters are carried by
/// the component templates' free masks.
struct ParameterSpace {
  Box box;

  /// λ in [0.005, 0.995]; θ and α from each family's default bounds.
  static ParameterSpace defaults(const SemiparametricModel& model);
  ParameterSpace with_lambda(double lo, double hi) const;
  void validate(const SemiparametricModel& model) const;
};

struct EstimationOptions {
  DivergenceGenerator generator = DivergenceGenerator::chi2();
  double rel_tol = 1e-8;
  NelderMeadOptions optimizer{};
  int jobs = 1;
};

struct StartTrace {
  Eigen::VectorXd start;
  Eigen::VectorXd final_point;
  double value = 0.0;  // +inf when the start never saw a finite objective
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string error;
};

struct EstimationResult {
  Eigen::VectorXd phi;
  double lambda = 0.0;
  Eigen::VectorXd theta;
  Eigen::VectorXd alpha;
  Eigen::VectorXd xi;
  double objective = 0.0;
  std::size_t best_start = 0;
  std::vector<StartTrace> starts;
  bool phi_plus = true;
  PhiPlusReport phi_plus_report;
  std::vector<std::string> names;
  std::vector<std::string> warnings;
};

/// Multi-start Nelder-Mead on φ ↦ sup_ξ H(φ, ξ) with the empirical CDF of `data`.
/// Requires n ≥ 30. Throws EstimationFailure (with traces in the message) when
/// no start reaches a finite objective.
EstimationResult estimate(std::span<const double> data, const SemiparametricModel& model, const ParameterSpace& space,
                          const std::vector<Eigen::VectorXd>& starts, const EstimationOptions& options = {});

/// Same optimisation against any CDF source (e.g. the true law).
EstimationResult estimate_with_cdf(const CdfSource& mixture, const SemiparametricModel& model,
                                   const ParameterSpace& space, const std::vector<Eigen::VectorXd>& starts,
                                   const EstimationOptions& options = {});

/// Profiled objective at each point of a path in φ.
std::vector<double> objective_trace(const SemiparametricModel& model, const std::vector<Eigen::VectorXd>& path,
                                    const CdfSource& mixture, const DivergenceGenerator& generator,
                                    double rel_tol = 1e-8);

/// Two-exponential identifiability set: pairs (λ, a₁) with ∫F₀(1−F₀)dy = 1/(2a₀*),
/// where F₀ is the signed sub-CDF of the exponential mixture (λ*, a₁*, a₀*).
struct CurvePoint {
  double lambda;
  double rate;       // a₁
  double residual;   // LHS − 1/(2a₀*)
  bool phi_plus;
};

struct CurveOptions {
  double rate_lo = 1e-3;
  double rate_hi = 50.0;
  int scan_points = 4000;
};

/// LHS of the curve equation at (λ, a₁) in closed form.
double exponential_curve_lhs(double lambda, double rate, double lambda_star, double rate1_star, double rate0_star);

std::vector<CurvePoint> identifiability_curve_exponential(double lambda_star, double rate1_star, double rate0_star,
                                                          const std::vector<double>& lambda_grid,
                                                          const CurveOptions& options = {});

}  // namespace lmix

#endif  // LMIX_MIXTURE_ESTIMATOR_HPP
