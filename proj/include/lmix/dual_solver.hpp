#ifndef LMIX_DUAL_SOLVER_HPP
#define LMIX_DUAL_SOLVER_HPP

#include "lmix/divergences.hpp"
#include "lmix/dist_models.hpp"
#include "lmix/lmom_core.hpp"
#include "lmix/signed_mix.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace lmix {

/// Parametric component F₁(·|θ) plus the constraint model m(α) of the unknown
/// component. The parameter vector is φ = (λ, θ_free..., α_free...).
class SemiparametricModel {
 public:
  SemiparametricModel(ComponentDistribution parametric, ConstraintModel constraints);

  struct Point {
    double lambda;
    Eigen::VectorXd theta;
    Eigen::VectorXd alpha;
  };

  Eigen::Index dim() const { return 1 + theta_dim() + alpha_dim(); }
  Eigen::Index theta_dim() const { return parametric_.free_count(); }
  Eigen::Index alpha_dim() const { return constraints_.dim(); }
  Eigen::Index constraint_count() const { return constraints_.size(); }

  Point split(const Eigen::Ref<const Eigen::VectorXd>& phi) const;
  Eigen::VectorXd join(const Point& p) const;
  std::vector<std::string> parameter_names() const;

  const ComponentDistribution& parametric_template() const { return parametric_; }
  const ConstraintModel& constraints() const { return constraints_; }
  const LMomentBasis& basis() const { return basis_; }

  ComponentDistribution parametric_at(const Point& p) const { return parametric_.with_free(p.theta); }

 private:
  ComponentDistribution parametric_;
  ConstraintModel constraints_;
  LMomentBasis basis_;
};

/// b = ∫K(F₀)dy and Ω = ∫K(F₀)K(F₀)ᵗdy from one shared quadrature pass.
struct ConstraintIntegrals {
  Eigen::VectorXd b;
  Eigen::MatrixXd omega;
  double error = 0.0;
  bool converged = true;
};

ConstraintIntegrals constraint_integrals(const SignedSubCdf& f0, const LMomentBasis& basis, double rel_tol = 1e-8);

struct DualState {
  Eigen::VectorXd xi;
  double objective = 0.0;
  double gradient_norm = 0.0;
  /// χ² path: Ω. Newton path: the negated Hessian at the returned ξ.
  Eigen::MatrixXd omega;
  Eigen::VectorXd b;  // ∫K(F₀)dy (χ² path only)
  Eigen::VectorXd m;
  double condition = 1.0;
  int iterations = 0;
  bool converged = true;
  bool xi_large = false;         // ‖ξ‖ > 1e6
  std::vector<double> trace;     // objective after each Newton step
};

/// H(φ,ξ) = ξᵗm − ∫ψ(ξᵗK(F₀(y)))dy. A ψ-domain violation is rethrown as
/// DomainError carrying the offending y.
double objective_H(const SignedSubCdf& f0, const LMomentBasis& basis, const Eigen::VectorXd& m,
                   const Eigen::VectorXd& xi, const DivergenceGenerator& g, double rel_tol = 1e-8);

/// Closed-form supremum for χ²: ξ = Ω⁻¹(m − b), H = ½(m − b)ᵗΩ⁻¹(m − b).
/// Throws NumericalError naming the near-null direction when cond(Ω) > 1e12.
DualState inner_sup_chi2(const SignedSubCdf& f0, const LMomentBasis& basis, const Eigen::VectorXd& m,
                         double rel_tol = 1e-8);

/// Damped Newton ascent with Armijo backtracking from ξ0 (default 0).
DualState inner_sup_newton(const SignedSubCdf& f0, const LMomentBasis& basis, const Eigen::VectorXd& m,
                           const DivergenceGenerator& g, double rel_tol = 1e-10,
                           const std::optional<Eigen::VectorXd>& xi0 = std::nullopt);

/// LDLT of a symmetric matrix; throws NumericalError naming `what` and the
/// near-null direction when the condition number exceeds 1e12.
Eigen::LDLT<Eigen::MatrixXd> guarded_factor(const Eigen::MatrixXd& a, double& condition, const char* what);

/// sup_ξ H(φ, ξ) by the χ² closed form or Newton.
DualState profiled_objective(const SemiparametricModel& model, const Eigen::Ref<const Eigen::VectorXd>& phi,
                             const CdfSource& mixture, const DivergenceGenerator& g, double rel_tol = 1e-8,
                             const std::optional<Eigen::VectorXd>& xi0 = std::nullopt);

}  // namespace lmix

#endif  // LMIX_DUAL_SOLVER_HPP
