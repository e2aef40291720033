#ifndef LMIX_ASYMPTOTICS_HPP
#define LMIX_ASYMPTOTICS_HPP

#include "lmix/dual_solver.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace lmix {

/// Plug-in evaluation at (φ̂, F): every matrix below is computed with the
/// supplied CDF source standing in for the true law and φ̂ for φ*.
struct CovarianceOptions {
  int panels = 128;
  int order = 4;
  double rel_tol = 1e-10;
};

struct ConstraintCovariance {
  Eigen::MatrixXd sigma;
  /// max |Σ(panels) − Σ(panels/2)|; zero when the source's breakpoints already
  /// exceed the panel count (the rule is then the same at both resolutions).
  double richardson = 0.0;
};

/// Σ_{r,s} = (1−λ)⁻² ∬ (F(min(x,y)) − F(x)F(y)) K′_r(F₀(x)) K′_s(F₀(y)) dx dy,
/// accumulated over x ≤ y and reflected. Diagonal panels use a triangle rule
/// so the kink along x = y is never straddled.
ConstraintCovariance constraint_covariance(const SemiparametricModel& model, const Eigen::Ref<const Eigen::VectorXd>& phi,
                                           const CdfSource& mixture, const CovarianceOptions& options = {});

struct JacobianBlocks {
  Eigen::MatrixXd phi_xi;  // ℓ × dim φ: columns λ, θ..., α...
  Eigen::MatrixXd xi_xi;   // Ω at φ̂
};

/// λ column −(1−λ)⁻²∫(F − F₁)K′(F₀)dy, θ columns λ/(1−λ)∫∇_θF₁ K′(F₀)dy,
/// α columns ∇m(α).
JacobianBlocks jacobian_blocks(const SemiparametricModel& model, const Eigen::Ref<const Eigen::VectorXd>& phi,
                               const CdfSource& mixture, double rel_tol = 1e-10);

struct AsymptoticReport {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd jacobian;        // J_{φ,ξ}
  Eigen::MatrixXd omega;           // J_{ξ,ξ}
  Eigen::MatrixXd sigma_tilde;     // (Jᵗ Ω⁻¹ J)⁻¹
  Eigen::MatrixXd h;               // Σ̃ Jᵗ Ω⁻¹
  Eigen::MatrixXd p;               // Ω⁻¹ − Ω⁻¹ J Σ̃ Jᵗ Ω⁻¹
  Eigen::MatrixXd covariance;      // (H; P) Σ (H; P)ᵗ
  Eigen::VectorXd standard_errors; // sqrt(diag(H Σ Hᵗ)/n)
  double condition_omega = 1.0;
  double condition_information = 1.0;
  double richardson = 0.0;
  std::size_t n = 0;
};

/// Throws NumericalError when Ω or JᵗΩ⁻¹J has condition number above 1e12 or
/// J is rank deficient.
AsymptoticReport assemble_covariance(const JacobianBlocks& blocks, const Eigen::MatrixXd& sigma, std::size_t n);

/// constraint_covariance + jacobian_blocks + assemble_covariance.
AsymptoticReport asymptotic_report(const SemiparametricModel& model, const Eigen::Ref<const Eigen::VectorXd>& phi,
                                   const CdfSource& mixture, std::size_t n, const CovarianceOptions& options = {});

/// Smallest eigenvalue of the symmetric part, relative to the trace (≥ −1e-8 means PSD).
double relative_min_eigenvalue(const Eigen::MatrixXd& a);

}  // namespace lmix

#endif  // LMIX_ASYMPTOTICS_HPP
