#ifndef LMIX_SPLQ_ESTIMATOR_HPP
#define LMIX_SPLQ_ESTIMATOR_HPP

#include "lmix/dual_solver.hpp"
#include "lmix/mixture_estimator.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace lmix {

/// Finite-sum analogues of Ω and b over the sample spacings: with
/// Δ_i = X_{i+1:n} − X_{i:n} and K_i = K(i/n), i = 1..n−1,
/// b_n = Σ K_i Δ_i and Ω_n = Σ K_i K_iᵗ Δ_i.
struct SplqSums {
  Eigen::MatrixXd k;        // ℓ × (n−1), column i−1 holds K(i/n)
  Eigen::VectorXd spacing;  // Δ_i
  Eigen::VectorXd b;
  Eigen::MatrixXd omega;
};

/// Requires n ≥ the largest order and at least one positive spacing.
SplqSums splq_sums(std::span<const double> data, const LMomentBasis& basis);

/// sup_ξ ξᵗm − Σ ψ(ξᵗK_i)Δ_i: closed form for χ², damped Newton otherwise.
DualState splq_inner(const SplqSums& sums, const Eigen::VectorXd& m, const DivergenceGenerator& generator);

struct SplqFit {
  Eigen::VectorXd alpha;
  Eigen::VectorXd xi;
  double objective = 0.0;
  Eigen::VectorXd spacings;
  Eigen::VectorXd b;
  Eigen::MatrixXd omega;
  std::size_t best_start = 0;
  std::vector<StartTrace> starts;
  std::vector<std::string> names;
};

/// The α box from the family's default bounds.
Box default_alpha_box(const ConstraintModel& model);

/// Multi-start Nelder-Mead over α on the profiled finite-sum objective. With
/// no starts, the template's current free values are used.
SplqFit splq_fit(std::span<const double> data, const ConstraintModel& model, const Box& alpha_box,
                 std::vector<Eigen::VectorXd> starts = {}, const EstimationOptions& options = {});

}  // namespace lmix

#endif  // LMIX_SPLQ_ESTIMATOR_HPP
