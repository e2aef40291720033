#ifndef LMIX_SIGNED_MIX_HPP
#define LMIX_SIGNED_MIX_HPP

#include "lmix/dist_models.hpp"
#include "lmix/quadrature.hpp"

#include <memory>
#include <span>
#include <vector>

namespace lmix {

/// A mixture CDF F seen by the estimator: either the true law or the empirical
/// step function of a sample.
class CdfSource {
 public:
  virtual ~CdfSource() = default;
  virtual double operator()(double y) const = 0;
  /// Points outside which F carries less than 1e-8 mass (finite).
  virtual double lower() const = 0;
  virtual double upper() const = 0;
  /// Non-smooth points the quadrature must not straddle.
  virtual std::vector<double> breakpoints() const { return {}; }
  virtual bool is_empirical() const { return false; }
};

/// F_n(x) = #{X_i ≤ x}/n over a sorted copy of the sample.
class EmpiricalCdf final : public CdfSource {
 public:
  explicit EmpiricalCdf(std::span<const double> sample);

  double operator()(double y) const override;
  double lower() const override { return sorted_.front(); }
  double upper() const override { return sorted_.back(); }
  /// Every distinct order statistic.
  std::vector<double> breakpoints() const override;
  bool is_empirical() const override { return true; }

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }
  /// Kolmogorov distance sup_y |F_n(y) − G(y)| to a continuous CDF.
  template <typename Cdf>
  double sup_distance(const Cdf& g) const {
    const double n = static_cast<double>(sorted_.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
      const double f = g(sorted_[i]);
      d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
  }

 private:
  std::vector<double> sorted_;
};

/// The true mixture law λ*F₁ + (1−λ*)F₀ as a CDF source with a density.
class MixtureCdf final : public CdfSource {
 public:
  explicit MixtureCdf(MixtureSpec spec);

  double operator()(double y) const override { return spec_.cdf(y); }
  double density(double y) const { return spec_.pdf(y); }
  /// Quantile by bisection on the CDF.
  double quantile(double p) const;
  double lower() const override { return lower_; }
  double upper() const override { return upper_; }
  /// Kinks of either component's density.
  std::vector<double> breakpoints() const override;
  const MixtureSpec& spec() const { return spec_; }

 private:
  MixtureSpec spec_;
  double lower_, upper_;
};

inline constexpr double kTailMass = 1e-13;

/// y ↦ (F(y) − λF₁(y|θ))/(1−λ), signed off the effective set Φ⁺.
class SignedSubCdf {
 public:
  SignedSubCdf(const CdfSource& mixture, ComponentDistribution parametric, double lambda);

  double operator()(double y) const { return (mixture_(y) - lambda_ * parametric_.cdf(y)) * inv_; }
  /// Same value given F(y) already evaluated.
  double from_mixture(double y, double mixture_value) const {
    return (mixture_value - lambda_ * parametric_.cdf(y)) * inv_;
  }

  double lambda() const { return lambda_; }
  const ComponentDistribution& parametric() const { return parametric_; }
  const CdfSource& mixture() const { return mixture_; }

  /// Truncated range covering both F and F₁ up to kTailMass per tail, widened
  /// by 10%, with the source's breakpoints and F₁'s kinks registered.
  IntegrationPlan plan(double rel_tol = 1e-8) const;

 private:
  const CdfSource& mixture_;
  ComponentDistribution parametric_;
  double lambda_;
  double inv_;
};

/// Pointwise evaluation; λ must lie in (0, 1).
double eval_signed_cdf(double lambda, const ComponentDistribution& parametric, const CdfSource& mixture, double y);

struct PhiPlusReport {
  bool member = true;
  double witness = 0.0;        // first offending point when member is false
  double worst_value = 0.0;    // most negative density (true law) or largest violation (empirical)
};

/// Density test (p_T − λp₁)/(1−λ) ≥ −1e-9 at `grid` quantile-spaced points of the true law.
PhiPlusReport phi_plus_check(double lambda, const ComponentDistribution& parametric, const MixtureCdf& truth,
                             int grid = 1000);

/// Heuristic counterpart for an empirical F: F̂₀ at up to 200 rank-spaced order
/// statistics must be nondecreasing and inside [0, 1] up to the DKW band
/// 2ε_n/(1−λ), ε_n = sqrt(log(2/0.05)/(2n)).
PhiPlusReport empirical_phi_plus(double lambda, const ComponentDistribution& parametric, const EmpiricalCdf& data);

}  // namespace lmix

#endif  // LMIX_SIGNED_MIX_HPP
