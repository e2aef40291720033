#ifndef LMIX_DIST_MODELS_HPP
#define LMIX_DIST_MODELS_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace lmix {

enum class Family { weibull, lognormal, gaussian, two_sided_weibull, exponential };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

/// Standard normal CDF, density and quantile (Wichura's AS241, ~1e-16 relative).
double normal_cdf(double z);
double normal_pdf(double z);
double normal_quantile(double p);

/// Uniform on the open interval (0, 1) from the top 53 bits of one 64-bit draw.
inline double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// splitmix64 finaliser; child seeds are splitmix64(master + k).
std::uint64_t splitmix64(std::uint64_t x);

/// A component law with a named parameter vector and a fixed/free mask.
///
/// Parameter layout per family:
///   weibull, two_sided_weibull: (scale, shape)
///   lognormal, gaussian:        (mu, sigma)
///   exponential:                (rate)
class ComponentDistribution {
 public:
  static ComponentDistribution weibull(double scale, double shape);
  static ComponentDistribution two_sided_weibull(double scale, double shape);
  static ComponentDistribution lognormal(double mu, double sigma);
  static ComponentDistribution gaussian(double mu, double sigma);
  static ComponentDistribution exponential(double rate);

  Family family() const { return family_; }
  const Eigen::VectorXd& params() const { return params_; }
  const std::vector<std::string>& param_names() const;
  Eigen::Index param_index(std::string_view name) const;

  /// Marks parameters as free for estimation, by name. Default: all fixed.
  ComponentDistribution& set_free(std::initializer_list<std::string_view> names);
  ComponentDistribution& set_free(const std::vector<std::string>& names);
  const std::vector<bool>& free_mask() const { return free_; }
  Eigen::Index free_count() const;
  std::vector<std::string> free_names() const;
  Eigen::VectorXd free_values() const;
  /// Copy with the free parameters replaced, in mask order. Validates the result.
  ComponentDistribution with_free(const Eigen::Ref<const Eigen::VectorXd>& values) const;
  ComponentDistribution with_param(std::string_view name, double value) const;

  double cdf(double x) const;
  double pdf(double x) const;
  double quantile(double p) const;
  /// ∂F(x)/∂(free parameters), closed form.
  Eigen::VectorXd cdf_gradient_free(double x) const;
  /// ∂F(x)/∂(every parameter), closed form.
  Eigen::VectorXd cdf_gradient(double x) const;
  double mean() const;

  double support_lower() const;
  double support_upper() const;
  /// Points where the density is not smooth (support edges, the two-sided origin).
  std::vector<double> kinks() const;

  double sample(std::mt19937_64& rng) const;

  /// Default optimisation box for a parameter.
  std::pair<double, double> default_bounds(Eigen::Index i) const;

  std::string describe() const;

 private:
  ComponentDistribution(Family f, Eigen::VectorXd p);
  void validate() const;

  Family family_;
  Eigen::VectorXd params_;
  std::vector<bool> free_;
};

/// (λ_2, λ_3, λ_4) of Weibull(scale σ, shape ν).
Eigen::Vector3d weibull_lmoments(double scale, double shape);
/// (λ_2, λ_3, λ_4) of the symmetric two-sided Weibull; λ_3 is exactly zero.
Eigen::Vector3d two_sided_weibull_lmoments(double scale, double shape);
/// (λ_2, λ_3, λ_4) of Lognormal(μ, σ) by quadrature; memoised per (σ, tol).
Eigen::Vector3d lognormal_lmoments(double mu, double sigma, double rel_tol = 1e-12);
Eigen::Vector3d gaussian_lmoments(double mu, double sigma);
Eigen::Vector3d exponential_lmoments(double rate);

/// λ_r for each requested order r ≥ 1. Closed forms where available, the
/// quadrature on the quantile function otherwise.
Eigen::VectorXd component_lmoments(const ComponentDistribution& d, const std::vector<int>& orders);

/// Two-component mixture λ*·F₁ + (1−λ*)·F₀ with F₁ parametric.
struct MixtureSpec {
  double lambda_star;
  ComponentDistribution parametric;
  ComponentDistribution unknown;

  void validate() const;
  double cdf(double x) const;
  double pdf(double x) const;
  double mean() const;
};

/// n i.i.d. draws; each draw consumes one uniform for the label then the
/// component's own draws, so the stream is fixed by the seed alone.
std::vector<double> sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t seed);

/// α ↦ m(α) = (−λ_r(α))_{r in orders} for a component family with free α.
class ConstraintModel {
 public:
  ConstraintModel(ComponentDistribution family_template, std::vector<int> orders);

  const std::vector<int>& orders() const { return orders_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(orders_.size()); }
  Eigen::Index dim() const { return template_.free_count(); }
  const ComponentDistribution& family_template() const { return template_; }
  ComponentDistribution at(const Eigen::Ref<const Eigen::VectorXd>& alpha) const { return template_.with_free(alpha); }

  Eigen::VectorXd m(const Eigen::Ref<const Eigen::VectorXd>& alpha) const;
  /// ∂m/∂α, shape size() × dim(), central differences with step 1e-6·max(1,|α_j|).
  Eigen::MatrixXd gradient(const Eigen::Ref<const Eigen::VectorXd>& alpha) const;

 private:
  ComponentDistribution template_;
  std::vector<int> orders_;
};

}  // namespace lmix

#endif  // LMIX_DIST_MODELS_HPP
