#ifndef LMIX_DIVERGENCES_HPP
#define LMIX_DIVERGENCES_HPP

#include <span>
#include <string>
#include <string_view>

namespace lmix {

/// Cressie-Read generator φ_γ(x) = (x^γ − γx + γ − 1)/(γ(γ−1)) with its convex
/// conjugate ψ. γ = 0 and γ = 1 are the logarithmic limits.
///
/// ψ is defined where (γ−1)t + 1 > 0; outside that region every ψ accessor
/// throws DomainError carrying t. The χ² generator (γ = 2) has the polynomial
/// conjugate t²/2 + t and is finite on all of ℝ.
class DivergenceGenerator {
 public:
  static DivergenceGenerator cressie_read(double gamma);
  static DivergenceGenerator chi2() { return cressie_read(2.0); }

  /// Accepts "chi2", "kl", "modified-kl", "hellinger" or "cr:<gamma>".
  static DivergenceGenerator parse(std::string_view text);

  double gamma() const { return gamma_; }
  bool is_chi2() const { return kind_ == Kind::chi2; }
  std::string name() const;

  double phi(double x) const;
  double phi_prime(double x) const;

  double psi(double t) const;
  double psi_prime(double t) const;
  double psi_second(double t) const;

  bool in_psi_domain(double t) const;
  /// Open interval of ψ's effective domain; infinite ends where unbounded.
  double psi_lower() const;
  double psi_upper() const;
  /// Open interval of φ's effective domain (a_φ, b_φ) with a_φ < 1 < b_φ.
  double phi_lower() const;
  double phi_upper() const;

 private:
  enum class Kind { chi2, modified_kl, kl, power };
  DivergenceGenerator(Kind kind, double gamma) : kind_(kind), gamma_(gamma) {}

  double base(double t) const;  // (γ−1)t + 1, checked

  Kind kind_;
  double gamma_;
};

/// Largest |ψ(t) − sup_x {tx − φ(x)}| over the grid, with the supremum found by
/// golden-section search on φ's domain.
double conjugate_check(const DivergenceGenerator& g, std::span<const double> t_grid);

}  // namespace lmix

#endif  // LMIX_DIVERGENCES_HPP
