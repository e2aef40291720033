#ifndef LMIX_LMOM_CORE_HPP
#define LMIX_LMOM_CORE_HPP

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace lmix {

/// Dense polynomial in the monomial basis, coefficient i multiplies x^i.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(Eigen::VectorXd coefficients) : coeffs_(std::move(coefficients)) {}

  int degree() const { return coeffs_.size() == 0 ? 0 : static_cast<int>(coeffs_.size()) - 1; }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }

  template <typename Scalar>
  Scalar operator()(const Scalar& x) const {
    Scalar acc(0);
    for (Eigen::Index i = coeffs_.size() - 1; i >= 0; --i) acc = acc * x + Scalar(coeffs_[i]);
    return acc;
  }

  Polynomial derivative() const;
  /// Antiderivative vanishing at zero.
  Polynomial antiderivative() const;

 private:
  Eigen::VectorXd coeffs_;
};

/// L_r(u) on [0,1]: L_0 = 1, L_1 = 2u - 1, orthogonal under Lebesgue measure.
struct ShiftedLegendre {
  int order = 0;
  Polynomial poly;

  template <typename Scalar>
  Scalar operator()(const Scalar& u) const { return poly(u); }
};

inline constexpr int kMaxLegendreOrder = 32;

/// Exact coefficient (-1)^{r-k} C(r,k) C(r+k,k) of u^k in L_r, rounded once to double.
double legendre_coefficient(int r, int k);

ShiftedLegendre shifted_legendre(int r);

/// K_r(t) = ∫_0^t L_{r-1}(u) du, r >= 2.
Polynomial integrated_legendre(int r);

/// The vector K = (K_r)_{r in orders} with first and second derivatives.
///
/// Hot-path evaluation writes into caller-provided storage; orders need not be
/// contiguous but each must lie in 2..kMaxLegendreOrder+1.
class LMomentBasis {
 public:
  explicit LMomentBasis(std::vector<int> orders);
  /// Orders 2..max_order.
  static LMomentBasis up_to(int max_order);

  Eigen::Index size() const { return static_cast<Eigen::Index>(orders_.size()); }
  const std::vector<int>& orders() const { return orders_; }
  int max_order() const;

  /// c_{r,k} = (-1)^{r-k-1} C(r-1,k) C(r+k-1,k), the coefficient of t^k in K_r'.
  static double coefficient(int r, int k) { return legendre_coefficient(r - 1, k); }

  const Polynomial& k(Eigen::Index i) const { return k_[static_cast<std::size_t>(i)]; }
  const Polynomial& dk(Eigen::Index i) const { return dk_[static_cast<std::size_t>(i)]; }

  void values(double t, Eigen::Ref<Eigen::VectorXd> out) const;
  void derivatives(double t, Eigen::Ref<Eigen::VectorXd> out) const;
  void second_derivatives(double t, Eigen::Ref<Eigen::VectorXd> out) const;

  Eigen::VectorXd values(double t) const;
  Eigen::VectorXd derivatives(double t) const;
  Eigen::VectorXd second_derivatives(double t) const;

 private:
  std::vector<int> orders_;
  std::vector<Polynomial> k_, dk_, d2k_;
};

/// λ_1..λ_ℓ. Index with at(r), r starting at 1.
struct LMomentVector {
  Eigen::VectorXd values;

  int max_order() const { return static_cast<int>(values.size()); }
  double at(int r) const { return values[r - 1]; }
};

/// Unbiased sample L-moments (probability-weighted-moment form of the
/// order-statistic definition). Throws InputError if data.size() < max_order.
LMomentVector sample_lmoments(std::span<const double> data, int max_order);

/// λ_r = ∫_0^1 Q(u) L_{r-1}(u) du by adaptive quadrature on the open interval.
/// Throws NumericalError (with the achieved error) when the tolerance is not met.
LMomentVector population_lmoments_by_quadrature(const std::function<double(double)>& quantile,
                                                int max_order, double rel_tol = 1e-10);

}  // namespace lmix

#endif  // LMIX_LMOM_CORE_HPP
