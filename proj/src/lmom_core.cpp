#include "lmix/lmom_core.hpp"

#include "lmix/errors.hpp"
#include "lmix/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lmix {

namespace {

using Int128 = __int128;

Int128 binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  Int128 acc = 1;
  for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;  // exact at every step
  return acc;
}

void check_order(int r) {
  if (r < 0 || r > kMaxLegendreOrder)
    throw InputError("shifted Legendre order must lie in 0.." + std::to_string(kMaxLegendreOrder) +
                     ", got " + std::to_string(r));
}

}  // namespace

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial(Eigen::VectorXd::Zero(1));
  Eigen::VectorXd d(coeffs_.size() - 1);
  for (Eigen::Index i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(coeffs_.size() + 1);
  for (Eigen::Index i = 0; i < coeffs_.size(); ++i) a[i + 1] = coeffs_[i] / static_cast<double>(i + 1);
  return Polynomial(std::move(a));
}

double legendre_coefficient(int r, int k) {
  check_order(r);
  if (k < 0 || k > r) return 0.0;
  const Int128 mag = binomial(r, k) * binomial(r + k, k);
  const double value = static_cast<double>(mag);
  return ((r - k) % 2 == 0) ? value : -value;
}

ShiftedLegendre shifted_legendre(int r) {
  check_order(r);
  Eigen::VectorXd c(r + 1);
  for (int k = 0; k <= r; ++k) c[k] = legendre_coefficient(r, k);
  return {r, Polynomial(std::move(c))};
}

Polynomial integrated_legendre(int r) {
  if (r < 2) throw InputError("integrated Legendre polynomial K_r needs r >= 2, got " + std::to_string(r));
  return shifted_legendre(r - 1).poly.antiderivative();
}

LMomentBasis::LMomentBasis(std::vector<int> orders) : orders_(std::move(orders)) {
  if (orders_.empty()) throw InputError("L-moment basis needs at least one order");
  for (int r : orders_) {
    if (r < 2 || r > kMaxLegendreOrder + 1)
      throw InputError("L-moment constraint order must lie in 2.." + std::to_string(kMaxLegendreOrder + 1) +
                       ", got " + std::to_string(r));
    k_.push_back(integrated_legendre(r));
    dk_.push_back(k_.back().derivative());
    d2k_.push_back(dk_.back().derivative());
  }
}

LMomentBasis LMomentBasis::up_to(int max_order) {
  if (max_order < 2) throw InputError("L-moment basis needs max order >= 2");
  std::vector<int> orders;
  for (int r = 2; r <= max_order; ++r) orders.push_back(r);
  return LMomentBasis(std::move(orders));
}

int LMomentBasis::max_order() const { return *std::max_element(orders_.begin(), orders_.end()); }

void LMomentBasis::values(double t, Eigen::Ref<Eigen::VectorXd> out) const {
  for (std::size_t i = 0; i < k_.size(); ++i) out[static_cast<Eigen::Index>(i)] = k_[i](t);
}

void LMomentBasis::derivatives(double t, Eigen::Ref<Eigen::VectorXd> out) const {
  for (std::size_t i = 0; i < dk_.size(); ++i) out[static_cast<Eigen::Index>(i)] = dk_[i](t);
}

void LMomentBasis::second_derivatives(double t, Eigen::Ref<Eigen::VectorXd> out) const {
  for (std::size_t i = 0; i < d2k_.size(); ++i) out[static_cast<Eigen::Index>(i)] = d2k_[i](t);
}

Eigen::VectorXd LMomentBasis::values(double t) const {
  Eigen::VectorXd out(size());
  values(t, out);
  return out;
}

Eigen::VectorXd LMomentBasis::derivatives(double t) const {
  Eigen::VectorXd out(size());
  derivatives(t, out);
  return out;
}

Eigen::VectorXd LMomentBasis::second_derivatives(double t) const {
  Eigen::VectorXd out(size());
  second_derivatives(t, out);
  return out;
}

LMomentVector sample_lmoments(std::span<const double> data, int max_order) {
  if (max_order < 1) throw InputError("max L-moment order must be >= 1");
  check_order(max_order - 1);
  const auto n = static_cast<long>(data.size());
  if (n < max_order)
    throw InputError("insufficient data: " + std::to_string(n) + " observations for L-moments up to order " +
                     std::to_string(max_order));
  std::vector<double> x(data.begin(), data.end());
  for (double v : x)
    if (!std::isfinite(v)) throw InputError("sample L-moments need finite data");
  std::sort(x.begin(), x.end());

  // Unbiased probability-weighted moments b_k = n^{-1} Σ_i C(i-1,k)/C(n-1,k) x_(i).
  Eigen::VectorXd b = Eigen::VectorXd::Zero(max_order);
  for (long i = 0; i < n; ++i) {
    double w = 1.0;
    b[0] += x[static_cast<std::size_t>(i)];
    for (int k = 1; k < max_order; ++k) {
      w *= static_cast<double>(i - k + 1) / static_cast<double>(n - k);
      if (w == 0.0) break;
      b[k] += w * x[static_cast<std::size_t>(i)];
    }
  }
  b /= static_cast<double>(n);

  LMomentVector out{Eigen::VectorXd::Zero(max_order)};
  for (int r = 0; r < max_order; ++r)
    for (int k = 0; k <= r; ++k) out.values[r] += legendre_coefficient(r, k) * b[k];
  return out;
}

LMomentVector population_lmoments_by_quadrature(const std::function<double(double)>& quantile, int max_order,
                                                double rel_tol) {
  if (max_order < 1) throw InputError("max L-moment order must be >= 1");
  check_order(max_order - 1);
  std::vector<ShiftedLegendre> legendre;
  for (int r = 0; r < max_order; ++r) legendre.push_back(shifted_legendre(r));

  // Geometric breakpoints toward both ends let bisection resolve endpoint growth of Q.
  IntegrationPlan plan = IntegrationPlan::on(0.0, 1.0, rel_tol);
  std::vector<double> bps{0.5};
  for (double e = 1e-1; e >= 1e-12; e *= 1e-1) {
    bps.push_back(e);
    bps.push_back(1.0 - e);
  }
  plan.with_breakpoints(std::move(bps));
  plan.abs_tol = 1e-14;
  plan.max_subdivisions = 50000;

  auto integrand = [&](double u, Eigen::Ref<Eigen::VectorXd> out) {
    const double q = quantile(u);
    for (int r = 0; r < max_order; ++r) out[r] = q * legendre[static_cast<std::size_t>(r)](u);
  };
  const VectorQuadratureResult res = integrate_vector(integrand, max_order, plan);
  if (!res.converged || !res.value.allFinite())
    throw NumericalError("L-moment quadrature did not converge: achieved error " + std::to_string(res.error) +
                         " against relative tolerance " + std::to_string(rel_tol));
  return {res.value};
}

}  // namespace lmix
