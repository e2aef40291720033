#include "lmix/asymptotics.hpp"

#include "lmix/errors.hpp"
#include "lmix/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lmix {

namespace {

constexpr double kMaxCondition = 1e12;

double condition_number(const Eigen::MatrixXd& a) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
  const double lo = ev.minCoeff();
  return lo > 0.0 ? ev.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd covariance_at(const SignedSubCdf& f0, const CdfSource& mixture, const LMomentBasis& basis,
                              const std::vector<double>& edges, int order) {
  const CompositeRule rule = composite_rule(edges, order);
  const GaussLegendreRule gl = gauss_legendre(order);
  const Eigen::Index l = basis.size();
  const Eigen::Index panels = static_cast<Eigen::Index>(edges.size()) - 1;

  // Kernel F(min)(1 − F(max)) equals F(min) − F(x)F(y) but vanishes where F is 0
  // or 1, so long flat tails add nothing instead of two cancelling giants.
  // A_p = Σ_{i∈p} w_i F_i K′_i and B_p = Σ_{i∈p} w_i (1 − F_i) K′_i per panel.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(l, panels), b = Eigen::MatrixXd::Zero(l, panels);
  Eigen::MatrixXd upper = Eigen::MatrixXd::Zero(l, l);
  Eigen::VectorXd k(l), inner(l), ky(l);
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i], w = rule.weights[i];
    const double fx = mixture(x);
    basis.derivatives(f0.from_mixture(x, fx), k);
    const auto p = static_cast<Eigen::Index>(rule.panel[static_cast<std::size_t>(i)]);
    a.col(p) += w * fx * k;
    b.col(p) += w * (1.0 - fx) * k;
    if (fx == 0.0) continue;
    // Triangle x ≤ y inside the panel: inner Gauss rule on [x, right edge].
    const double right = edges[static_cast<std::size_t>(p + 1)];
    const double c = 0.5 * (x + right), h = 0.5 * (right - x);
    inner.setZero();
    for (int j = 0; j < order; ++j) {
      const double y = c + h * gl.nodes[j];
      const double fy = mixture(y);
      if (fy == 1.0) continue;
      basis.derivatives(f0.from_mixture(y, fy), ky);
      inner += h * gl.weights[j] * (1.0 - fy) * ky;
    }
    upper.noalias() += (w * fx) * k * inner.transpose();
  }
  // Off-diagonal panels p < q: min(x, y) = x.
  Eigen::VectorXd suffix = Eigen::VectorXd::Zero(l);
  for (Eigen::Index p = panels - 1; p >= 0; --p) {
    upper.noalias() += a.col(p) * suffix.transpose();
    suffix += b.col(p);
  }
  const double inv = 1.0 / (1.0 - f0.lambda());
  return (inv * inv) * (upper + upper.transpose());
}

}  // namespace

ConstraintCovariance constraint_covariance(const SemiparametricModel& model, const Eigen::Ref<const Eigen::VectorXd>& phi,
                                           const CdfSource& mixture, const CovarianceOptions& options) {
  if (options.panels < 2 || options.order < 1) throw InputError("covariance rule needs at least 2 panels");
  const auto pt = model.split(phi);
  const SignedSubCdf f0(mixture, model.parametric_at(pt), pt.lambda);
  const IntegrationPlan plan = f0.plan(options.rel_tol);
  const std::vector<double> fine_edges = panel_edges(plan, options.panels);
  const std::vector<double> coarse_edges = panel_edges(plan, options.panels / 2);
  ConstraintCovariance out;
  out.sigma = covariance_at(f0, mixture, model.basis(), fine_edges, options.order);
  if (!out.sigma.allFinite()) throw NumericalError("constraint covariance integral is not finite");
  if (coarse_edges != fine_edges)
    out.richardson =
        (out.sigma - covariance_at(f0, mixture, model.basis(), coarse_edges, options.order)).cwiseAbs().maxCoeff();
  return out;
}

JacobianBlocks jacobian_blocks(const SemiparametricModel& model, const Eigen::Ref<const Eigen::VectorXd>& phi,
                               const CdfSource& mixture, double rel_tol) {
  const auto pt = model.split(phi);
  const ComponentDistribution f1 = model.parametric_at(pt);
  const SignedSubCdf f0(mixture, f1, pt.lambda);
  const LMomentBasis& basis = model.basis();
  const Eigen::Index l = basis.size(), dt = model.theta_dim(), da = model.alpha_dim();

  // Packed as ℓ·(1 + dim θ) values: λ block then one block per θ coordinate.
  Eigen::VectorXd k(l);
  auto integrand = [&](double y, Eigen::Ref<Eigen::VectorXd> out) {
    const double fy = mixture(y);
    basis.derivatives(f0.from_mixture(y, fy), k);
    out.head(l) = (fy - f1.cdf(y)) * k;
    if (dt > 0) {
      const Eigen::VectorXd grad = f1.cdf_gradient_free(y);
      for (Eigen::Index j = 0; j < dt; ++j) out.segment(l * (1 + j), l) = grad[j] * k;
    }
  };
  const VectorQuadratureResult r = integrate_vector(integrand, l * (1 + dt), f0.plan(rel_tol));
  if (!r.value.allFinite()) throw NumericalError("Jacobian integral is not finite");

  JacobianBlocks out;
  out.phi_xi.resize(l, model.dim());
  const double inv = 1.0 / (1.0 - pt.lambda);
  out.phi_xi.col(0) = -inv * inv * r.value.head(l);
  for (Eigen::Index j = 0; j < dt; ++j) out.phi_xi.col(1 + j) = pt.lambda * inv * r.value.segment(l * (1 + j), l);
  if (da > 0) out.phi_xi.rightCols(da) = model.constraints().gradient(pt.alpha);
  out.xi_xi = constraint_integrals(f0, basis, rel_tol).omega;
  return out;
}

AsymptoticReport assemble_covariance(const JacobianBlocks& blocks, const Eigen::MatrixXd& sigma, std::size_t n) {
  const Eigen::MatrixXd& j = blocks.phi_xi;
  const Eigen::MatrixXd& omega = blocks.xi_xi;
  const Eigen::Index l = omega.rows(), d = j.cols();
  if (omega.cols() != l || j.rows() != l || sigma.rows() != l || sigma.cols() != l)
    throw InputError("covariance blocks have inconsistent shapes");
  if (n == 0) throw InputError("sample size must be positive");

  AsymptoticReport rep;
  rep.n = n;
  rep.sigma = sigma;
  rep.jacobian = j;
  rep.omega = omega;
  rep.condition_omega = condition_number(omega);
  if (!(rep.condition_omega <= kMaxCondition)) {
    std::ostringstream msg;
    msg << "J_xi_xi is ill-conditioned (condition " << rep.condition_omega << ")";
    throw NumericalError(msg.str());
  }
  // With Ω = LLᵗ and L⁻¹J = QR: Σ̃ = R⁻¹R⁻ᵗ, H = R⁻¹QᵗL⁻¹, P = L⁻ᵗ(I − QQᵗ)L⁻¹.
  // The projector form keeps P·J at rounding level however ill-conditioned JᵗΩ⁻¹J is.
  const Eigen::LLT<Eigen::MatrixXd> omega_f(omega);
  if (omega_f.info() != Eigen::Success) throw NumericalError("J_xi_xi is not positive definite");
  const Eigen::MatrixXd l_inv = omega_f.matrixL().solve(Eigen::MatrixXd::Identity(l, l));
  const Eigen::MatrixXd w = l_inv * j;
  const Eigen::MatrixXd info = w.transpose() * w;
  rep.condition_information = condition_number(info);
  if (!(rep.condition_information <= kMaxCondition) || l < d) {
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(j);
    std::ostringstream msg;
    msg << "J_phi_xi' J_xi_xi^-1 J_phi_xi is ill-conditioned (condition " << rep.condition_information
        << ", rank of J_phi_xi " << lu.rank() << " of " << d << ")";
    throw NumericalError(msg.str());
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(l, d);
  const Eigen::MatrixXd r_inv = qr.matrixQR().topLeftCorner(d, d).triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(d, d));
  rep.sigma_tilde = r_inv * r_inv.transpose();
  rep.h = r_inv * q.transpose() * l_inv;
  rep.p = l_inv.transpose() * (Eigen::MatrixXd::Identity(l, l) - q * q.transpose()) * l_inv;
  rep.p = 0.5 * (rep.p + rep.p.transpose()).eval();

  Eigen::MatrixXd stacked(d + l, l);
  stacked << rep.h, rep.p;
  rep.covariance = stacked * sigma * stacked.transpose();
  rep.covariance = 0.5 * (rep.covariance + rep.covariance.transpose()).eval();
  rep.standard_errors =
      (rep.covariance.topLeftCorner(d, d).diagonal().cwiseMax(0.0) / static_cast<double>(n)).cwiseSqrt();
  return rep;
}

AsymptoticReport asymptotic_report(const SemiparametricModel& model, const Eigen::Ref<const Eigen::VectorXd>& phi,
                                   const CdfSource& mixture, std::size_t n, const CovarianceOptions& options) {
  const ConstraintCovariance cov = constraint_covariance(model, phi, mixture, options);
  AsymptoticReport rep = assemble_covariance(jacobian_blocks(model, phi, mixture, options.rel_tol), cov.sigma, n);
  rep.richardson = cov.richardson;
  return rep;
}

double relative_min_eigenvalue(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd s = 0.5 * (a + a.transpose());
  const double tr = s.trace();
  const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  return tr > 0.0 ? lo / tr : lo;
}

}  // namespace lmix
