#include "lmix/dual_solver.hpp"

#include "lmix/errors.hpp"
#include "lmix/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace lmix {

SemiparametricModel::SemiparametricModel(ComponentDistribution parametric, ConstraintModel constraints)
    : parametric_(std::move(parametric)), constraints_(std::move(constraints)), basis_(constraints_.orders()) {}

SemiparametricModel::Point SemiparametricModel::split(const Eigen::Ref<const Eigen::VectorXd>& phi) const {
  if (phi.size() != dim()) throw InputError("parameter vector has the wrong length");
  return {phi[0], phi.segment(1, theta_dim()), phi.segment(1 + theta_dim(), alpha_dim())};
}

Eigen::VectorXd SemiparametricModel::join(const Point& p) const {
  Eigen::VectorXd phi(dim());
  phi << p.lambda, p.theta, p.alpha;
  return phi;
}

std::vector<std::string> SemiparametricModel::parameter_names() const {
  std::vector<std::string> names{"lambda"};
  for (const auto& n : parametric_.free_names()) names.push_back("theta." + n);
  for (const auto& n : constraints_.family_template().free_names()) names.push_back("alpha." + n);
  return names;
}

namespace {

// Packed upper triangle of a q×q symmetric matrix.
Eigen::Index packed_size(Eigen::Index q) { return q * (q + 1) / 2; }

void pack_outer(const Eigen::VectorXd& k, double w, Eigen::Ref<Eigen::VectorXd> out) {
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < k.size(); ++i)
    for (Eigen::Index j = i; j < k.size(); ++j) out[idx++] = w * k[i] * k[j];
}

Eigen::MatrixXd unpack(const Eigen::Ref<const Eigen::VectorXd>& packed, Eigen::Index q) {
  Eigen::MatrixXd m(q, q);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = i; j < q; ++j) m(i, j) = m(j, i) = packed[idx++];
  return m;
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

// Factorises a symmetric positive definite matrix with a conditioning guard.
struct NewtonEval {
  double h;
  Eigen::VectorXd grad;
  Eigen::MatrixXd neg_hessian;
};

NewtonEval newton_eval(const SignedSubCdf& f0, const LMomentBasis& basis, const Eigen::VectorXd& m,
                       const Eigen::VectorXd& xi, const DivergenceGenerator& g, const IntegrationPlan& plan) {
  const Eigen::Index q = basis.size();
  Eigen::VectorXd k(q);
  auto integrand = [&](double y, Eigen::Ref<Eigen::VectorXd> out) {
    basis.values(f0(y), k);
    const double t = xi.dot(k);
    double psi, d1, d2;
    try {
      psi = g.psi(t);
      d1 = g.psi_prime(t);
      d2 = g.psi_second(t);
    } catch (const DomainError& e) {
      std::ostringstream os;
      os.precision(17);
      os << e.what() << " (at y = " << y << ")";
      throw DomainError(os.str(), y);
    }
    out[0] = psi;
    out.segment(1, q) = d1 * k;
    pack_outer(k, d2, out.segment(1 + q, packed_size(q)));
  };
  const VectorQuadratureResult r = integrate_vector(integrand, 1 + q + packed_size(q), plan);
  if (!r.converged) throw NumericalError("dual objective quadrature did not converge");
  return {xi.dot(m) - r.value[0], m - r.value.segment(1, q), unpack(r.value.segment(1 + q, packed_size(q)), q)};
}

}  // namespace

Eigen::LDLT<Eigen::MatrixXd> guarded_factor(const Eigen::MatrixXd& a, double& condition, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double hi = ev.cwiseAbs().maxCoeff();
  condition = ev[0] > 0.0 ? hi / ev[0] : std::numeric_limits<double>::infinity();
  if (!(condition <= 1e12)) {
    std::ostringstream os;
    os << what << " is numerically singular (condition " << condition << "); near-null direction "
       << format_vector(es.eigenvectors().col(0));
    throw NumericalError(os.str());
  }
  return a.ldlt();
}

ConstraintIntegrals constraint_integrals(const SignedSubCdf& f0, const LMomentBasis& basis, double rel_tol) {
  const Eigen::Index q = basis.size();
  Eigen::VectorXd k(q);
  auto integrand = [&](double y, Eigen::Ref<Eigen::VectorXd> out) {
    basis.values(f0(y), k);
    out.head(q) = k;
    pack_outer(k, 1.0, out.tail(packed_size(q)));
  };
  const VectorQuadratureResult r = integrate_vector(integrand, q + packed_size(q), f0.plan(rel_tol));
  return {r.value.head(q), unpack(r.value.tail(packed_size(q)), q), r.error, r.converged};
}

double objective_H(const SignedSubCdf& f0, const LMomentBasis& basis, const Eigen::VectorXd& m,
                   const Eigen::VectorXd& xi, const DivergenceGenerator& g, double rel_tol) {
  if (xi.size() != basis.size() || m.size() != basis.size()) throw InputError("ξ and m must match the basis size");
  if (!xi.allFinite()) throw InputError("ξ must be finite");
  Eigen::VectorXd k(basis.size());
  auto integrand = [&](double y) {
    basis.values(f0(y), k);
    try {
      return g.psi(xi.dot(k));
    } catch (const DomainError& e) {
      std::ostringstream os;
      os.precision(17);
      os << e.what() << " (at y = " << y << ")";
      throw DomainError(os.str(), y);
    }
  };
  const QuadratureResult r = integrate(integrand, f0.plan(rel_tol));
  if (!r.converged) throw NumericalError("dual objective quadrature did not converge");
  return xi.dot(m) - r.value;
}

DualState inner_sup_chi2(const SignedSubCdf& f0, const LMomentBasis& basis, const Eigen::VectorXd& m,
                         double rel_tol) {
  if (m.size() != basis.size()) throw InputError("m must match the basis size");
  const ConstraintIntegrals ci = constraint_integrals(f0, basis, rel_tol);
  if (!ci.converged) throw NumericalError("constraint integrals did not converge");
  DualState s;
  const auto ldlt = guarded_factor(ci.omega, s.condition, "Omega");
  const Eigen::VectorXd residual = m - ci.b;
  s.xi = ldlt.solve(residual);
  s.objective = 0.5 * residual.dot(s.xi);
  s.gradient_norm = (residual - ci.omega * s.xi).norm();
  s.omega = ci.omega;
  s.b = ci.b;
  s.m = m;
  s.iterations = 0;
  s.xi_large = s.xi.norm() > 1e6;
  return s;
}

DualState inner_sup_newton(const SignedSubCdf& f0, const LMomentBasis& basis, const Eigen::VectorXd& m,
                           const DivergenceGenerator& g, double rel_tol, const std::optional<Eigen::VectorXd>& xi0) {
  if (m.size() != basis.size()) throw InputError("m must match the basis size");
  const IntegrationPlan plan = f0.plan(rel_tol);
  DualState s;
  s.m = m;
  s.xi = Eigen::VectorXd::Zero(basis.size());
  NewtonEval cur;
  bool started = false;
  if (xi0 && xi0->size() == basis.size() && xi0->allFinite()) {
    try {
      cur = newton_eval(f0, basis, m, *xi0, g, plan);
      s.xi = *xi0;
      started = cur.h >= 0.0;  // a warm start worse than ξ = 0 is discarded
    } catch (const DomainError&) {
    }
  }
  if (!started) {
    s.xi.setZero();
    cur = newton_eval(f0, basis, m, s.xi, g, plan);
  }

  constexpr double kGradTol = 1e-9;
  constexpr double kArmijo = 1e-4;
  s.converged = false;
  for (s.iterations = 0; s.iterations < 100; ++s.iterations) {
    if (cur.grad.norm() <= kGradTol) {
      s.converged = true;
      break;
    }
    double cond;
    const Eigen::VectorXd dir = guarded_factor(cur.neg_hessian, cond, "dual Hessian").solve(cur.grad);
    const double slope = cur.grad.dot(dir);
    // Predicted gain below quadrature resolution: the remaining gradient is noise.
    if (slope <= 0.1 * rel_tol * std::max(std::abs(cur.h), 1e-12)) {
      s.converged = true;
      break;
    }
    double step = 1.0;
    bool accepted = false;
    for (int half = 0; half < 60; ++half, step *= 0.5) {
      const Eigen::VectorXd trial = s.xi + step * dir;
      NewtonEval next;
      try {
        next = newton_eval(f0, basis, m, trial, g, plan);
      } catch (const DomainError&) {
        continue;
      }
      if (next.h >= cur.h + kArmijo * step * slope) {
        s.xi = trial;
        cur = std::move(next);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (slope <= 1e-12 * std::max(1.0, std::abs(cur.h))) {
        s.converged = true;
        break;
      }
      throw NumericalError("Newton line search failed; last feasible xi " + format_vector(s.xi));
    }
    s.trace.push_back(cur.h);
  }
  s.objective = cur.h;
  s.gradient_norm = cur.grad.norm();
  s.omega = cur.neg_hessian;
  s.xi_large = s.xi.norm() > 1e6;
  return s;
}

DualState profiled_objective(const SemiparametricModel& model, const Eigen::Ref<const Eigen::VectorXd>& phi,
                             const CdfSource& mixture, const DivergenceGenerator& g, double rel_tol,
                             const std::optional<Eigen::VectorXd>& xi0) {
  const SemiparametricModel::Point p = model.split(phi);
  const SignedSubCdf f0(mixture, model.parametric_at(p), p.lambda);
  const Eigen::VectorXd m = model.constraints().m(p.alpha);
  if (g.is_chi2()) return inner_sup_chi2(f0, model.basis(), m, rel_tol);
  return inner_sup_newton(f0, model.basis(), m, g, std::min(rel_tol, 1e-10), xi0);
}

}  // namespace lmix
