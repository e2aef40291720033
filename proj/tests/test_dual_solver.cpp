#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lmix/dual_solver.hpp"
#include "lmix/errors.hpp"
#include "lmix/quadrature.hpp"

#include <cmath>
#include <random>

using namespace lmix;

namespace {

SemiparametricModel table1_model(std::vector<int> orders = {2, 3, 4}) {
  auto f1 = ComponentDistribution::weibull(0.5, 2.0);
  f1.set_free({"shape"});
  auto f0 = ComponentDistribution::weibull(1.0, 1.0);
  f0.set_free({"shape"});
  return {f1, ConstraintModel(f0, std::move(orders))};
}

MixtureSpec table1_truth() {
  return {0.3, ComponentDistribution::weibull(0.5, 2.0), ComponentDistribution::weibull(1.0, 1.0)};
}

Eigen::VectorXd phi_star() { return Eigen::Vector3d(0.3, 2.0, 1.0); }

// Independent golden-section maximiser of a concave scalar function.
template <typename F>
double golden_max(F f, double lo, double hi) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - r * (hi - lo), b = lo + r * (hi - lo), fa = f(a), fb = f(b);
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    if (fa < fb) {
      lo = a, a = b, fa = fb, b = lo + r * (hi - lo), fb = f(b);
    } else {
      hi = b, b = a, fb = fa, a = hi - r * (hi - lo), fa = f(a);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("parameter vector layout") {
  const auto model = table1_model();
  CHECK(model.dim() == 3);
  CHECK(model.parameter_names() == std::vector<std::string>{"lambda", "theta.shape", "alpha.shape"});
  const auto p = model.split(phi_star());
  CHECK(p.lambda == 0.3);
  CHECK(p.theta[0] == 2.0);
  CHECK(p.alpha[0] == 1.0);
  CHECK(model.join(p) == phi_star());
}

TEST_CASE("H vanishes at xi = 0") {
  const MixtureCdf truth(table1_truth());
  const auto model = table1_model();
  for (double lambda : {0.1, 0.5, 0.8}) {
    const SignedSubCdf f0(truth, ComponentDistribution::weibull(0.5, 1.3), lambda);
    const Eigen::VectorXd m = model.constraints().m(Eigen::VectorXd::Constant(1, 2.0));
    for (double gamma : {0.5, 2.0})
      CHECK(objective_H(f0, model.basis(), m, Eigen::VectorXd::Zero(3), DivergenceGenerator::cressie_read(gamma)) == 0.0);
  }
}

TEST_CASE("zero at truth with the true CDF") {
  const MixtureCdf truth(table1_truth());
  const auto model = table1_model();
  const DualState s = profiled_objective(model, phi_star(), truth, DivergenceGenerator::chi2());
  CHECK(std::abs(s.objective) <= 1e-6);
  CHECK(s.xi.norm() <= 1e-5);
  const DualState n = profiled_objective(model, phi_star(), truth, DivergenceGenerator::cressie_read(0.5));
  CHECK(n.iterations <= 2);
  CHECK(n.xi.norm() <= 1e-5);
}

TEST_CASE("completing the square for chi2") {
  const MixtureCdf truth(table1_truth());
  const auto model = table1_model();
  const SignedSubCdf f0(truth, ComponentDistribution::weibull(0.5, 2.0), 0.3);
  const ConstraintIntegrals ci = constraint_integrals(f0, model.basis(), 1e-12);
  const Eigen::Vector3d delta(0.01, -0.004, 0.002);
  const Eigen::VectorXd m = ci.b + delta;
  const DualState s = inner_sup_chi2(f0, model.basis(), m, 1e-12);
  const double expected = 0.5 * delta.dot(ci.omega.fullPivLu().solve(delta));
  CHECK(s.objective == doctest::Approx(expected).epsilon(1e-9));
  // H evaluated by quadrature of ψ at the returned ξ agrees with the closed form.
  const double h = objective_H(f0, model.basis(), m, s.xi, DivergenceGenerator::chi2(), 1e-12);
  CHECK(std::abs(h - s.objective) <= 1e-10);
  CHECK(s.gradient_norm <= 1e-12);
  CHECK((s.omega - s.omega.transpose()).norm() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s.omega).eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("scalar constraint against a golden-section oracle") {
  const MixtureCdf truth(table1_truth());
  const auto model = table1_model({2});
  const SignedSubCdf f0(truth, ComponentDistribution::weibull(0.5, 2.4), 0.45);
  const Eigen::VectorXd m = Eigen::VectorXd::Constant(1, -0.3);
  const DualState s = inner_sup_chi2(f0, model.basis(), m, 1e-12);
  const auto g = DivergenceGenerator::chi2();
  const double xi = golden_max(
      [&](double x) { return objective_H(f0, model.basis(), m, Eigen::VectorXd::Constant(1, x), g, 1e-12); }, -100.0,
      100.0);
  // Golden section on H resolves ξ only to sqrt(quadrature noise / curvature).
  CHECK(std::abs(s.xi[0] - xi) <= 1e-6 * std::max(1.0, std::abs(xi)));
  // Bisection on the stationarity condition m − ∫K₂ψ′(ξK₂)dy = 0 reaches 1e-8.
  auto slope = [&](double x) {
    return m[0] - integrate([&](double y) { const double k = model.basis().values(f0(y))[0]; return k * g.psi_prime(x * k); },
                            f0.plan(1e-13)).value;
  };
  double lo = -100.0, hi = 100.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  CHECK(std::abs(s.xi[0] - 0.5 * (lo + hi)) <= 1e-8 * std::max(1.0, std::abs(xi)));
}

TEST_CASE("Newton with gamma = 2 reproduces the closed form") {
  const MixtureCdf truth(table1_truth());
  const auto model = table1_model();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lam(0.1, 0.7), nu1(1.2, 3.5), nu0(0.6, 2.0);
  for (int i = 0; i < 10; ++i) {
    const Eigen::Vector3d phi(lam(rng), nu1(rng), nu0(rng));
    CAPTURE(phi.transpose());
    const DualState c = profiled_objective(model, phi, truth, DivergenceGenerator::chi2(), 1e-10);
    const auto p = model.split(phi);
    const SignedSubCdf f0(truth, model.parametric_at(p), p.lambda);
    const DualState n = inner_sup_newton(f0, model.basis(), model.constraints().m(p.alpha),
                                         DivergenceGenerator::chi2(), 1e-10);
    CHECK(n.converged);
    CHECK((n.xi - c.xi).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, c.xi.cwiseAbs().maxCoeff()));
    CHECK(std::abs(n.objective - c.objective) <= 1e-8 * std::max(1.0, std::abs(c.objective)));
  }
}

TEST_CASE("generic generator on a perturbed scenario") {
  const MixtureCdf truth(table1_truth());
  const auto model = table1_model();
  const Eigen::Vector3d phi(0.35, 2.3, 1.2);
  for (double gamma : {0.5, 0.0, 1.0, 3.0}) {
    CAPTURE(gamma);
    const auto g = DivergenceGenerator::cressie_read(gamma);
    const DualState s = profiled_objective(model, phi, truth, g);
    CHECK(s.converged);
    CHECK(s.gradient_norm <= 1e-9);
    CHECK(s.objective >= 0.0);
    // Independent gradient: m − ∫K ψ′(ξᵗK) dy by a separate scalar quadrature per component.
    const auto p = model.split(phi);
    const SignedSubCdf f0(truth, model.parametric_at(p), p.lambda);
    for (Eigen::Index r = 0; r < 3; ++r) {
      const double integral = integrate(
          [&](double y) {
            const Eigen::VectorXd k = model.basis().values(f0(y));
            return k[r] * g.psi_prime(s.xi.dot(k));
          },
          f0.plan(1e-11)).value;
      CHECK(std::abs(s.m[r] - integral) <= 1e-6);
    }
  }
}

TEST_CASE("profiled objective is nonnegative and positive away from truth") {
  const MixtureCdf truth(table1_truth());
  const auto model = table1_model();
  for (double lambda : {0.05, 0.3, 0.6, 0.9})
    for (double nu1 : {1.0, 2.0, 4.0})
      for (double nu0 : {0.6, 1.0, 3.0}) {
        const DualState s = profiled_objective(model, Eigen::Vector3d(lambda, nu1, nu0), truth, DivergenceGenerator::chi2());
        CHECK(s.objective >= 0.0);
      }
  const DualState off = profiled_objective(model, Eigen::Vector3d(0.01, 2.0, 3.0), truth, DivergenceGenerator::chi2());
  CHECK(off.objective > 1e-4);
}

TEST_CASE("empirical plug-in runs on a sample") {
  const auto x = sample_mixture(table1_truth(), 1000, 8);
  const EmpiricalCdf fn(x);
  const auto model = table1_model();
  const DualState s = profiled_objective(model, phi_star(), fn, DivergenceGenerator::chi2());
  CHECK(s.objective >= 0.0);
  CHECK(s.objective < 1e-2);
  const SignedSubCdf f0(fn, ComponentDistribution::weibull(0.5, 2.0), 0.3);
  const DualState n = inner_sup_newton(f0, model.basis(), model.constraints().m(Eigen::VectorXd::Constant(1, 1.0)),
                                       DivergenceGenerator::chi2());
  CHECK(std::abs(n.objective - s.objective) <= 1e-8 * std::max(1.0, s.objective));
}
