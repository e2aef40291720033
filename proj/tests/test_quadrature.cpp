#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lmix/errors.hpp"
#include "lmix/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace lmix;

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (int n : {1, 2, 5, 8, 15}) {
    const GaussLegendreRule gl = gauss_legendre(n);
    CHECK(gl.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
    for (int p = 0; p < 2 * n; ++p) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += gl.weights[j] * std::pow(gl.nodes[j], p);
      const double exact = (p % 2 == 1) ? 0.0 : 2.0 / (p + 1);
      CHECK(acc == doctest::Approx(exact).epsilon(1e-13));
    }
    for (int j = 1; j < n; ++j) CHECK(gl.nodes[j] > gl.nodes[j - 1]);
  }
}

TEST_CASE("adaptive integration of simple integrands") {
  IntegrationPlan unit = IntegrationPlan::on(0.0, 1.0);
  CHECK(std::abs(integrate([](double u) { return 2 * u - 1; }, unit).value) < 1e-15);

  IntegrationPlan half_line = IntegrationPlan::on(0.0, 50.0, 1e-10);
  const QuadratureResult r = integrate([](double y) { return (1 - std::exp(-y)) * std::exp(-y); }, half_line);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("endpoint singularity converges with flagging") {
  IntegrationPlan plan = IntegrationPlan::on(0.0, 1.0, 1e-10);
  const QuadratureResult r = integrate([](double x) { return 1.0 / std::sqrt(x); }, plan);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));

  IntegrationPlan tight = IntegrationPlan::on(0.0, 1.0, 1e-14);
  tight.abs_tol = 0.0;
  tight.max_subdivisions = 3;
  const QuadratureResult f = integrate([](double x) { return std::log(x); }, tight);
  CHECK_FALSE(f.converged);
  CHECK(std::isfinite(f.value));
}

TEST_CASE("step functions are exact across registered jumps") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::vector<double> jumps(40);
  for (double& j : jumps) j = unif(rng);
  std::sort(jumps.begin(), jumps.end());
  auto step = [&](double x) {
    return static_cast<double>(std::upper_bound(jumps.begin(), jumps.end(), x) - jumps.begin());
  };
  double exact = 0.0;
  for (double j : jumps) exact += 3.0 - j;
  IntegrationPlan plan = IntegrationPlan::on(-3.0, 3.0);
  plan.with_breakpoints(jumps);
  const QuadratureResult r = integrate(step, plan);
  CHECK(std::abs(r.value - exact) <= 1e-12 * std::max(1.0, exact));
}

TEST_CASE("doubling the subdivision budget stays within the error estimate") {
  auto f = [](double x) { return std::exp(-x * x) * std::cos(3 * x); };
  IntegrationPlan p1 = IntegrationPlan::on(-6.0, 6.0, 1e-9);
  const QuadratureResult a = integrate(f, p1);
  IntegrationPlan p2 = p1;
  p2.max_subdivisions *= 2;
  const QuadratureResult b = integrate(f, p2);
  CHECK(a.converged);
  CHECK(std::abs(a.value - b.value) <= std::max(a.error, 1e-15));
  CHECK(a.value == doctest::Approx(std::sqrt(std::numbers::pi) * std::exp(-2.25)).epsilon(1e-9));
}

TEST_CASE("vector integrand shares one partition") {
  IntegrationPlan plan = IntegrationPlan::on(0.0, 1.0, 1e-12);
  const VectorQuadratureResult r = integrate_vector(
      [](double x, Eigen::Ref<Eigen::VectorXd> out) {
        out[0] = x;
        out[1] = x * x;
        out[2] = std::exp(x);
      },
      3, plan);
  CHECK(r.value[0] == doctest::Approx(0.5));
  CHECK(r.value[1] == doctest::Approx(1.0 / 3.0));
  CHECK(r.value[2] == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
}

TEST_CASE("plan validation") {
  IntegrationPlan p = IntegrationPlan::on(0.0, std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(integrate([](double) { return 1.0; }, p), InputError);
  IntegrationPlan q = IntegrationPlan::on(0.0, 1.0);
  q.with_breakpoints({2.0, 0.5, -1.0, 0.5, 0.25});
  CHECK(q.breakpoints == std::vector<double>{0.25, 0.5});
  CHECK(q.edges() == std::vector<double>{0.0, 0.25, 0.5, 1.0});
}

TEST_CASE("two-dimensional rule") {
  IntegrationPlan px = IntegrationPlan::on(0.0, 2.0);
  IntegrationPlan py = IntegrationPlan::on(-1.0, 3.0);
  auto g = [](double x) { return std::exp(-x) * (1 + x); };
  auto h = [](double y) { return std::cos(y) + y * y; };
  const QuadratureResult sep = integrate2d([&](double x, double y) { return g(x) * h(y); }, px, py);
  const double gi = integrate(g, px).value;
  const double hi = integrate(h, py).value;
  CHECK(std::abs(sep.value - gi * hi) <= 1e-8 * std::abs(gi * hi));
  CHECK(sep.converged);

  const QuadratureResult zero = integrate2d([](double, double) { return 0.0; }, px, py);
  CHECK(zero.value == 0.0);
}

TEST_CASE("panel edges respect plan breakpoints") {
  IntegrationPlan p = IntegrationPlan::on(0.0, 10.0);
  p.with_breakpoints({1.0, 9.5});
  const std::vector<double> e = panel_edges(p, 16);
  CHECK(e.front() == 0.0);
  CHECK(e.back() == 10.0);
  CHECK(e.size() >= 17);
  CHECK(std::find(e.begin(), e.end(), 1.0) != e.end());
  CHECK(std::find(e.begin(), e.end(), 9.5) != e.end());
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] > e[i - 1]);
}
