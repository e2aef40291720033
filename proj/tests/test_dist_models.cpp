#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lmix/dist_models.hpp"
#include "lmix/errors.hpp"
#include "lmix/lmom_core.hpp"
#include "lmix/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace lmix;

namespace {

std::vector<ComponentDistribution> all_families() {
  return {ComponentDistribution::weibull(1.3, 1.7), ComponentDistribution::two_sided_weibull(1.5, 3.0),
          ComponentDistribution::lognormal(3.0, 0.5), ComponentDistribution::gaussian(-0.4, 0.5),
          ComponentDistribution::exponential(2.0), ComponentDistribution::weibull(0.5, 0.6)};
}

Eigen::Vector3d quadrature_oracle(const ComponentDistribution& d) {
  const LMomentVector l = population_lmoments_by_quadrature([&](double u) { return d.quantile(u); }, 4, 1e-12);
  return {l.at(2), l.at(3), l.at(4)};
}

}  // namespace

TEST_CASE("normal quantile inverts the CDF") {
  for (double p : {1e-300, 1e-20, 1e-8, 0.001, 0.02425, 0.3, 0.5, 0.77, 0.97575, 0.999, 1 - 1e-12}) {
    CAPTURE(p);
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-13));
  }
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-15));
}

TEST_CASE("cdf is monotone with proper limits and quantile inverts it") {
  for (const auto& d : all_families()) {
    CAPTURE(d.describe());
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double p = (i - 0.5) / 100.0;
      const double x = d.quantile(p);
      CHECK(d.cdf(x) == doctest::Approx(p).epsilon(1e-12));
      CHECK(d.quantile(d.cdf(x)) == doctest::Approx(x).epsilon(1e-9).scale(1.0));
      CHECK(d.cdf(x) >= prev);
      CHECK(d.pdf(x) >= 0.0);
      prev = d.cdf(x);
    }
    CHECK(d.cdf(-1e6) == doctest::Approx(0.0));
    CHECK(d.cdf(1e6) == doctest::Approx(1.0));
  }
}

TEST_CASE("pdf integrates the cdf") {
  for (const auto& d : all_families()) {
    CAPTURE(d.describe());
    const double a = d.quantile(0.1), b = d.quantile(0.8);
    IntegrationPlan plan = IntegrationPlan::on(a, b, 1e-12);
    plan.with_breakpoints({0.0});
    const double mass = integrate([&](double x) { return d.pdf(x); }, plan).value;
    CHECK(mass == doctest::Approx(0.7).epsilon(1e-10));
  }
}

TEST_CASE("cdf gradients match central differences") {
  for (const auto& d : all_families()) {
    CAPTURE(d.describe());
    for (double p : {0.05, 0.3, 0.6, 0.95}) {
      const double x = d.quantile(p);
      const Eigen::VectorXd g = d.cdf_gradient(x);
      for (Eigen::Index i = 0; i < d.params().size(); ++i) {
        const double v = d.params()[i];
        const double h = 1e-6 * std::max(1.0, std::abs(v));
        const std::string& name = d.param_names()[static_cast<std::size_t>(i)];
        const double fd = (d.with_param(name, v + h).cdf(x) - d.with_param(name, v - h).cdf(x)) / (2 * h);
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
      }
    }
  }
  // Two-sided Weibull on the negative half-line.
  const auto t = ComponentDistribution::two_sided_weibull(1.5, 3.0);
  const double x = -1.1, h = 1e-6;
  const Eigen::VectorXd g = t.cdf_gradient(x);
  CHECK(g[1] == doctest::Approx((t.with_param("shape", 3.0 + h).cdf(x) - t.with_param("shape", 3.0 - h).cdf(x)) / (2 * h)));
}

TEST_CASE("free-parameter bookkeeping") {
  auto d = ComponentDistribution::lognormal(3.0, 0.5);
  d.set_free({"mu"});
  CHECK(d.free_count() == 1);
  CHECK(d.free_values()[0] == 3.0);
  const auto e = d.with_free(Eigen::VectorXd::Constant(1, 2.0));
  CHECK(e.params()[0] == 2.0);
  CHECK(e.params()[1] == 0.5);
  CHECK(d.cdf_gradient_free(20.0).size() == 1);
  CHECK_THROWS_AS(d.with_param("sigma", -1.0), InputError);
  CHECK_THROWS_AS(d.set_free({"shape"}), InputError);
}

TEST_CASE("Weibull L-moments: exponential special case") {
  for (double s : {0.3, 1.0, 4.0}) {
    const Eigen::Vector3d l = weibull_lmoments(s, 1.0);
    CHECK(l[0] == doctest::Approx(s / 2).epsilon(1e-14));
    CHECK(l[1] / l[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(l[2] / l[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  }
  double prev = 1e300;
  for (double nu = 1.0; nu <= 50.0; nu *= 1.5) {
    const double l2 = weibull_lmoments(1.0, nu)[0];
    CHECK(l2 < prev);
    prev = l2;
  }
  CHECK_THROWS_AS(weibull_lmoments(0.0, 1.0), InputError);
  CHECK_THROWS_AS(weibull_lmoments(1.0, -1.0), InputError);
}

TEST_CASE("closed-form L-moments against the quadrature oracle on a 5x5 grid") {
  for (double scale : {0.5, 1.0, 1.5, 2.0, 4.0})
    for (double shape : {0.7, 1.0, 1.5, 3.0, 6.0}) {
      CAPTURE(scale);
      CAPTURE(shape);
      const Eigen::Vector3d w = weibull_lmoments(scale, shape);
      const Eigen::Vector3d wq = quadrature_oracle(ComponentDistribution::weibull(scale, shape));
      CHECK((w - wq).cwiseAbs().maxCoeff() <= 1e-6);
      const Eigen::Vector3d t = two_sided_weibull_lmoments(scale, shape);
      const Eigen::Vector3d tq = quadrature_oracle(ComponentDistribution::two_sided_weibull(scale, shape));
      CHECK((t - tq).cwiseAbs().maxCoeff() <= 1e-6);
      CHECK(t[1] == 0.0);
    }
}

TEST_CASE("Laplace special case of the two-sided Weibull") {
  const Eigen::Vector3d l = two_sided_weibull_lmoments(2.0, 1.0);
  CHECK(l[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(l[2] / l[0] == doctest::Approx(17.0 / 72.0).epsilon(1e-13));
  const Eigen::Vector3d q = quadrature_oracle(ComponentDistribution::two_sided_weibull(2.0, 1.0));
  CHECK(q[0] == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("Gaussian and exponential closed forms") {
  const Eigen::Vector3d g = gaussian_lmoments(1.0, 2.0);
  CHECK((g - quadrature_oracle(ComponentDistribution::gaussian(1.0, 2.0))).cwiseAbs().maxCoeff() <= 1e-8);
  const Eigen::Vector3d e = exponential_lmoments(0.5);
  CHECK((e - quadrature_oracle(ComponentDistribution::exponential(0.5))).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("lognormal L-moments") {
  // Refinement oracle: fixed composite Gauss-Legendre in z, many panels.
  auto oracle = [](double mu, double sigma) {
    const GaussLegendreRule gl = gauss_legendre(10);
    const int panels = 2000;
    const double lo = -10.0, hi = 10.0 + sigma, h = (hi - lo) / panels;
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    const ShiftedLegendre p1 = shifted_legendre(1), p2 = shifted_legendre(2), p3 = shifted_legendre(3);
    for (int k = 0; k < panels; ++k)
      for (int j = 0; j < 10; ++j) {
        const double z = lo + h * (k + 0.5 * (gl.nodes[j] + 1.0));
        const double w = 0.5 * h * gl.weights[j] * std::exp(mu + sigma * z) * normal_pdf(z);
        const double u = normal_cdf(z);
        acc += w * Eigen::Vector3d(p1(u), p2(u), p3(u));
      }
    return acc;
  };
  for (auto [mu, sigma] : {std::pair{3.0, 0.5}, {0.0, 1.0}, {-1.0, 2.0}, {1.0, 0.2}}) {
    CAPTURE(mu);
    CAPTURE(sigma);
    const Eigen::Vector3d l = lognormal_lmoments(mu, sigma);
    CHECK((l - oracle(mu, sigma)).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, l[0]));
    CHECK(l[0] == doctest::Approx(std::exp(mu + sigma * sigma / 2) * std::erf(sigma / 2)).epsilon(1e-10));
    CHECK(l[1] > 0.0);
    // Memoised repeat is identical.
    CHECK(lognormal_lmoments(mu, sigma) == l);
  }
  const auto d = ComponentDistribution::lognormal(3.0, 0.5);
  CHECK(component_lmoments(d, {1})[0] == doctest::Approx(std::exp(3.125)));
}

TEST_CASE("component_lmoments beyond order 4 uses quadrature") {
  const auto d = ComponentDistribution::exponential(1.0);
  const Eigen::VectorXd l = component_lmoments(d, {2, 5});
  CHECK(l[0] == doctest::Approx(0.5));
  CHECK(l[1] == doctest::Approx(1.0 / 20.0).epsilon(1e-9));  // λ_r = 1/(r(r−1)) for Exp(1)
}

TEST_CASE("constraint model values and gradient") {
  auto w = ComponentDistribution::weibull(1.0, 1.5);
  w.set_free({"shape"});
  const ConstraintModel model(w, {2, 3, 4});
  const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, 1.5);
  CHECK((model.m(a) + weibull_lmoments(1.0, 1.5)).norm() == 0.0);
  const Eigen::MatrixXd g = model.gradient(a);
  CHECK(g.rows() == 3);
  CHECK(g.cols() == 1);
  const double h = 1e-4;
  const Eigen::Vector3d fd = -(weibull_lmoments(1.0, 1.5 + h) - weibull_lmoments(1.0, 1.5 - h)) / (2 * h);
  CHECK((g.col(0) - fd).norm() <= 1e-6);
}

TEST_CASE("sampling is reproducible and matches the mixture") {
  const MixtureSpec spec{0.7, ComponentDistribution::lognormal(3.0, 0.5), ComponentDistribution::weibull(1.0, 1.5)};
  const auto a = sample_mixture(spec, 20000, 99);
  CHECK(a == sample_mixture(spec, 20000, 99));
  CHECK(a != sample_mixture(spec, 20000, 100));
  const double n = static_cast<double>(a.size());
  const double mean = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double var = 0.0;
  for (double x : a) var += (x - mean) * (x - mean);
  var /= n - 1;
  CHECK(std::abs(mean - spec.mean()) <= 3.0 * std::sqrt(var / n));
}

TEST_CASE("degenerate mixture proportions") {
  const auto f1 = ComponentDistribution::weibull(0.5, 2.0);
  const auto f0 = ComponentDistribution::weibull(1.0, 1.0);
  auto ks = [](std::vector<double> x, const ComponentDistribution& d) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double D = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double f = d.cdf(x[i]);
      D = std::max({D, (i + 1) / n - f, f - i / n});
    }
    return D;
  };
  // 1.36/√n is the 5% Kolmogorov critical value.
  const double crit = 1.36 / std::sqrt(10000.0);
  CHECK(ks(sample_mixture({1.0, f1, f0}, 10000, 5), f1) < crit);
  CHECK(ks(sample_mixture({0.0, f1, f0}, 10000, 5), f0) < crit);
  const auto tsw = ComponentDistribution::two_sided_weibull(1.5, 3.0);
  CHECK(ks(sample_mixture({1.0, tsw, f0}, 10000, 6), tsw) < crit);
}

TEST_CASE("child seeds") {
  CHECK(splitmix64(1) != splitmix64(2));
  CHECK(splitmix64(42) == splitmix64(42));
}
