#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lmix/errors.hpp"
#include "lmix/lmom_core.hpp"
#include "lmix/quadrature.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace lmix;

TEST_CASE("shifted Legendre low orders") {
  const auto l0 = shifted_legendre(0);
  CHECK(l0.poly.degree() == 0);
  CHECK(l0(0.3) == 1.0);

  const auto l1 = shifted_legendre(1);
  CHECK(l1.poly.coefficients()[0] == -1.0);
  CHECK(l1.poly.coefficients()[1] == 2.0);

  const auto l2 = shifted_legendre(2);
  CHECK(l2.poly.coefficients()[0] == 1.0);
  CHECK(l2.poly.coefficients()[1] == -6.0);
  CHECK(l2.poly.coefficients()[2] == 6.0);
}

TEST_CASE("shifted Legendre rejects orders beyond the exact range") {
  CHECK_NOTHROW(shifted_legendre(kMaxLegendreOrder));
  CHECK_THROWS_AS(shifted_legendre(kMaxLegendreOrder + 1), InputError);
  CHECK_THROWS_AS(shifted_legendre(-1), InputError);
}

TEST_CASE("integrated Legendre closed forms") {
  const Polynomial k2 = integrated_legendre(2);
  const Polynomial k3 = integrated_legendre(3);
  const Polynomial k4 = integrated_legendre(4);
  CHECK(k2(0.5) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(std::abs(k3(0.5)) < 1e-15);
  CHECK(k4(0.5) == doctest::Approx(0.0625).epsilon(1e-15));
  for (double t : {0.1, 0.37, 0.9}) {
    CHECK(k2(t) == doctest::Approx(t * t - t).epsilon(1e-14));
    CHECK(k3(t) == doctest::Approx(2 * t * t * t - 3 * t * t + t).epsilon(1e-14));
    CHECK(k4(t) == doctest::Approx(5 * std::pow(t, 4) - 10 * std::pow(t, 3) + 6 * t * t - t).epsilon(1e-14));
  }
  CHECK_THROWS_AS(integrated_legendre(1), InputError);
}

TEST_CASE("basis coefficient table matches the K derivative") {
  const LMomentBasis basis = LMomentBasis::up_to(8);
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    const int r = basis.orders()[static_cast<std::size_t>(i)];
    const Eigen::VectorXd& dk = basis.dk(i).coefficients();
    for (int k = 0; k < r; ++k) {
      const double expected = ((r - k - 1) % 2 == 0 ? 1.0 : -1.0) * std::tgamma(r) / (std::tgamma(k + 1) * std::tgamma(r - k)) *
                              std::tgamma(r + k) / (std::tgamma(k + 1) * std::tgamma(r));
      CHECK(dk[k] == doctest::Approx(expected).epsilon(1e-12));
      CHECK(LMomentBasis::coefficient(r, k) == dk[k]);
    }
  }
}

TEST_CASE("K_r vanishes at both ends") {
  for (int r = 2; r <= 20; ++r) {
    const Polynomial k = integrated_legendre(r);
    CHECK(std::abs(k(0.0)) == 0.0);
    CHECK(std::abs(k(1.0)) < 1e-9);  // cancellation in large coefficients
  }
  for (int r = 2; r <= 12; ++r) CHECK(std::abs(integrated_legendre(r)(1.0)) < 1e-12);
}

TEST_CASE("K_r equals the numeric integral of L_{r-1}") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int r = 2; r <= 6; ++r) {
    const Polynomial k = integrated_legendre(r);
    const ShiftedLegendre l = shifted_legendre(r - 1);
    const GaussLegendreRule gl = gauss_legendre(r + 2);  // exact for degree r-1
    for (int s = 0; s < 200; ++s) {
      const double t = unif(rng);
      double acc = 0.0;
      for (Eigen::Index j = 0; j < gl.nodes.size(); ++j) acc += 0.5 * t * gl.weights[j] * l(0.5 * t * (gl.nodes[j] + 1.0));
      CHECK(std::abs(k(t) - acc) <= 1e-12);
    }
  }
}

TEST_CASE("finite-difference derivative of K_r matches L_{r-1}") {
  // Five-point stencil: truncation O(h^4), rounding O(eps/h).
  const double h = 1e-4;
  for (int r = 2; r <= 8; ++r) {
    const Polynomial k = integrated_legendre(r);
    const ShiftedLegendre l = shifted_legendre(r - 1);
    for (int i = 1; i < 50; ++i) {
      const double t = i / 50.0;
      const double fd = (k(t - 2 * h) - 8 * k(t - h) + 8 * k(t + h) - k(t + 2 * h)) / (12 * h);
      CHECK(std::abs(fd - l(t)) <= 1e-6);
    }
  }
}

TEST_CASE("shifted Legendre orthogonality") {
  const GaussLegendreRule gl = gauss_legendre(20);
  for (int r = 0; r <= 12; ++r)
    for (int s = 0; s <= 12; ++s) {
      const auto lr = shifted_legendre(r);
      const auto ls = shifted_legendre(s);
      double acc = 0.0;
      for (Eigen::Index j = 0; j < gl.nodes.size(); ++j) {
        const double u = 0.5 * (gl.nodes[j] + 1.0);
        acc += 0.5 * gl.weights[j] * lr(u) * ls(u);
      }
      if (r == s)
        CHECK(acc == doctest::Approx(1.0 / (2 * r + 1)).epsilon(1e-9));
      else
        CHECK(std::abs(acc) <= 1e-10);
    }
}

TEST_CASE("basis evaluation writes into caller storage") {
  const LMomentBasis basis({2, 4});
  Eigen::VectorXd out(2);
  basis.values(0.5, out);
  CHECK(out[0] == doctest::Approx(-0.25));
  CHECK(out[1] == doctest::Approx(0.0625));
  basis.derivatives(0.25, out);
  CHECK(out[0] == doctest::Approx(2 * 0.25 - 1));
  const Eigen::VectorXd d2 = basis.second_derivatives(0.3);
  CHECK(d2[0] == doctest::Approx(2.0));
  CHECK(basis.max_order() == 4);
  CHECK_THROWS_AS(LMomentBasis({1}), InputError);
}

TEST_CASE("sample L-moments of degenerate and two-point data") {
  const std::vector<double> c(12, 3.5);
  const LMomentVector lc = sample_lmoments(c, 4);
  CHECK(lc.at(1) == doctest::Approx(3.5));
  for (int r = 2; r <= 4; ++r) CHECK(std::abs(lc.at(r)) < 1e-14);

  const std::vector<double> ab{4.0, 1.0};
  CHECK(sample_lmoments(ab, 2).at(2) == doctest::Approx(1.5));

  CHECK_THROWS_AS(sample_lmoments(ab, 3), InputError);
}

TEST_CASE("sample L-moments agree with the order-statistic definition on a small sample") {
  // Brute force over all 3-subsets: λ_3 = (1/3) E[X_{3:3} - 2 X_{2:3} + X_{1:3}].
  const std::vector<double> x{0.3, 2.1, -1.0, 4.4, 0.9, 1.7};
  double acc2 = 0.0, acc3 = 0.0;
  int pairs = 0, triples = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      acc2 += 0.5 * std::abs(x[i] - x[j]);
      ++pairs;
      for (std::size_t k = j + 1; k < x.size(); ++k) {
        std::vector<double> t{x[i], x[j], x[k]};
        std::sort(t.begin(), t.end());
        acc3 += (t[2] - 2 * t[1] + t[0]) / 3.0;
        ++triples;
      }
    }
  const LMomentVector l = sample_lmoments(x, 3);
  CHECK(l.at(2) == doctest::Approx(acc2 / pairs).epsilon(1e-13));
  CHECK(l.at(3) == doctest::Approx(acc3 / triples).epsilon(1e-13));
}

TEST_CASE("sample L-moments of a large uniform sample") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(100000);
  for (double& v : x) v = unif(rng);
  CHECK(std::abs(sample_lmoments(x, 2).at(2) - 1.0 / 6.0) < 0.005);
}

TEST_CASE("population L-moments by quadrature") {
  const LMomentVector u = population_lmoments_by_quadrature([](double p) { return p; }, 3);
  CHECK(u.at(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(u.at(2) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  const double a = 2.5;
  const LMomentVector e = population_lmoments_by_quadrature([a](double p) { return -std::log1p(-p) / a; }, 4);
  CHECK(e.at(2) == doctest::Approx(1.0 / (2 * a)).epsilon(1e-9));
  CHECK(e.at(3) == doctest::Approx(1.0 / (6 * a)).epsilon(1e-9));
  CHECK(e.at(4) == doctest::Approx(1.0 / (12 * a)).epsilon(1e-9));

  // Logistic quantile is symmetric about 0.
  const LMomentVector s = population_lmoments_by_quadrature([](double p) { return std::log(p / (1 - p)); }, 3);
  CHECK(std::abs(s.at(3)) < 1e-10);
  CHECK(s.at(2) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("integral of K_2 over an exponential CDF") {
  const Polynomial k2 = integrated_legendre(2);
  IntegrationPlan plan = IntegrationPlan::on(0.0, 60.0, 1e-12);
  const QuadratureResult r = integrate([&](double y) { return k2(1.0 - std::exp(-y)); }, plan);
  CHECK(r.converged);
  CHECK(std::abs(r.value + 0.5) <= 1e-8);
}
