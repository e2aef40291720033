#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lmix/errors.hpp"
#include "lmix/splq_estimator.hpp"

#include <cmath>
#include <random>

using namespace lmix;

namespace {

ConstraintModel weibull_model() {
  auto w = ComponentDistribution::weibull(1.0, 1.0);
  w.set_free({"scale", "shape"});
  return {w, {2, 3, 4}};
}

std::vector<double> weibull_draws(double scale, double shape, std::size_t n, std::uint64_t seed) {
  const auto d = ComponentDistribution::weibull(scale, shape);
  std::mt19937_64 rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = d.sample(rng);
  return x;
}

}  // namespace

TEST_CASE("spacing sums on a tiny sample by hand") {
  const LMomentBasis basis({2});
  const std::vector<double> x{3.0, 1.0, 2.0};
  const SplqSums s = splq_sums(x, basis);
  // K_2(t) = t² − t at t = 1/3 and 2/3, both spacings 1.
  const double k = 1.0 / 9.0 - 1.0 / 3.0;
  CHECK(s.spacing.size() == 2);
  CHECK(s.b[0] == doctest::Approx(2.0 * k).epsilon(1e-15));
  CHECK(s.omega(0, 0) == doctest::Approx(2.0 * k * k).epsilon(1e-15));
}

TEST_CASE("exact attainment gives xi = 0") {
  const auto x = weibull_draws(1.0, 1.5, 500, 1);
  const LMomentBasis basis({2, 3, 4});
  const SplqSums s = splq_sums(x, basis);
  for (const auto& g : {DivergenceGenerator::chi2(), DivergenceGenerator::cressie_read(0.5),
                        DivergenceGenerator::cressie_read(0.0)}) {
    const DualState d = splq_inner(s, s.b, g);
    CHECK(d.xi.norm() <= 1e-12);
    CHECK(std::abs(d.objective) <= 1e-15);
  }
}

TEST_CASE("Newton with gamma = 2 matches the closed form on spacing sums") {
  const auto x = weibull_draws(2.0, 0.8, 300, 2);
  const LMomentBasis basis({2, 3, 4});
  const SplqSums s = splq_sums(x, basis);
  const Eigen::VectorXd m = s.b + Eigen::Vector3d(0.05, -0.02, 0.01);
  const DualState c = splq_inner(s, m, DivergenceGenerator::chi2());
  // cr:2 snaps to chi2; the γ = 2 − 1e-9 generator is a smooth neighbour.
  const DualState n = splq_inner(s, m, DivergenceGenerator::cressie_read(2.0 - 1e-9));
  CHECK(n.converged);
  CHECK((n.xi - c.xi).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, c.xi.cwiseAbs().maxCoeff()));
  CHECK(n.objective == doctest::Approx(c.objective).epsilon(1e-6));
  CHECK(c.objective > 0.0);
}

TEST_CASE("spacing sums track sample L-moments") {
  const auto x = weibull_draws(1.0, 1.5, 10000, 3);
  const LMomentBasis basis({2, 3, 4});
  const SplqSums s = splq_sums(x, basis);
  const auto lm = sample_lmoments(x, 4);
  // Monte-Carlo standard error of each L-moment from 20 batches of 500.
  Eigen::MatrixXd batch(20, 3);
  for (int b = 0; b < 20; ++b) {
    const auto l = sample_lmoments(std::span<const double>(x).subspan(static_cast<std::size_t>(b) * 500, 500), 4);
    batch.row(b) << l.at(2), l.at(3), l.at(4);
  }
  for (int r = 0; r < 3; ++r) {
    const Eigen::VectorXd col = batch.col(r);
    const double sd = std::sqrt((col.array() - col.mean()).square().sum() / 19.0);
    const double se = sd / std::sqrt(20.0);
    CHECK(std::abs(s.b[r] + lm.at(r + 2)) <= 3.0 * se);
  }
}

TEST_CASE("Weibull fit recovers scale and shape") {
  const auto x = weibull_draws(1.0, 1.5, 10000, 4);
  const auto model = weibull_model();
  const SplqFit fit = splq_fit(x, model, default_alpha_box(model), {Eigen::Vector2d(2.0, 1.0)});
  CHECK(fit.alpha[0] == doctest::Approx(1.0).epsilon(0.1));
  CHECK(std::abs(fit.alpha[1] - 1.5) <= 0.1);
  CHECK(fit.objective >= 0.0);
  CHECK(fit.names == std::vector<std::string>{"scale", "shape"});
}

TEST_CASE("scale equivariance") {
  const auto x = weibull_draws(1.0, 1.5, 2000, 5);
  std::vector<double> y(x);
  for (double& v : y) v *= 2.0;
  const LMomentBasis basis({2, 3, 4});
  CHECK(splq_sums(y, basis).b == 2.0 * splq_sums(x, basis).b);
  const auto model = weibull_model();
  NelderMeadOptions tight;
  tight.rel_diameter_tol = 1e-10;
  tight.max_iterations = 2000;
  EstimationOptions opt;
  opt.optimizer = tight;
  const SplqFit a = splq_fit(x, model, default_alpha_box(model), {Eigen::Vector2d(1.2, 1.2)}, opt);
  const SplqFit b = splq_fit(y, model, default_alpha_box(model), {Eigen::Vector2d(2.4, 1.2)}, opt);
  CHECK(b.alpha[0] == doctest::Approx(2.0 * a.alpha[0]).epsilon(1e-6));
  CHECK(b.alpha[1] == doctest::Approx(a.alpha[1]).epsilon(1e-6));
}

TEST_CASE("degenerate input") {
  const LMomentBasis basis({2, 3, 4});
  CHECK_THROWS_AS(splq_sums(std::vector<double>(10, 4.0), basis), InputError);
  CHECK_THROWS_AS(splq_sums(std::vector<double>{1.0, 2.0, 3.0}, basis), InputError);
  const auto model = weibull_model();
  CHECK_THROWS_AS(splq_fit(std::vector<double>(10, 4.0), model, default_alpha_box(model)), InputError);
}
