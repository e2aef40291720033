#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lmix/errors.hpp"
#include "lmix/signed_mix.hpp"

#include <cmath>

using namespace lmix;

namespace {

struct AverageCdf final : CdfSource {
  const CdfSource& a;
  const CdfSource& b;
  AverageCdf(const CdfSource& x, const CdfSource& y) : a(x), b(y) {}
  double operator()(double y) const override { return 0.5 * (a(y) + b(y)); }
  double lower() const override { return std::min(a.lower(), b.lower()); }
  double upper() const override { return std::max(a.upper(), b.upper()); }
};

MixtureSpec table1_truth() {
  return {0.3, ComponentDistribution::weibull(0.5, 2.0), ComponentDistribution::weibull(1.0, 1.0)};
}

MixtureSpec exponential_example() {
  return {0.7, ComponentDistribution::exponential(1.5), ComponentDistribution::exponential(0.5)};
}

}  // namespace

TEST_CASE("signed sub-CDF identities") {
  const MixtureCdf truth(table1_truth());
  const auto f1 = ComponentDistribution::weibull(0.5, 2.0);
  const auto f0 = ComponentDistribution::weibull(1.0, 1.0);
  const SignedSubCdf s(truth, f1, 0.3);
  for (double y = 0.01; y < 20.0; y *= 1.3) CHECK(std::abs(s(y) - f0.cdf(y)) <= 1e-10);

  // F = F₁ leaves F₁ unchanged for any λ.
  const MixtureCdf pure({1.0, f1, f0});
  for (double lambda : {0.1, 0.5, 0.9})
    for (double y : {0.1, 0.4, 1.0}) CHECK(eval_signed_cdf(lambda, f1, pure, y) == doctest::Approx(f1.cdf(y)).epsilon(1e-14));

  // λ → 0⁺ recovers F.
  for (double y : {0.1, 0.4, 1.0}) CHECK(eval_signed_cdf(1e-12, f1, truth, y) == doctest::Approx(truth(y)).epsilon(1e-11));

  CHECK_THROWS_AS(eval_signed_cdf(0.0, f1, truth, 1.0), InputError);
  CHECK_THROWS_AS(eval_signed_cdf(1.0, f1, truth, 1.0), InputError);
}

TEST_CASE("signed sub-CDF is affine in the mixture CDF") {
  const MixtureCdf a(table1_truth());
  const MixtureCdf b(exponential_example());
  const AverageCdf avg(a, b);
  const auto f1 = ComponentDistribution::weibull(0.7, 1.5);
  for (double y : {0.05, 0.3, 1.2, 4.0}) {
    const double lhs = eval_signed_cdf(0.4, f1, avg, y);
    const double rhs = 0.5 * (eval_signed_cdf(0.4, f1, a, y) + eval_signed_cdf(0.4, f1, b, y));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-15));
  }
}

TEST_CASE("empirical CDF") {
  const std::vector<double> x{3.0, 1.0, 2.0, 2.0};
  const EmpiricalCdf f(x);
  CHECK(f(0.5) == 0.0);
  CHECK(f(1.0) == 0.25);
  CHECK(f(2.0) == 0.75);
  CHECK(f(2.999) == 0.75);
  CHECK(f(3.0) == 1.0);
  CHECK(f.breakpoints() == std::vector<double>{1.0, 2.0, 3.0});
  CHECK_THROWS_AS(EmpiricalCdf(std::vector<double>{}), InputError);
}

TEST_CASE("empirical sup distance scales by 1/(1-lambda)") {
  const MixtureSpec spec = table1_truth();
  const auto sample = sample_mixture(spec, 500, 17);
  const EmpiricalCdf fn(sample);
  const MixtureCdf truth(spec);
  const double lambda = 0.35;
  const auto f1 = ComponentDistribution::weibull(0.6, 2.2);
  double sup = 0.0;
  for (double y : fn.sorted()) {
    for (double z : {y, std::nextafter(y, -1e300)}) {
      sup = std::max(sup, std::abs(eval_signed_cdf(lambda, f1, fn, z) - eval_signed_cdf(lambda, f1, truth, z)));
    }
  }
  const double ks = fn.sup_distance([&](double y) { return truth(y); });
  CHECK(sup == doctest::Approx(ks / (1.0 - lambda)).epsilon(1e-12));
}

TEST_CASE("integration plan covers both laws") {
  const MixtureCdf truth(table1_truth());
  const SignedSubCdf s(truth, ComponentDistribution::weibull(0.5, 2.0), 0.3);
  const IntegrationPlan p = s.plan();
  CHECK(p.lower < 0.0);
  CHECK(truth(p.upper) > 1.0 - 1e-8);
  // The support edge of both Weibull components is a kink of the integrand.
  CHECK(p.breakpoints == std::vector<double>{0.0});
  const EmpiricalCdf fn(std::vector<double>{0.2, 0.5, 0.9});
  const SignedSubCdf e(fn, ComponentDistribution::weibull(0.5, 2.0), 0.3);
  const IntegrationPlan q = e.plan();
  CHECK(q.breakpoints == std::vector<double>{0.0, 0.2, 0.5, 0.9});
}

TEST_CASE("effective-set membership on the exponential mixture") {
  const MixtureCdf truth(exponential_example());
  CHECK(phi_plus_check(0.7, ComponentDistribution::exponential(1.5), truth).member);
  const PhiPlusReport bad = phi_plus_check(0.99, ComponentDistribution::exponential(0.1), truth);
  CHECK_FALSE(bad.member);
  // Direct evaluation of the signed density at the witness.
  const double y = bad.witness;
  const double dens = (truth.density(y) - 0.99 * ComponentDistribution::exponential(0.1).pdf(y)) / 0.01;
  CHECK(dens < 0.0);
  for (double a1 : {0.1, 1.5, 5.0}) CHECK(phi_plus_check(1e-9, ComponentDistribution::exponential(a1), truth).member);
}

TEST_CASE("empirical membership flag") {
  const MixtureSpec spec = table1_truth();
  const auto sample = sample_mixture(spec, 1000, 3);
  const EmpiricalCdf fn(sample);
  CHECK(empirical_phi_plus(0.3, spec.parametric, fn).member);
  const PhiPlusReport bad = empirical_phi_plus(0.9, ComponentDistribution::weibull(2.0, 2.0), fn);
  CHECK_FALSE(bad.member);
}

TEST_CASE("mixture quantile inverts the CDF") {
  const MixtureCdf truth(exponential_example());
  for (double p : {1e-6, 0.1, 0.5, 0.99, 1 - 1e-7}) CHECK(truth(truth.quantile(p)) == doctest::Approx(p).epsilon(1e-12));
}
