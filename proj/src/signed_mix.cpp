#include "lmix/signed_mix.hpp"

#include "lmix/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lmix {

EmpiricalCdf::EmpiricalCdf(std::span<const double> sample) : sorted_(sample.begin(), sample.end()) {
  if (sorted_.empty()) throw InputError("empirical CDF needs at least one observation");
  for (double x : sorted_)
    if (!std::isfinite(x)) throw InputError("empirical CDF needs finite observations");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double y) const {
  const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), y) - sorted_.begin();
  return static_cast<double>(count) / static_cast<double>(sorted_.size());
}

std::vector<double> EmpiricalCdf::breakpoints() const {
  std::vector<double> b = sorted_;
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

MixtureCdf::MixtureCdf(MixtureSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  lower_ = std::min(spec_.parametric.quantile(kTailMass), spec_.unknown.quantile(kTailMass));
  upper_ = std::max(spec_.parametric.quantile(1.0 - kTailMass), spec_.unknown.quantile(1.0 - kTailMass));
}

std::vector<double> MixtureCdf::breakpoints() const {
  std::vector<double> b = spec_.parametric.kinks();
  const std::vector<double> u = spec_.unknown.kinks();
  b.insert(b.end(), u.begin(), u.end());
  return b;
}

double MixtureCdf::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("mixture quantile needs p in (0,1)", p);
  double lo = lower_, hi = upper_;
  const double w = hi - lo;
  while (spec_.cdf(lo) > p) lo -= w;
  while (spec_.cdf(hi) < p) hi += w;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (spec_.cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SignedSubCdf::SignedSubCdf(const CdfSource& mixture, ComponentDistribution parametric, double lambda)
    : mixture_(mixture), parametric_(std::move(parametric)), lambda_(lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    std::ostringstream os;
    os << "mixture proportion must lie in (0, 1), got " << lambda;
    throw InputError(os.str());
  }
  inv_ = 1.0 / (1.0 - lambda);
}

IntegrationPlan SignedSubCdf::plan(double rel_tol) const {
  double lo = std::min(mixture_.lower(), parametric_.quantile(kTailMass));
  double hi = std::max(mixture_.upper(), parametric_.quantile(1.0 - kTailMass));
  const double widen = 0.1 * (hi - lo);
  lo -= widen;
  hi += widen;
  IntegrationPlan p = IntegrationPlan::on(lo, hi, rel_tol);
  std::vector<double> points = mixture_.breakpoints();
  const std::vector<double> own = parametric_.kinks();
  points.insert(points.end(), own.begin(), own.end());
  p.with_breakpoints(std::move(points));
  p.max_subdivisions = std::max(p.max_subdivisions, 4 * static_cast<int>(p.breakpoints.size()));
  return p;
}

double eval_signed_cdf(double lambda, const ComponentDistribution& parametric, const CdfSource& mixture, double y) {
  return SignedSubCdf(mixture, parametric, lambda)(y);
}

PhiPlusReport phi_plus_check(double lambda, const ComponentDistribution& parametric, const MixtureCdf& truth,
                             int grid) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("mixture proportion must lie in (0, 1)");
  if (grid < 1) throw InputError("grid size must be positive");
  PhiPlusReport report;
  for (int i = 0; i < grid; ++i) {
    const double y = truth.quantile((i + 0.5) / grid);
    const double dens = (truth.density(y) - lambda * parametric.pdf(y)) / (1.0 - lambda);
    if (dens < report.worst_value) report.worst_value = dens;
    if (dens < -1e-9 && report.member) {
      report.member = false;
      report.witness = y;
    }
  }
  return report;
}

PhiPlusReport empirical_phi_plus(double lambda, const ComponentDistribution& parametric, const EmpiricalCdf& data) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("mixture proportion must lie in (0, 1)");
  const std::vector<double>& x = data.sorted();
  const std::size_t n = x.size();
  const double eps = std::sqrt(std::log(2.0 / 0.05) / (2.0 * static_cast<double>(n)));
  const double slack = 2.0 * eps / (1.0 - lambda);
  const std::size_t points = std::min<std::size_t>(n, 200);
  SignedSubCdf f0(data, parametric, lambda);
  PhiPlusReport report;
  double prev = -slack;
  for (std::size_t k = 0; k < points; ++k) {
    const std::size_t idx = points == 1 ? n - 1 : k * (n - 1) / (points - 1);
    const double y = x[idx];
    const double v = f0(y);
    const double violation = std::max({prev - v, -v, v - 1.0});
    if (violation > report.worst_value) report.worst_value = violation;
    if (violation > slack && report.member) {
      report.member = false;
      report.witness = y;
    }
    prev = std::max(prev, v);
  }
  return report;
}

}  // namespace lmix
