#include "lmix/dist_models.hpp"

#include "lmix/errors.hpp"
#include "lmix/lmom_core.hpp"
#include "lmix/quadrature.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace lmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::string> kScaleShape{"scale", "shape"};
const std::vector<std::string> kMuSigma{"mu", "sigma"};
const std::vector<std::string> kRate{"rate"};

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << what << " must be positive and finite, got " << v;
    throw InputError(os.str());
  }
}

// Weibull tail pieces shared by the one- and two-sided families: z = (x/σ)^ν for x > 0.
struct WeibullTail {
  double z, surv;
};

WeibullTail weibull_tail(double x, double scale, double shape) {
  const double z = std::pow(x / scale, shape);
  return {z, std::exp(-z)};
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::weibull: return "weibull";
    case Family::lognormal: return "lognormal";
    case Family::gaussian: return "gaussian";
    case Family::two_sided_weibull: return "two-sided-weibull";
    case Family::exponential: return "exponential";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::weibull, Family::lognormal, Family::gaussian, Family::two_sided_weibull,
                   Family::exponential})
    if (family_name(f) == name) return f;
  throw InputError("unknown distribution family '" + std::string(name) + "'");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw DomainError("normal quantile needs p in [0,1]", p);
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
               1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
               0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
               0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
               7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

ComponentDistribution::ComponentDistribution(Family f, Eigen::VectorXd p)
    : family_(f), params_(std::move(p)), free_(static_cast<std::size_t>(params_.size()), false) {
  validate();
}

ComponentDistribution ComponentDistribution::weibull(double scale, double shape) {
  return {Family::weibull, Eigen::Vector2d(scale, shape)};
}
ComponentDistribution ComponentDistribution::two_sided_weibull(double scale, double shape) {
  return {Family::two_sided_weibull, Eigen::Vector2d(scale, shape)};
}
ComponentDistribution ComponentDistribution::lognormal(double mu, double sigma) {
  return {Family::lognormal, Eigen::Vector2d(mu, sigma)};
}
ComponentDistribution ComponentDistribution::gaussian(double mu, double sigma) {
  return {Family::gaussian, Eigen::Vector2d(mu, sigma)};
}
ComponentDistribution ComponentDistribution::exponential(double rate) {
  return {Family::exponential, Eigen::VectorXd::Constant(1, rate)};
}

void ComponentDistribution::validate() const {
  switch (family_) {
    case Family::weibull:
    case Family::two_sided_weibull:
      require_positive(params_[0], "scale");
      require_positive(params_[1], "shape");
      break;
    case Family::lognormal:
    case Family::gaussian:
      if (!std::isfinite(params_[0])) throw InputError("mu must be finite");
      require_positive(params_[1], "sigma");
      break;
    case Family::exponential:
      require_positive(params_[0], "rate");
      break;
  }
}

const std::vector<std::string>& ComponentDistribution::param_names() const {
  switch (family_) {
    case Family::weibull:
    case Family::two_sided_weibull: return kScaleShape;
    case Family::lognormal:
    case Family::gaussian: return kMuSigma;
    case Family::exponential: return kRate;
  }
  return kRate;
}

Eigen::Index ComponentDistribution::param_index(std::string_view name) const {
  const auto& names = param_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<Eigen::Index>(i);
  throw InputError("family " + std::string(family_name(family_)) + " has no parameter '" + std::string(name) + "'");
}

ComponentDistribution& ComponentDistribution::set_free(std::initializer_list<std::string_view> names) {
  std::fill(free_.begin(), free_.end(), false);
  for (auto n : names) free_[static_cast<std::size_t>(param_index(n))] = true;
  return *this;
}

ComponentDistribution& ComponentDistribution::set_free(const std::vector<std::string>& names) {
  std::fill(free_.begin(), free_.end(), false);
  for (const auto& n : names) free_[static_cast<std::size_t>(param_index(n))] = true;
  return *this;
}

Eigen::Index ComponentDistribution::free_count() const {
  return static_cast<Eigen::Index>(std::count(free_.begin(), free_.end(), true));
}

std::vector<std::string> ComponentDistribution::free_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < free_.size(); ++i)
    if (free_[i]) out.push_back(param_names()[i]);
  return out;
}

Eigen::VectorXd ComponentDistribution::free_values() const {
  Eigen::VectorXd v(free_count());
  Eigen::Index j = 0;
  for (std::size_t i = 0; i < free_.size(); ++i)
    if (free_[i]) v[j++] = params_[static_cast<Eigen::Index>(i)];
  return v;
}

ComponentDistribution ComponentDistribution::with_free(const Eigen::Ref<const Eigen::VectorXd>& values) const {
  if (values.size() != free_count()) throw InputError("free-parameter vector has the wrong length");
  ComponentDistribution out = *this;
  Eigen::Index j = 0;
  for (std::size_t i = 0; i < free_.size(); ++i)
    if (free_[i]) out.params_[static_cast<Eigen::Index>(i)] = values[j++];
  out.validate();
  return out;
}

ComponentDistribution ComponentDistribution::with_param(std::string_view name, double value) const {
  ComponentDistribution out = *this;
  out.params_[param_index(name)] = value;
  out.validate();
  return out;
}

double ComponentDistribution::cdf(double x) const {
  const double a = params_[0];
  switch (family_) {
    case Family::weibull:
      if (x <= 0.0) return 0.0;
      return -std::expm1(-std::pow(x / a, params_[1]));
    case Family::two_sided_weibull: {
      const double half_tail = 0.5 * std::exp(-std::pow(std::abs(x) / a, params_[1]));
      return x >= 0.0 ? 1.0 - half_tail : half_tail;
    }
    case Family::lognormal:
      if (x <= 0.0) return 0.0;
      return normal_cdf((std::log(x) - a) / params_[1]);
    case Family::gaussian:
      return normal_cdf((x - a) / params_[1]);
    case Family::exponential:
      if (x <= 0.0) return 0.0;
      return -std::expm1(-a * x);
  }
  return 0.0;
}

double ComponentDistribution::pdf(double x) const {
  const double a = params_[0];
  switch (family_) {
    case Family::weibull: {
      if (x <= 0.0) return 0.0;
      const double nu = params_[1];
      return nu / a * std::pow(x / a, nu - 1.0) * std::exp(-std::pow(x / a, nu));
    }
    case Family::two_sided_weibull: {
      const double nu = params_[1];
      const double ax = std::abs(x);
      if (ax == 0.0) return nu < 1.0 ? kInf : (nu == 1.0 ? 0.5 / a : 0.0);
      return 0.5 * nu / a * std::pow(ax / a, nu - 1.0) * std::exp(-std::pow(ax / a, nu));
    }
    case Family::lognormal:
      if (x <= 0.0) return 0.0;
      return normal_pdf((std::log(x) - a) / params_[1]) / (x * params_[1]);
    case Family::gaussian:
      return normal_pdf((x - a) / params_[1]) / params_[1];
    case Family::exponential:
      if (x < 0.0) return 0.0;
      return a * std::exp(-a * x);
  }
  return 0.0;
}

double ComponentDistribution::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile needs p in [0,1]", p);
  const double a = params_[0];
  switch (family_) {
    case Family::weibull:
      return a * std::pow(-std::log1p(-p), 1.0 / params_[1]);
    case Family::two_sided_weibull:
      if (p < 0.5) return -a * std::pow(-std::log(2.0 * p), 1.0 / params_[1]);
      return a * std::pow(-std::log(2.0 * (1.0 - p)), 1.0 / params_[1]);
    case Family::lognormal:
      return std::exp(a + params_[1] * normal_quantile(p));
    case Family::gaussian:
      return a + params_[1] * normal_quantile(p);
    case Family::exponential:
      return -std::log1p(-p) / a;
  }
  return 0.0;
}

Eigen::VectorXd ComponentDistribution::cdf_gradient(double x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(params_.size());
  const double a = params_[0];
  switch (family_) {
    case Family::weibull: {
      if (x <= 0.0) break;
      const double nu = params_[1];
      const auto [z, surv] = weibull_tail(x, a, nu);
      g[0] = -surv * z * nu / a;
      g[1] = surv * z * std::log(x / a);
      break;
    }
    case Family::two_sided_weibull: {
      if (x == 0.0) break;
      const double nu = params_[1];
      const auto [z, surv] = weibull_tail(std::abs(x), a, nu);
      const double sign = x > 0.0 ? 1.0 : -1.0;
      g[0] = -sign * 0.5 * surv * z * nu / a;
      g[1] = sign * 0.5 * surv * z * std::log(std::abs(x) / a);
      break;
    }
    case Family::lognormal:
    case Family::gaussian: {
      if (family_ == Family::lognormal && x <= 0.0) break;
      const double s = params_[1];
      const double w = ((family_ == Family::lognormal ? std::log(x) : x) - a) / s;
      const double dens = normal_pdf(w);
      g[0] = -dens / s;
      g[1] = -dens * w / s;
      break;
    }
    case Family::exponential:
      if (x <= 0.0) break;
      g[0] = x * std::exp(-a * x);
      break;
  }
  return g;
}

Eigen::VectorXd ComponentDistribution::cdf_gradient_free(double x) const {
  const Eigen::VectorXd all = cdf_gradient(x);
  Eigen::VectorXd g(free_count());
  Eigen::Index j = 0;
  for (std::size_t i = 0; i < free_.size(); ++i)
    if (free_[i]) g[j++] = all[static_cast<Eigen::Index>(i)];
  return g;
}

double ComponentDistribution::mean() const {
  const double a = params_[0];
  switch (family_) {
    case Family::weibull: return a * std::tgamma(1.0 + 1.0 / params_[1]);
    case Family::two_sided_weibull: return 0.0;
    case Family::lognormal: return std::exp(a + 0.5 * params_[1] * params_[1]);
    case Family::gaussian: return a;
    case Family::exponential: return 1.0 / a;
  }
  return 0.0;
}

double ComponentDistribution::support_lower() const {
  switch (family_) {
    case Family::weibull:
    case Family::lognormal:
    case Family::exponential: return 0.0;
    default: return -kInf;
  }
}

double ComponentDistribution::support_upper() const { return kInf; }

std::vector<double> ComponentDistribution::kinks() const {
  if (family_ == Family::gaussian) return {};
  return {0.0};
}

double ComponentDistribution::sample(std::mt19937_64& rng) const {
  if (family_ == Family::two_sided_weibull) {
    const double sign = uniform_open(rng) < 0.5 ? -1.0 : 1.0;
    return sign * params_[0] * std::pow(-std::log(uniform_open(rng)), 1.0 / params_[1]);
  }
  return quantile(uniform_open(rng));
}

std::pair<double, double> ComponentDistribution::default_bounds(Eigen::Index i) const {
  const std::string& name = param_names()[static_cast<std::size_t>(i)];
  if (name == "shape") return {0.2, 10.0};
  if (name == "scale" || name == "rate") return {0.01, 100.0};
  if (name == "sigma") return {0.01, 10.0};
  if (family_ == Family::lognormal) return {-5.0, 10.0};
  return {-10.0, 10.0};
}

std::string ComponentDistribution::describe() const {
  std::ostringstream os;
  os << family_name(family_) << '(';
  for (Eigen::Index i = 0; i < params_.size(); ++i)
    os << (i ? ", " : "") << param_names()[static_cast<std::size_t>(i)] << '=' << params_[i]
       << (free_[static_cast<std::size_t>(i)] ? "*" : "");
  os << ')';
  return os.str();
}

Eigen::Vector3d weibull_lmoments(double scale, double shape) {
  require_positive(scale, "Weibull scale");
  require_positive(shape, "Weibull shape");
  const double inv = 1.0 / shape;
  const double d2 = -std::expm1(-inv * std::log(2.0));  // 1 − 2^{−1/ν}
  const double d3 = -std::expm1(-inv * std::log(3.0));
  const double d4 = -std::expm1(-inv * std::log(4.0));
  const double l2 = scale * d2 * std::tgamma(1.0 + inv);
  return {l2, l2 * (3.0 - 2.0 * d3 / d2), l2 * (6.0 + (5.0 * d4 - 10.0 * d3) / d2)};
}

Eigen::Vector3d two_sided_weibull_lmoments(double scale, double shape) {
  require_positive(scale, "two-sided Weibull scale");
  require_positive(shape, "two-sided Weibull shape");
  const double e = 1.0 + 1.0 / shape;
  const double g = scale * std::tgamma(1.0 + 1.0 / shape);
  const double p2 = std::pow(2.0, -e), p3 = std::pow(3.0, -e), p4 = std::pow(4.0, -e);
  return {(1.0 - p2) * g, 0.0, (1.0 - 6.0 * p2 + 7.5 * p3 - 2.5 * p4) * g};
}

Eigen::Vector3d gaussian_lmoments(double mu, double sigma) {
  (void)mu;
  require_positive(sigma, "Gaussian sigma");
  const double l2 = sigma / std::sqrt(std::numbers::pi);
  const double tau4 = 30.0 / std::numbers::pi * std::atan(std::numbers::sqrt2) - 9.0;
  return {l2, 0.0, tau4 * l2};
}

Eigen::Vector3d exponential_lmoments(double rate) {
  require_positive(rate, "exponential rate");
  const double l2 = 0.5 / rate;
  return {l2, l2 / 3.0, l2 / 6.0};
}

namespace {

// λ_2..λ_4 of Lognormal(0, σ): ∫ e^{σz} L_{r−1}(Φ(z)) φ(z) dz; the integrand is a
// Gaussian bump centred at z = σ times a bounded polynomial.
Eigen::Vector3d lognormal_unit_lmoments(double sigma, double rel_tol) {
  const ShiftedLegendre l1 = shifted_legendre(1), l2 = shifted_legendre(2), l3 = shifted_legendre(3);
  IntegrationPlan plan = IntegrationPlan::on(sigma - 16.0, sigma + 16.0, rel_tol);
  plan.with_breakpoints({sigma - 4.0, sigma, sigma + 4.0, 0.0});
  plan.abs_tol = 0.0;
  const double shift = 0.5 * sigma * sigma;
  const VectorQuadratureResult res = integrate_vector(
      [&](double z, Eigen::Ref<Eigen::VectorXd> out) {
        const double u = normal_cdf(z);
        // e^{σz}φ(z) = e^{σ²/2}φ(z−σ); the constant is applied after integration.
        const double w = normal_pdf(z - sigma);
        out[0] = w * l1(u);
        out[1] = w * l2(u);
        out[2] = w * l3(u);
      },
      3, plan);
  if (!res.converged) throw NumericalError("lognormal L-moment quadrature did not converge");
  return std::exp(shift) * res.value;
}

std::mutex lognormal_cache_mutex;
std::map<std::pair<double, double>, Eigen::Vector3d> lognormal_cache;

}  // namespace

Eigen::Vector3d lognormal_lmoments(double mu, double sigma, double rel_tol) {
  if (!std::isfinite(mu)) throw InputError("lognormal mu must be finite");
  require_positive(sigma, "lognormal sigma");
  // λ_r(μ, σ) = e^μ λ_r(0, σ) for r ≥ 2, so the cache is keyed on (σ, tol) only.
  const auto key = std::make_pair(sigma, rel_tol);
  Eigen::Vector3d unit;
  {
    std::lock_guard lock(lognormal_cache_mutex);
    auto it = lognormal_cache.find(key);
    if (it != lognormal_cache.end()) return std::exp(mu) * it->second;
  }
  unit = lognormal_unit_lmoments(sigma, rel_tol);
  {
    std::lock_guard lock(lognormal_cache_mutex);
    if (lognormal_cache.size() > 4096) lognormal_cache.clear();
    lognormal_cache.emplace(key, unit);
  }
  return std::exp(mu) * unit;
}

Eigen::VectorXd component_lmoments(const ComponentDistribution& d, const std::vector<int>& orders) {
  Eigen::Vector3d closed;
  const Eigen::VectorXd& p = d.params();
  switch (d.family()) {
    case Family::weibull: closed = weibull_lmoments(p[0], p[1]); break;
    case Family::two_sided_weibull: closed = two_sided_weibull_lmoments(p[0], p[1]); break;
    case Family::lognormal: closed = lognormal_lmoments(p[0], p[1]); break;
    case Family::gaussian: closed = gaussian_lmoments(p[0], p[1]); break;
    case Family::exponential: closed = exponential_lmoments(p[0]); break;
  }
  int high = 0;
  for (int r : orders) {
    if (r < 1) throw InputError("L-moment orders start at 1");
    high = std::max(high, r);
  }
  Eigen::VectorXd extra;
  if (high > 4) extra = population_lmoments_by_quadrature([&](double u) { return d.quantile(u); }, high).values;
  Eigen::VectorXd out(static_cast<Eigen::Index>(orders.size()));
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const int r = orders[i];
    out[static_cast<Eigen::Index>(i)] = r == 1 ? d.mean() : (r <= 4 ? closed[r - 2] : extra[r - 1]);
  }
  return out;
}

void MixtureSpec::validate() const {
  if (!(lambda_star >= 0.0 && lambda_star <= 1.0)) throw InputError("mixture proportion must lie in [0, 1]");
}

double MixtureSpec::cdf(double x) const {
  return lambda_star * parametric.cdf(x) + (1.0 - lambda_star) * unknown.cdf(x);
}

double MixtureSpec::pdf(double x) const {
  return lambda_star * parametric.pdf(x) + (1.0 - lambda_star) * unknown.pdf(x);
}

double MixtureSpec::mean() const { return lambda_star * parametric.mean() + (1.0 - lambda_star) * unknown.mean(); }

std::vector<double> sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (double& x : out) {
    const bool from_parametric = uniform_open(rng) < spec.lambda_star;
    x = from_parametric ? spec.parametric.sample(rng) : spec.unknown.sample(rng);
  }
  return out;
}

ConstraintModel::ConstraintModel(ComponentDistribution family_template, std::vector<int> orders)
    : template_(std::move(family_template)), orders_(std::move(orders)) {
  if (orders_.empty()) throw InputError("constraint model needs at least one order");
  for (int r : orders_)
    if (r < 2) throw InputError("constraint orders start at 2");
}

Eigen::VectorXd ConstraintModel::m(const Eigen::Ref<const Eigen::VectorXd>& alpha) const {
  return -component_lmoments(at(alpha), orders_);
}

Eigen::MatrixXd ConstraintModel::gradient(const Eigen::Ref<const Eigen::VectorXd>& alpha) const {
  Eigen::MatrixXd g(size(), dim());
  Eigen::VectorXd shifted = alpha;
  for (Eigen::Index j = 0; j < dim(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(alpha[j]));
    shifted[j] = alpha[j] + h;
    const Eigen::VectorXd up = m(shifted);
    shifted[j] = alpha[j] - h;
    const Eigen::VectorXd down = m(shifted);
    shifted[j] = alpha[j];
    g.col(j) = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace lmix
