#include "lmix/divergences.hpp"

#include "lmix/errors.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace lmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSnap = 1e-12;  // γ within this of 0, 1 or 2 uses the closed-form limit

double parse_real(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InputError("not a number: '" + std::string(text) + "'");
  return v;
}

}  // namespace

DivergenceGenerator DivergenceGenerator::cressie_read(double gamma) {
  if (!std::isfinite(gamma)) throw InputError("Cressie-Read index must be finite");
  if (std::abs(gamma - 2.0) < kSnap) return {Kind::chi2, 2.0};
  if (std::abs(gamma) < kSnap) return {Kind::modified_kl, 0.0};
  if (std::abs(gamma - 1.0) < kSnap) return {Kind::kl, 1.0};
  return {Kind::power, gamma};
}

DivergenceGenerator DivergenceGenerator::parse(std::string_view text) {
  if (text == "chi2") return chi2();
  if (text == "kl") return cressie_read(1.0);
  if (text == "modified-kl") return cressie_read(0.0);
  if (text == "hellinger") return cressie_read(0.5);
  if (text.starts_with("cr:")) return cressie_read(parse_real(text.substr(3)));
  throw InputError("unknown divergence '" + std::string(text) + "' (expected chi2, kl, modified-kl, hellinger or cr:<gamma>)");
}

std::string DivergenceGenerator::name() const {
  if (kind_ == Kind::chi2) return "chi2";
  std::ostringstream os;
  os.precision(17);
  os << "cr:" << gamma_;
  return os.str();
}

double DivergenceGenerator::phi(double x) const {
  switch (kind_) {
    case Kind::chi2:
      return 0.5 * (x - 1.0) * (x - 1.0);
    case Kind::modified_kl:
      if (!(x > 0.0)) return kInf;
      return -std::log(x) + x - 1.0;
    case Kind::kl:
      if (x < 0.0) return kInf;
      if (x == 0.0) return 1.0;
      return x * std::log(x) - x + 1.0;
    case Kind::power:
      break;
  }
  const double g = gamma_;
  if (x < 0.0 || (x == 0.0 && g < 0.0)) return kInf;
  return (std::pow(x, g) - g * x + g - 1.0) / (g * (g - 1.0));
}

double DivergenceGenerator::phi_prime(double x) const {
  switch (kind_) {
    case Kind::chi2:
      return x - 1.0;
    case Kind::modified_kl:
      return 1.0 - 1.0 / x;
    case Kind::kl:
      return std::log(x);
    case Kind::power:
      break;
  }
  return (std::pow(x, gamma_ - 1.0) - 1.0) / (gamma_ - 1.0);
}

double DivergenceGenerator::psi_lower() const {
  if (kind_ == Kind::chi2 || gamma_ <= 1.0) return -kInf;
  return -1.0 / (gamma_ - 1.0);
}

double DivergenceGenerator::psi_upper() const {
  if (kind_ == Kind::chi2 || gamma_ >= 1.0) return kInf;
  return 1.0 / (1.0 - gamma_);
}

double DivergenceGenerator::phi_lower() const { return kind_ == Kind::chi2 ? -kInf : 0.0; }
double DivergenceGenerator::phi_upper() const { return kInf; }

bool DivergenceGenerator::in_psi_domain(double t) const {
  return std::isfinite(t) && t > psi_lower() && t < psi_upper();
}

double DivergenceGenerator::base(double t) const {
  if (!in_psi_domain(t)) {
    std::ostringstream os;
    os.precision(17);
    os << "conjugate of " << name() << " evaluated outside its domain at t = " << t;
    throw DomainError(os.str(), t);
  }
  return (gamma_ - 1.0) * t + 1.0;
}

double DivergenceGenerator::psi(double t) const {
  switch (kind_) {
    case Kind::chi2:
      if (!std::isfinite(t)) throw DomainError("conjugate of chi2 evaluated at a non-finite point", t);
      return 0.5 * t * t + t;
    case Kind::modified_kl:
      return -std::log(base(t));
    case Kind::kl:
      base(t);
      return std::expm1(t);
    case Kind::power:
      break;
  }
  const double b = base(t);
  return (std::pow(b, gamma_ / (gamma_ - 1.0)) - 1.0) / gamma_;
}

double DivergenceGenerator::psi_prime(double t) const {
  switch (kind_) {
    case Kind::chi2:
      if (!std::isfinite(t)) throw DomainError("conjugate of chi2 evaluated at a non-finite point", t);
      return t + 1.0;
    case Kind::modified_kl:
      return 1.0 / base(t);
    case Kind::kl:
      base(t);
      return std::exp(t);
    case Kind::power:
      break;
  }
  return std::pow(base(t), 1.0 / (gamma_ - 1.0));
}

double DivergenceGenerator::psi_second(double t) const {
  switch (kind_) {
    case Kind::chi2:
      if (!std::isfinite(t)) throw DomainError("conjugate of chi2 evaluated at a non-finite point", t);
      return 1.0;
    case Kind::modified_kl: {
      const double b = base(t);
      return 1.0 / (b * b);
    }
    case Kind::kl:
      base(t);
      return std::exp(t);
    case Kind::power:
      break;
  }
  return std::pow(base(t), (2.0 - gamma_) / (gamma_ - 1.0));
}

double conjugate_check(const DivergenceGenerator& g, std::span<const double> t_grid) {
  // Maximise tx − φ(x). On (0, ∞) search in s = log x; the map is monotone so
  // unimodality carries over.
  const bool whole_line = !(g.phi_lower() > -kInf);
  double worst = 0.0;
  for (double t : t_grid) {
    auto objective = [&](double s) {
      const double x = whole_line ? s : std::exp(s);
      const double v = t * x - g.phi(x);
      return std::isfinite(v) ? v : -kInf;
    };
    double lo = whole_line ? -1e3 * (1.0 + std::abs(t)) : -60.0;
    double hi = whole_line ? 1e3 * (1.0 + std::abs(t)) : 60.0;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - ratio * (hi - lo), b = lo + ratio * (hi - lo);
    double fa = objective(a), fb = objective(b);
    for (int it = 0; it < 400 && (hi - lo) > 1e-13 * (1.0 + std::abs(a)); ++it) {
      if (fa < fb) {
        lo = a;
        a = b;
        fa = fb;
        b = lo + ratio * (hi - lo);
        fb = objective(b);
      } else {
        hi = b;
        b = a;
        fb = fa;
        a = hi - ratio * (hi - lo);
        fa = objective(a);
      }
    }
    const double sup = std::max(fa, fb);
    worst = std::max(worst, std::abs(g.psi(t) - sup));
  }
  return worst;
}

}  // namespace lmix
