#include "lmix/mixture_estimator.hpp"

#include "lmix/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

namespace lmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct StartOutcome {
  StartTrace trace;
  Eigen::VectorXd xi;  // ξ at the best point this start evaluated
};

StartOutcome run_start(const SemiparametricModel& model, const CdfSource& mixture, const ParameterSpace& space,
                       const Eigen::VectorXd& start, const EstimationOptions& options) {
  StartOutcome out;
  out.trace.start = start;
  std::optional<Eigen::VectorXd> warm;
  double best = kInf;
  std::string last_error;
  auto objective = [&](const Eigen::VectorXd& phi) {
    try {
      const DualState s = profiled_objective(model, phi, mixture, options.generator, options.rel_tol,
                                             options.generator.is_chi2() ? std::nullopt : warm);
      if (!std::isfinite(s.objective)) return kInf;
      warm = s.xi;
      if (s.objective < best) {
        best = s.objective;
        out.xi = s.xi;
      }
      return s.objective;
    } catch (const Error& e) {
      last_error = e.what();
      return kInf;
    }
  };
  try {
    const NelderMeadResult r = nelder_mead(objective, start, space.box, options.optimizer);
    out.trace.final_point = r.x;
    out.trace.value = r.value;
    out.trace.iterations = r.iterations;
    out.trace.evaluations = r.evaluations;
    out.trace.converged = r.converged;
    if (!std::isfinite(r.value)) out.trace.error = last_error.empty() ? "objective never finite" : last_error;
  } catch (const Error& e) {
    out.trace.final_point = start;
    out.trace.value = kInf;
    out.trace.error = e.what();
  }
  return out;
}

bool lexicographically_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

PhiPlusReport phi_plus_for(const CdfSource& mixture, double lambda, const ComponentDistribution& parametric) {
  if (const auto* e = dynamic_cast<const EmpiricalCdf*>(&mixture)) return empirical_phi_plus(lambda, parametric, *e);
  if (const auto* t = dynamic_cast<const MixtureCdf*>(&mixture)) return phi_plus_check(lambda, parametric, *t);
  return {};
}

}  // namespace

ParameterSpace ParameterSpace::defaults(const SemiparametricModel& model) {
  const Eigen::Index d = model.dim();
  ParameterSpace s{{Eigen::VectorXd(d), Eigen::VectorXd(d)}};
  s.box.lower[0] = kLambdaFloor;
  s.box.upper[0] = kLambdaCeil;
  Eigen::Index k = 1;
  auto fill = [&](const ComponentDistribution& c) {
    for (Eigen::Index i = 0; i < c.params().size(); ++i) {
      if (!c.free_mask()[static_cast<std::size_t>(i)]) continue;
      const auto [lo, hi] = c.default_bounds(i);
      s.box.lower[k] = lo;
      s.box.upper[k] = hi;
      ++k;
    }
  };
  fill(model.parametric_template());
  fill(model.constraints().family_template());
  return s;
}

ParameterSpace ParameterSpace::with_lambda(double lo, double hi) const {
  ParameterSpace s = *this;
  s.box.lower[0] = lo;
  s.box.upper[0] = hi;
  return s;
}

void ParameterSpace::validate(const SemiparametricModel& model) const {
  box.validate();
  if (box.dim() != model.dim()) throw InputError("parameter box has the wrong dimension");
  if (!(box.lower[0] >= kLambdaFloor && box.upper[0] <= kLambdaCeil))
    throw InputError("lambda bounds must lie in [0.005, 0.995]");
}

EstimationResult estimate(std::span<const double> data, const SemiparametricModel& model, const ParameterSpace& space,
                          const std::vector<Eigen::VectorXd>& starts, const EstimationOptions& options) {
  if (data.size() < 30) throw InputError("estimation needs at least 30 observations, got " + std::to_string(data.size()));
  for (double x : data)
    if (!std::isfinite(x)) throw InputError("data contains a non-finite value");
  const EmpiricalCdf fn(data);
  return estimate_with_cdf(fn, model, space, starts, options);
}

EstimationResult estimate_with_cdf(const CdfSource& mixture, const SemiparametricModel& model,
                                   const ParameterSpace& space, const std::vector<Eigen::VectorXd>& starts,
                                   const EstimationOptions& options) {
  space.validate(model);
  if (starts.empty()) throw InputError("no start points given");
  for (const auto& s : starts)
    if (s.size() != model.dim())
      throw InputError("start point has dimension " + std::to_string(s.size()) + ", expected " +
                       std::to_string(model.dim()));

  std::vector<StartOutcome> outcomes(starts.size());
  const int jobs = std::clamp(options.jobs, 1, static_cast<int>(starts.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) outcomes[i] = run_start(model, mixture, space, starts[i], options);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < starts.size(); i = next++)
          outcomes[i] = run_start(model, mixture, space, starts[i], options);
      });
    for (auto& th : pool) th.join();
  }

  EstimationResult res;
  res.names = model.parameter_names();
  std::optional<std::size_t> best;
  double lo = kInf, hi = -kInf;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const StartTrace& t = outcomes[i].trace;
    res.starts.push_back(t);
    if (!std::isfinite(t.value)) continue;
    lo = std::min(lo, t.value);
    hi = std::max(hi, t.value);
    if (!best || t.value < outcomes[*best].trace.value ||
        (t.value == outcomes[*best].trace.value &&
         lexicographically_less(t.final_point, outcomes[*best].trace.final_point)))
      best = i;
  }
  if (!best) {
    std::ostringstream msg;
    msg << "no start produced a finite objective";
    for (std::size_t i = 0; i < res.starts.size(); ++i) msg << "; start " << i << ": " << res.starts[i].error;
    throw EstimationFailure(msg.str());
  }

  const StartOutcome& b = outcomes[*best];
  res.best_start = *best;
  res.phi = b.trace.final_point;
  res.objective = b.trace.value;
  res.xi = b.xi;
  const auto p = model.split(res.phi);
  res.lambda = p.lambda;
  res.theta = p.theta;
  res.alpha = p.alpha;
  res.phi_plus_report = phi_plus_for(mixture, p.lambda, model.parametric_at(p));
  res.phi_plus = res.phi_plus_report.member;

  if (model.constraint_count() < model.dim())
    res.warnings.push_back("fewer constraints (" + std::to_string(model.constraint_count()) + ") than parameters (" +
                           std::to_string(model.dim()) + ")");
  if (hi - lo > 1e-3) {
    std::ostringstream msg;
    msg << "starts disagree: terminal objectives span [" << lo << ", " << hi << "]";
    res.warnings.push_back(msg.str());
  }
  for (std::size_t i = 0; i < res.starts.size(); ++i)
    if (std::isfinite(res.starts[i].value) && !res.starts[i].converged)
      res.warnings.push_back("start " + std::to_string(i) + " hit the iteration limit");
  if (!res.phi_plus) res.warnings.push_back("estimate lies outside the effective set: signed sub-CDF is not a CDF");
  return res;
}

std::vector<double> objective_trace(const SemiparametricModel& model, const std::vector<Eigen::VectorXd>& path,
                                    const CdfSource& mixture, const DivergenceGenerator& generator, double rel_tol) {
  std::vector<double> out;
  out.reserve(path.size());
  for (const auto& phi : path) {
    try {
      out.push_back(profiled_objective(model, phi, mixture, generator, rel_tol).objective);
    } catch (const Error&) {
      out.push_back(kInf);
    }
  }
  return out;
}

double exponential_curve_lhs(double lambda, double rate, double lambda_star, double rate1_star, double rate0_star) {
  const double c2 = lambda_star / rate1_star + (1.0 - lambda_star) / rate0_star;
  const double c1 = c2 - lambda_star * lambda_star / (4.0 * rate1_star) -
                    (1.0 - lambda_star) * (1.0 - lambda_star) / (4.0 * rate0_star) -
                    lambda_star * (1.0 - lambda_star) / (rate1_star + rate0_star);
  const double w = 1.0 / ((1.0 - lambda) * (1.0 - lambda));
  return w * (2.0 * c1 - (lambda + 1.0) * c2) + w * (lambda * lambda - 2.0 * lambda) / (2.0 * rate) +
         w * 2.0 * lambda_star * lambda / (rate + rate1_star) +
         w * 2.0 * lambda * (1.0 - lambda_star) / (rate + rate0_star);
}

std::vector<CurvePoint> identifiability_curve_exponential(double lambda_star, double rate1_star, double rate0_star,
                                                          const std::vector<double>& lambda_grid,
                                                          const CurveOptions& options) {
  if (!(lambda_star > 0.0 && lambda_star < 1.0)) throw InputError("lambda* must lie in (0, 1)");
  if (!(rate1_star > 0.0 && rate0_star > 0.0)) throw InputError("exponential rates must be positive");
  if (!(options.rate_lo > 0.0 && options.rate_hi > options.rate_lo && options.scan_points >= 2))
    throw InputError("invalid rate scan range");
  const double target = 1.0 / (2.0 * rate0_star);
  const MixtureCdf truth(MixtureSpec{lambda_star, ComponentDistribution::exponential(rate1_star),
                                     ComponentDistribution::exponential(rate0_star)});
  std::vector<CurvePoint> out;
  const double step = std::log(options.rate_hi / options.rate_lo) / (options.scan_points - 1);
  for (double lambda : lambda_grid) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("lambda grid values must lie in (0, 1)");
    auto g = [&](double a) { return exponential_curve_lhs(lambda, a, lambda_star, rate1_star, rate0_star) - target; };
    double a_prev = options.rate_lo, g_prev = g(a_prev);
    for (int i = 1; i < options.scan_points; ++i) {
      const double a = options.rate_lo * std::exp(step * i);
      const double ga = g(a);
      double root = std::numeric_limits<double>::quiet_NaN();
      if (g_prev == 0.0) {
        root = a_prev;
      } else if ((g_prev < 0.0) != (ga < 0.0) && ga != 0.0) {
        double lo = a_prev, hi = a, glo = g_prev;
        for (int k = 0; k < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++k) {
          const double mid = 0.5 * (lo + hi);
          const double gm = g(mid);
          if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
        }
        root = std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
      }
      if (std::isfinite(root)) {
        const auto report = phi_plus_check(lambda, ComponentDistribution::exponential(root), truth);
        out.push_back({lambda, root, g(root), report.member});
      }
      a_prev = a;
      g_prev = ga;
    }
  }
  return out;
}

}  // namespace lmix
