#include "lmix/splq_estimator.hpp"

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

struct SumEval {
  double h = -kInf;  // −∞ outside the ψ domain
  Eigen::VectorXd grad;
  Eigen::MatrixXd neg_hessian;
};

SumEval evaluate(const SplqSums& s, const Eigen::VectorXd& m, const Eigen::VectorXd& xi, const DivergenceGenerator& g,
                 bool derivatives) {
  SumEval e;
  const Eigen::Index l = s.k.rows();
  double acc = 0.0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(l);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(l, l);
  for (Eigen::Index i = 0; i < s.k.cols(); ++i) {
    const double d = s.spacing[i];
    if (d == 0.0) continue;
    const auto k = s.k.col(i);
    const double t = xi.dot(k);
    if (!g.in_psi_domain(t)) return e;
    acc += g.psi(t) * d;
    if (derivatives) {
      grad.noalias() += (g.psi_prime(t) * d) * k;
      hess.noalias() += (g.psi_second(t) * d) * k * k.transpose();
    }
  }
  e.h = xi.dot(m) - acc;
  if (derivatives) {
    e.grad = m - grad;
    e.neg_hessian = hess;
  }
  return e;
}

}  // namespace

SplqSums splq_sums(std::span<const double> data, const LMomentBasis& basis) {
  const std::size_t n = data.size();
  if (n < static_cast<std::size_t>(std::max(2, basis.max_order())))
    throw InputError("need at least " + std::to_string(std::max(2, basis.max_order())) + " observations, got " +
                     std::to_string(n));
  std::vector<double> x(data.begin(), data.end());
  for (double v : x)
    if (!std::isfinite(v)) throw InputError("data contains a non-finite value");
  std::sort(x.begin(), x.end());
  if (x.front() == x.back()) throw InputError("all observations are tied: every spacing is zero");

  const Eigen::Index l = basis.size(), cols = static_cast<Eigen::Index>(n - 1);
  SplqSums s{Eigen::MatrixXd(l, cols), Eigen::VectorXd(cols), Eigen::VectorXd::Zero(l), Eigen::MatrixXd::Zero(l, l)};
  for (Eigen::Index i = 0; i < cols; ++i) {
    basis.values(static_cast<double>(i + 1) / static_cast<double>(n), s.k.col(i));
    s.spacing[i] = x[static_cast<std::size_t>(i + 1)] - x[static_cast<std::size_t>(i)];
    s.b.noalias() += s.spacing[i] * s.k.col(i);
    s.omega.noalias() += s.spacing[i] * s.k.col(i) * s.k.col(i).transpose();
  }
  return s;
}

DualState splq_inner(const SplqSums& sums, const Eigen::VectorXd& m, const DivergenceGenerator& generator) {
  if (m.size() != sums.b.size()) throw InputError("constraint vector does not match the basis size");
  DualState s;
  s.m = m;
  s.b = sums.b;
  if (generator.is_chi2()) {
    const auto ldlt = guarded_factor(sums.omega, s.condition, "Omega_n");
    const Eigen::VectorXd residual = m - sums.b;
    s.xi = ldlt.solve(residual);
    s.objective = 0.5 * residual.dot(s.xi);
    s.gradient_norm = (residual - sums.omega * s.xi).norm();
    s.omega = sums.omega;
    s.xi_large = s.xi.norm() > 1e6;
    return s;
  }

  constexpr double kArmijo = 1e-4, kGradTol = 1e-9;
  constexpr int kMaxIter = 100, kMaxHalvings = 60;
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(m.size());
  SumEval cur = evaluate(sums, m, xi, generator, true);
  s.converged = false;
  for (s.iterations = 0; s.iterations < kMaxIter; ++s.iterations) {
    if (cur.grad.norm() <= kGradTol) {
      s.converged = true;
      break;
    }
    const auto ldlt = guarded_factor(cur.neg_hessian, s.condition, "negative Hessian");
    const Eigen::VectorXd step = ldlt.solve(cur.grad);
    const double slope = cur.grad.dot(step);
    if (slope <= 1e-15 * std::max(std::abs(cur.h), 1e-12)) {
      s.converged = true;
      break;
    }
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < kMaxHalvings; ++k, t *= 0.5) {
      const Eigen::VectorXd trial = xi + t * step;
      const SumEval e = evaluate(sums, m, trial, generator, false);
      if (e.h >= cur.h + kArmijo * t * slope) {
        xi = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw NumericalError("line search failed in the spacing-sum dual");
    cur = evaluate(sums, m, xi, generator, true);
    s.trace.push_back(cur.h);
  }
  s.xi = xi;
  s.objective = cur.h;
  s.gradient_norm = cur.grad.norm();
  s.omega = cur.neg_hessian;
  s.xi_large = xi.norm() > 1e6;
  return s;
}

Box default_alpha_box(const ConstraintModel& model) {
  const ComponentDistribution& t = model.family_template();
  Box box{Eigen::VectorXd(model.dim()), Eigen::VectorXd(model.dim())};
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < t.params().size(); ++i) {
    if (!t.free_mask()[static_cast<std::size_t>(i)]) continue;
    const auto [lo, hi] = t.default_bounds(i);
    box.lower[k] = lo;
    box.upper[k] = hi;
    ++k;
  }
  return box;
}

SplqFit splq_fit(std::span<const double> data, const ConstraintModel& model, const Box& alpha_box,
                 std::vector<Eigen::VectorXd> starts, const EstimationOptions& options) {
  alpha_box.validate();
  if (alpha_box.dim() != model.dim()) throw InputError("alpha box has the wrong dimension");
  if (starts.empty()) starts.push_back(model.family_template().free_values());
  for (const auto& s : starts)
    if (s.size() != model.dim()) throw InputError("start point has the wrong dimension");
  const LMomentBasis basis(model.orders());
  const SplqSums sums = splq_sums(data, basis);

  struct Outcome {
    StartTrace trace;
    Eigen::VectorXd xi;
  };
  auto run = [&](const Eigen::VectorXd& start) {
    Outcome out;
    out.trace.start = start;
    double best = kInf;
    std::string last_error;
    auto objective = [&](const Eigen::VectorXd& alpha) {
      try {
        const DualState s = splq_inner(sums, model.m(alpha), options.generator);
        if (!std::isfinite(s.objective)) return kInf;
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
    const NelderMeadResult r = nelder_mead(objective, start, alpha_box, options.optimizer);
    out.trace.final_point = r.x;
    out.trace.value = r.value;
    out.trace.iterations = r.iterations;
    out.trace.evaluations = r.evaluations;
    out.trace.converged = r.converged;
    if (!std::isfinite(r.value)) out.trace.error = last_error.empty() ? "objective never finite" : last_error;
    return out;
  };

  std::vector<Outcome> outcomes(starts.size());
  const int jobs = std::clamp(options.jobs, 1, static_cast<int>(starts.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) outcomes[i] = run(starts[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < starts.size(); i = next++) outcomes[i] = run(starts[i]);
      });
    for (auto& th : pool) th.join();
  }

  SplqFit fit;
  fit.spacings = sums.spacing;
  fit.b = sums.b;
  fit.omega = sums.omega;
  fit.names = model.family_template().free_names();
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const StartTrace& t = outcomes[i].trace;
    fit.starts.push_back(t);
    if (!std::isfinite(t.value)) continue;
    const StartTrace* cur = best ? &outcomes[*best].trace : nullptr;
    if (!cur || t.value < cur->value ||
        (t.value == cur->value &&
         std::lexicographical_compare(t.final_point.data(), t.final_point.data() + t.final_point.size(),
                                      cur->final_point.data(), cur->final_point.data() + cur->final_point.size())))
      best = i;
  }
  if (!best) {
    std::ostringstream msg;
    msg << "no start produced a finite objective";
    for (std::size_t i = 0; i < fit.starts.size(); ++i) msg << "; start " << i << ": " << fit.starts[i].error;
    throw EstimationFailure(msg.str());
  }
  fit.best_start = *best;
  fit.alpha = outcomes[*best].trace.final_point;
  fit.objective = outcomes[*best].trace.value;
  fit.xi = outcomes[*best].xi;
  return fit;
}

}  // namespace lmix
