#include "lmix/nelder_mead.hpp"

#include "lmix/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace lmix {

bool Box::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return x.size() == dim() && (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Eigen::VectorXd Box::project(Eigen::VectorXd x) const {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] > upper[i]) x[i] = upper[i] - (x[i] - upper[i]);
    else if (x[i] < lower[i]) x[i] = lower[i] + (lower[i] - x[i]);
    x[i] = std::clamp(x[i], lower[i], upper[i]);
  }
  return x;
}

void Box::validate() const {
  if (lower.size() != upper.size()) throw InputError("box bounds differ in length");
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (!(lower[i] <= upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw InputError("box bounds must be finite with lower <= upper");
}

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const Box& box, const NelderMeadOptions& options) {
  box.validate();
  if (x0.size() != box.dim()) throw InputError("start point has the wrong dimension");
  const Eigen::Index d = x0.size();
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  NelderMeadResult res;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  };

  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(d + 1));
  std::vector<double> vals(static_cast<std::size_t>(d + 1));
  pts[0] = box.project(x0);
  const double step = options.initial_step * std::max(1.0, pts[0].cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd p = pts[0];
    // Step away from the nearer face so the vertex stays distinct.
    p[i] += (p[i] + step <= box.upper[i]) ? step : -step;
    pts[static_cast<std::size_t>(i + 1)] = box.project(p);
  }
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(pts.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    // Ties broken by vertex index keeps the run deterministic.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> p2;
    std::vector<double> v2;
    for (std::size_t k : order) {
      p2.push_back(pts[k]);
      v2.push_back(vals[k]);
    }
    pts.swap(p2);
    vals.swap(v2);
  };

  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    sort_simplex();
    double diameter = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) diameter = std::max(diameter, (pts[i] - pts[0]).cwiseAbs().maxCoeff());
    if (diameter <= options.rel_diameter_tol * std::max(1.0, pts[0].cwiseAbs().maxCoeff())) {
      res.converged = true;
      break;
    }
    const std::size_t worst = pts.size() - 1;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < worst; ++i) centroid += pts[i];
    centroid /= static_cast<double>(d);

    const Eigen::VectorXd xr = box.project(centroid + kReflect * (centroid - pts[worst]));
    const double fr = eval(xr);
    if (fr < vals[0]) {
      const Eigen::VectorXd xe = box.project(centroid + kExpand * (xr - centroid));
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[worst - 1]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd xc = box.project(outside ? Eigen::VectorXd(centroid + kContract * (xr - centroid))
                                                   : Eigen::VectorXd(centroid + kContract * (pts[worst] - centroid)));
    const double fc = eval(xc);
    if (outside ? fc <= fr : fc < vals[worst]) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
      pts[i] = box.project(pts[0] + kShrink * (pts[i] - pts[0]));
      vals[i] = eval(pts[i]);
    }
  }
  sort_simplex();
  res.x = pts[0];
  res.value = vals[0];
  return res;
}

}  // namespace lmix
