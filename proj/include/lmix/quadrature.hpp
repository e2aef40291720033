#ifndef LMIX_QUADRATURE_HPP
#define LMIX_QUADRATURE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

namespace lmix {

/// Truncated integration range with optional interior breakpoints.
///
/// Breakpoints mark places where the integrand may be non-smooth (jumps of an
/// empirical CDF, kinks); the adaptive rule never straddles one.
struct IntegrationPlan {
  double lower = 0.0;
  double upper = 1.0;
  std::vector<double> breakpoints;
  double rel_tol = 1e-8;
  double abs_tol = 1e-13;
  int max_subdivisions = 20000;

  static IntegrationPlan on(double lower, double upper, double rel_tol = 1e-8) {
    IntegrationPlan p;
    p.lower = lower;
    p.upper = upper;
    p.rel_tol = rel_tol;
    return p;
  }

  /// Sorts, removes duplicates and drops points outside (lower, upper).
  IntegrationPlan& with_breakpoints(std::vector<double> points);

  /// Segment endpoints lower, breakpoints..., upper.
  std::vector<double> edges() const;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  long evaluations = 0;
  int subdivisions = 0;
};

struct VectorQuadratureResult {
  Eigen::VectorXd value;
  double error = 0.0;  // summed max-norm error estimate
  bool converged = true;
  long evaluations = 0;
  int subdivisions = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kGk15Nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kGk15Weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for nodes 1, 3, 5 and the centre.
inline constexpr std::array<double, 4> kG7Weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a, b;
  double error;
  std::size_t slot;  // offset into the value store
};

// Applies qk15 on [a,b]; writes the Kronrod estimate into value, returns the
// max-norm error estimate with QUADPACK's resasc scaling.
template <typename F>
double gk15(F& f, double a, double b, Eigen::Index dim, double* value, Eigen::MatrixXd& fv) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  // fv columns: 0 = centre, 2j+1 / 2j+2 = c -/+ h x_j.
  f(c, fv.col(0));
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kGk15Nodes[j];
    f(c - dx, fv.col(2 * j + 1));
    f(c + dx, fv.col(2 * j + 2));
  }
  double err_max = 0.0;
  for (Eigen::Index d = 0; d < dim; ++d) {
    double rk = kGk15Weights[7] * fv(d, 0);
    double rg = kG7Weights[3] * fv(d, 0);
    for (int j = 0; j < 7; ++j) {
      const double s = fv(d, 2 * j + 1) + fv(d, 2 * j + 2);
      rk += kGk15Weights[j] * s;
      if (j % 2 == 1) rg += kG7Weights[j / 2] * s;
    }
    const double mean = 0.5 * rk;
    double asc = kGk15Weights[7] * std::abs(fv(d, 0) - mean);
    for (int j = 0; j < 7; ++j)
      asc += kGk15Weights[j] * (std::abs(fv(d, 2 * j + 1) - mean) + std::abs(fv(d, 2 * j + 2) - mean));
    const double ah = std::abs(h);
    double err = std::abs((rk - rg) * h);
    asc *= ah;
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    if (!std::isfinite(rk)) err = std::numeric_limits<double>::infinity();
    value[d] = rk * h;
    err_max = std::max(err_max, err);
  }
  return err_max;
}

}  // namespace detail

/// Globally adaptive Gauss–Kronrod integration of a vector-valued integrand.
///
/// f(x, out) fills out (length dim). Each segment between consecutive plan
/// edges starts as one interval; the interval with the largest error is
/// bisected until the summed error is within max(abs_tol, rel_tol·|I|∞) or the
/// subdivision budget is spent (converged = false).
template <typename F>
VectorQuadratureResult integrate_vector(F&& f, Eigen::Index dim, const IntegrationPlan& plan) {
  plan.validate();
  VectorQuadratureResult res;
  res.value = Eigen::VectorXd::Zero(dim);
  const std::vector<double> edges = plan.edges();
  if (edges.size() < 2 || plan.upper <= plan.lower) return res;

  Eigen::MatrixXd fv(dim, 15);
  std::vector<double> store;
  store.reserve(static_cast<std::size_t>(dim) * (edges.size() + 64));
  std::vector<detail::Interval> intervals;
  intervals.reserve(edges.size() + 64);

  auto eval = [&](double a, double b) {
    const std::size_t slot = store.size();
    store.resize(slot + static_cast<std::size_t>(dim));
    const double err = detail::gk15(f, a, b, dim, store.data() + slot, fv);
    res.evaluations += 15;
    return detail::Interval{a, b, err, slot};
  };

  for (std::size_t i = 0; i + 1 < edges.size(); ++i) intervals.push_back(eval(edges[i], edges[i + 1]));

  auto totals = [&](Eigen::VectorXd& value, double& error) {
    value.setZero();
    error = 0.0;
    for (const auto& iv : intervals) {
      for (Eigen::Index d = 0; d < dim; ++d) value[d] += store[iv.slot + static_cast<std::size_t>(d)];
      error += iv.error;
    }
  };

  Eigen::VectorXd value(dim);
  double error = 0.0;
  totals(value, error);
  auto tolerance = [&] { return std::max(plan.abs_tol, plan.rel_tol * value.cwiseAbs().maxCoeff()); };

  if (!(error <= tolerance())) {
    auto cmp = [&](std::size_t l, std::size_t r) { return intervals[l].error < intervals[r].error; };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
    for (std::size_t i = 0; i < intervals.size(); ++i) heap.push(i);
    while (!(error <= tolerance()) && res.subdivisions < plan.max_subdivisions && !heap.empty()) {
      const std::size_t worst = heap.top();
      heap.pop();
      const detail::Interval iv = intervals[worst];
      const double mid = 0.5 * (iv.a + iv.b);
      // Interval collapsed to adjacent doubles: keep its error on the books, stop refining it.
      if (!(mid > iv.a && mid < iv.b)) continue;
      for (Eigen::Index d = 0; d < dim; ++d) value[d] -= store[iv.slot + static_cast<std::size_t>(d)];
      error -= iv.error;
      detail::Interval left = eval(iv.a, mid);
      detail::Interval right = eval(mid, iv.b);
      for (Eigen::Index d = 0; d < dim; ++d)
        value[d] += store[left.slot + static_cast<std::size_t>(d)] + store[right.slot + static_cast<std::size_t>(d)];
      error += left.error + right.error;
      intervals[worst] = left;
      intervals.push_back(right);
      heap.push(worst);
      heap.push(intervals.size() - 1);
      ++res.subdivisions;
    }
    // Re-sum in interval order so results do not depend on update rounding.
    totals(value, error);
  }
  res.value = value;
  res.error = error;
  res.converged = std::isfinite(error) && error <= tolerance();
  return res;
}

template <typename F>
QuadratureResult integrate(F&& f, const IntegrationPlan& plan) {
  auto wrapped = [&f](double x, Eigen::Ref<Eigen::VectorXd> out) { out[0] = f(x); };
  const VectorQuadratureResult v = integrate_vector(wrapped, 1, plan);
  return {v.value[0], v.error, v.converged, v.evaluations, v.subdivisions};
}

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GaussLegendreRule gauss_legendre(int points);

/// Panel edges built from a plan: its own segments, each split evenly so the
/// total is at least `panels`.
std::vector<double> panel_edges(const IntegrationPlan& plan, int panels);

/// Composite Gauss–Legendre rule with `order` points per panel.
struct CompositeRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  std::vector<int> panel;  // panel index of each node
};

CompositeRule composite_rule(const std::vector<double>& edges, int order);

/// Tensor-product integral of f(x, y) over plan_x × plan_y. The error field is
/// the difference against the same rule at half the panel count.
QuadratureResult integrate2d(const std::function<double(double, double)>& f, const IntegrationPlan& plan_x,
                             const IntegrationPlan& plan_y, int panels = 128, int order = 4);

}  // namespace lmix

#endif  // LMIX_QUADRATURE_HPP
