#include "lmix/quadrature.hpp"

#include "lmix/errors.hpp"

#include <numbers>

namespace lmix {

IntegrationPlan& IntegrationPlan::with_breakpoints(std::vector<double> points) {
  std::erase_if(points, [&](double x) { return !(x > lower && x < upper); });
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  breakpoints = std::move(points);
  return *this;
}

std::vector<double> IntegrationPlan::edges() const {
  std::vector<double> e;
  e.reserve(breakpoints.size() + 2);
  e.push_back(lower);
  for (double b : breakpoints)
    if (b > e.back() && b < upper) e.push_back(b);
  e.push_back(upper);
  return e;
}

void IntegrationPlan::validate() const {
  if (!std::isfinite(lower) || !std::isfinite(upper))
    throw InputError("integration bounds must be finite after truncation");
  if (upper < lower) throw InputError("integration upper bound below lower bound");
  if (!(rel_tol > 0.0) || abs_tol < 0.0) throw InputError("integration tolerances must be positive");
}

GaussLegendreRule gauss_legendre(int points) {
  if (points < 1) throw InputError("Gauss-Legendre rule needs at least one point");
  // P_n(x) and P_n'(x) by the three-term recurrence.
  auto legendre = [points](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= points; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, points * (x * p1 - p0) / (x * x - 1.0)};
  };
  GaussLegendreRule rule{Eigen::VectorXd(points), Eigen::VectorXd(points)};
  for (int i = 0; i < (points + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[points - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[points - 1 - i] = w;
  }
  if (points % 2 == 1) rule.nodes[points / 2] = 0.0;
  return rule;
}

std::vector<double> panel_edges(const IntegrationPlan& plan, int panels) {
  const std::vector<double> base = plan.edges();
  const std::size_t segments = base.size() - 1;
  if (static_cast<int>(segments) >= panels) return base;
  const double width = plan.upper - plan.lower;
  std::vector<double> edges{base.front()};
  int remaining = panels;
  for (std::size_t s = 0; s < segments; ++s) {
    const double len = base[s + 1] - base[s];
    int k = std::max(1, static_cast<int>(std::lround(panels * len / width)));
    if (s + 1 == segments) k = std::max(1, remaining);
    k = std::min(k, std::max(1, remaining - static_cast<int>(segments - s - 1)));
    for (int j = 1; j < k; ++j) edges.push_back(base[s] + len * j / k);
    edges.push_back(base[s + 1]);
    remaining -= k;
  }
  return edges;
}

CompositeRule composite_rule(const std::vector<double>& edges, int order) {
  const GaussLegendreRule gl = gauss_legendre(order);
  const auto panels = static_cast<Eigen::Index>(edges.size()) - 1;
  CompositeRule rule{Eigen::VectorXd(panels * order), Eigen::VectorXd(panels * order), {}};
  rule.panel.resize(static_cast<std::size_t>(panels * order));
  for (Eigen::Index p = 0; p < panels; ++p) {
    const double c = 0.5 * (edges[p] + edges[p + 1]);
    const double h = 0.5 * (edges[p + 1] - edges[p]);
    for (int j = 0; j < order; ++j) {
      rule.nodes[p * order + j] = c + h * gl.nodes[j];
      rule.weights[p * order + j] = h * gl.weights[j];
      rule.panel[static_cast<std::size_t>(p * order + j)] = static_cast<int>(p);
    }
  }
  return rule;
}

namespace {

double tensor_sum(const std::function<double(double, double)>& f, const CompositeRule& rx,
                  const CompositeRule& ry) {
  // Row sums first, then a pairwise reduction across rows for a fixed order.
  std::vector<double> rows(static_cast<std::size_t>(rx.nodes.size()));
  for (Eigen::Index i = 0; i < rx.nodes.size(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < ry.nodes.size(); ++j) acc += ry.weights[j] * f(rx.nodes[i], ry.nodes[j]);
    rows[static_cast<std::size_t>(i)] = rx.weights[i] * acc;
  }
  std::size_t len = rows.size();
  while (len > 1) {
    const std::size_t half = (len + 1) / 2;
    for (std::size_t i = 0; i + half < len; ++i) rows[i] += rows[i + half];
    len = half;
  }
  return rows.empty() ? 0.0 : rows[0];
}

}  // namespace

QuadratureResult integrate2d(const std::function<double(double, double)>& f, const IntegrationPlan& plan_x,
                             const IntegrationPlan& plan_y, int panels, int order) {
  plan_x.validate();
  plan_y.validate();
  const CompositeRule fine_x = composite_rule(panel_edges(plan_x, panels), order);
  const CompositeRule fine_y = composite_rule(panel_edges(plan_y, panels), order);
  const CompositeRule coarse_x = composite_rule(panel_edges(plan_x, std::max(1, panels / 2)), order);
  const CompositeRule coarse_y = composite_rule(panel_edges(plan_y, std::max(1, panels / 2)), order);
  QuadratureResult res;
  res.value = tensor_sum(f, fine_x, fine_y);
  const double coarse = tensor_sum(f, coarse_x, coarse_y);
  res.error = std::abs(res.value - coarse);
  res.evaluations = static_cast<long>(fine_x.nodes.size() * fine_y.nodes.size() +
                                      coarse_x.nodes.size() * coarse_y.nodes.size());
  res.converged = std::isfinite(res.value) &&
                  res.error <= std::max(plan_x.abs_tol, std::max(plan_x.rel_tol, 1e-6) * std::abs(res.value));
  return res;
}

}  // namespace lmix
