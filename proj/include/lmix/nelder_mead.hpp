#ifndef LMIX_NELDER_MEAD_HPP
#define LMIX_NELDER_MEAD_HPP

#include <Eigen/Dense>

#include <functional>

namespace lmix {

/// Axis-aligned box. project() reflects a point once across any violated face,
/// then clips, so a reflected step keeps its length where it can.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index dim() const { return lower.size(); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd project(Eigen::VectorXd x) const;
  void validate() const;
};

struct NelderMeadOptions {
  double rel_diameter_tol = 1e-6;
  int max_iterations = 500;
  /// Initial edge length as a fraction of max(|x0|∞, 1).
  double initial_step = 0.1;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimises f over the box. Non-finite values are treated as +∞.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const Box& box, const NelderMeadOptions& options = {});

}  // namespace lmix

#endif  // LMIX_NELDER_MEAD_HPP
