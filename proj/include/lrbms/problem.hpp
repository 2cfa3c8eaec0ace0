#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "lrbms/grid.hpp"

namespace lrbms {

enum class BoundaryKind { Dirichlet, Neumann };

/// Affine-in-mu coefficient a0 + a . mu.
struct ThetaAffine {
  double a0 = 1.0;
  Eigen::VectorXd a;
  double eval(const Eigen::VectorXd& mu) const { return a.size() == 0 ? a0 : a0 + a.dot(mu); }
};

/// Parameterized diffusion problem with affine decomposition
/// kappa(mu) = sum_q theta_q(mu) kappa_q and a fixed scalar source.
class ParamProblem {
 public:
  Rect domain;
  Eigen::VectorXd p_lo, p_hi;  // parameter box
  std::vector<ThetaAffine> theta;
  std::vector<std::function<double(double, double)>> kappa;
  std::function<double(double, double)> source;
  BoundaryKind bc = BoundaryKind::Dirichlet;

  int n_terms() const { return static_cast<int>(theta.size()); }
  Eigen::VectorXd center() const { return 0.5 * (p_lo + p_hi); }
  bool in_box(const Eigen::VectorXd& mu) const;
  /// All corners of the parameter box (2^p points).
  std::vector<Eigen::VectorXd> box_corners() const;
};

/// theta_q(mu) for q = 1..Q_a; throws parameter_error outside the box.
Eigen::VectorXd theta_eval(const ParamProblem& problem, const Eigen::VectorXd& mu);

/// Cellwise-constant samples of the data fields on a grid (cell centers).
struct ProblemData {
  std::vector<Eigen::VectorXd> kappa;  // per term, per cell
  Eigen::VectorXd source;
  Eigen::VectorXd kappa_at(const Eigen::VectorXd& theta_values) const;
};

/// Samples fields and verifies kappa(mu) > 0 at the parameter-box corners.
ProblemData sample_problem(const ParamProblem& problem, const FineGrid& grid);

/// kappa = 1, source 2 pi^2 sin(pi x) sin(pi y), exact solution sin sin.
ParamProblem manufactured_problem();

/// High-contrast channel field on [0,5]x[0,1]: kappa(mu) = kappa_eps +
/// (1 - mu) lambda_c kappa_eps with one channel toggled by mu in [0.1, 1],
/// balanced source/sink boxes.
ParamProblem channel_problem();

/// kappa = kappa_a + (1 - mu) kappa_b with a blocky kappa_b on a unit square;
/// small two-term instance for dense oracles.
ParamProblem two_term_problem();

}  // namespace lrbms
