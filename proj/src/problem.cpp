#include "lrbms/problem.hpp"

#include "lrbms/errors.hpp"

namespace lrbms {

bool ParamProblem::in_box(const Eigen::VectorXd& mu) const {
  if (mu.size() != p_lo.size()) return false;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if (mu[i] < p_lo[i] - 1e-14 || mu[i] > p_hi[i] + 1e-14) return false;
  return true;
}

std::vector<Eigen::VectorXd> ParamProblem::box_corners() const {
  const int p = static_cast<int>(p_lo.size());
  std::vector<Eigen::VectorXd> corners;
  for (int mask = 0; mask < (1 << p); ++mask) {
    Eigen::VectorXd c(p);
    for (int i = 0; i < p; ++i) c[i] = (mask >> i) & 1 ? p_hi[i] : p_lo[i];
    corners.push_back(c);
  }
  return corners;
}

Eigen::VectorXd theta_eval(const ParamProblem& problem, const Eigen::VectorXd& mu) {
  if (!problem.in_box(mu)) throw parameter_error("parameter outside the admissible box");
  Eigen::VectorXd t(problem.n_terms());
  for (int q = 0; q < problem.n_terms(); ++q) t[q] = problem.theta[q].eval(mu);
  return t;
}

Eigen::VectorXd ProblemData::kappa_at(const Eigen::VectorXd& theta_values) const {
  Eigen::VectorXd k = theta_values[0] * kappa[0];
  for (int q = 1; q < static_cast<int>(kappa.size()); ++q) k += theta_values[q] * kappa[q];
  return k;
}

ProblemData sample_problem(const ParamProblem& problem, const FineGrid& grid) {
  ProblemData data;
  const int nc = grid.n_cells();
  data.kappa.resize(problem.n_terms());
  for (int q = 0; q < problem.n_terms(); ++q) {
    data.kappa[q].resize(nc);
    for (int c = 0; c < nc; ++c) {
      const auto [x, y] = grid.cell_center(c);
      data.kappa[q][c] = problem.kappa[q](x, y);
    }
  }
  data.source.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const auto [x, y] = grid.cell_center(c);
    data.source[c] = problem.source(x, y);
  }
  for (const auto& corner : problem.box_corners()) {
    const Eigen::VectorXd th = theta_eval(problem, corner);
    if (data.kappa_at(th).minCoeff() <= 0.0)
      throw config_error("diffusion field not positive over the parameter box");
  }
  return data;
}

namespace {
bool in_box2(double x, double y, double x0, double x1, double y0, double y1) {
  return x >= x0 && x <= x1 && y >= y0 && y <= y1;
}
}  // namespace

ParamProblem manufactured_problem() {
  ParamProblem p;
  p.domain = {0, 0, 1, 1};
  p.p_lo = Eigen::VectorXd::Zero(1);
  p.p_hi = Eigen::VectorXd::Ones(1);
  p.theta = {ThetaAffine{1.0, Eigen::VectorXd::Zero(1)}};
  p.kappa = {[](double, double) { return 1.0; }};
  p.source = [](double x, double y) { return 2.0 * M_PI * M_PI * std::sin(M_PI * x) * std::sin(M_PI * y); };
  return p;
}

ParamProblem channel_problem() {
  ParamProblem p;
  p.domain = {0, 0, 5, 1};
  p.p_lo = Eigen::VectorXd::Constant(1, 0.1);
  p.p_hi = Eigen::VectorXd::Constant(1, 1.0);
  p.theta = {ThetaAffine{1.0, Eigen::VectorXd::Zero(1)},
             ThetaAffine{1.0, -Eigen::VectorXd::Ones(1)}};  // 1 - mu
  auto kappa_eps = [](double x, double y) {
    if (in_box2(x, y, 0.0, 2.2, 0.70, 0.80)) return 1e4;
    if (in_box2(x, y, 1.5, 5.0, 0.20, 0.30)) return 1e4;
    if (in_box2(x, y, 0.0, 2.6, 0.50, 0.60)) return 1e4;  // channel, interrupted
    if (in_box2(x, y, 3.4, 5.0, 0.50, 0.60)) return 1e4;
    return 1.0;
  };
  auto lambda_c = [](double x, double y) {  // fills the gap for mu < 1
    return in_box2(x, y, 2.6, 3.4, 0.50, 0.60) ? 1.1e4 : 0.0;
  };
  p.kappa = {kappa_eps, [=](double x, double y) { return lambda_c(x, y) * kappa_eps(x, y); }};
  p.source = [](double x, double y) {
    if (in_box2(x, y, 0.95, 1.10, 0.30, 0.45)) return 2e3;
    if (in_box2(x, y, 3.00, 3.15, 0.75, 0.90)) return -1e3;
    if (in_box2(x, y, 4.25, 4.40, 0.25, 0.40)) return -1e3;
    return 0.0;
  };
  return p;
}

ParamProblem two_term_problem() {
  ParamProblem p;
  p.domain = {0, 0, 1, 1};
  p.p_lo = Eigen::VectorXd::Constant(1, 0.1);
  p.p_hi = Eigen::VectorXd::Constant(1, 1.0);
  p.theta = {ThetaAffine{1.0, Eigen::VectorXd::Zero(1)},
             ThetaAffine{1.0, -Eigen::VectorXd::Ones(1)}};
  p.kappa = {[](double, double) { return 1.0; },
             [](double x, double y) {
               const bool on = in_box2(x, y, 0.25, 0.75, 0.25, 0.75) || in_box2(x, y, 0.0, 0.25, 0.75, 1.0);
               return on ? 3.0 : 0.0;
             }};
  p.source = [](double x, double y) { return (x < 0.5 && y < 0.5) ? 1.0 : 0.0; };
  return p;
}

}  // namespace lrbms
