#pragma once

// Shared builders and dense oracles for the test suites.

#include <Eigen/Dense>

#include "lrbms/enrich.hpp"
#include "lrbms/errest.hpp"
#include "lrbms/errors.hpp"
#include "lrbms/fom.hpp"
#include "lrbms/forms.hpp"
#include "lrbms/greedy.hpp"
#include "lrbms/problem.hpp"
#include "lrbms/random.hpp"
#include "lrbms/rangefinder.hpp"
#include "lrbms/rom.hpp"
#include "lrbms/transfer.hpp"

namespace ts {

using namespace lrbms;

struct Instance {
  ParamProblem problem;
  FineGrid grid;
  DomainDecomposition dd;
  BlockSpace space;
  ProblemData data;
};

inline Instance make_instance(ParamProblem problem, int nx, int ny, int mx, int my, SpaceKind kind) {
  Instance inst;
  inst.problem = std::move(problem);
  inst.grid = build_grid(inst.problem.domain, nx, ny);
  inst.dd = decompose(inst.grid, mx, my);
  inst.space = build_block_space(inst.grid, inst.dd, kind);
  inst.data = sample_problem(inst.problem, inst.grid);
  return inst;
}

inline Eigen::VectorXd mu1(double v) { return Eigen::VectorXd::Constant(1, v); }

inline Eigen::VectorXd random_mu(const ParamProblem& problem, NormalStream& rng) {
  Eigen::VectorXd mu(problem.p_lo.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    mu[i] = problem.p_lo[i] + (problem.p_hi[i] - problem.p_lo[i]) * rng.uniform();
  return mu;
}

inline double max_abs(const Eigen::SparseMatrix<double>& A) {
  double m = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace ts
