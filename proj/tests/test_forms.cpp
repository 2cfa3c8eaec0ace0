#include <doctest.h>

#include "test_support.hpp"

using namespace lrbms;

TEST_CASE("theta evaluation on the channel model") {
  const ParamProblem p = channel_problem();
  CHECK(theta_eval(p, ts::mu1(1.0))[0] == doctest::Approx(1.0));
  CHECK(theta_eval(p, ts::mu1(1.0))[1] == doctest::Approx(0.0));
  CHECK(theta_eval(p, ts::mu1(0.1))[1] == doctest::Approx(0.9));
  CHECK_THROWS_AS(theta_eval(p, ts::mu1(2.0)), parameter_error);
}

TEST_CASE("two-cell Neumann Laplacian annihilates constants") {
  ParamProblem p = manufactured_problem();
  p.bc = BoundaryKind::Neumann;
  auto inst = ts::make_instance(p, 2, 1, 1, 1, SpaceKind::DG);
  const AffineOperator op = assemble_affine_fom(inst.problem, inst.data, inst.grid, inst.dd, inst.space, 4.0);
  const Eigen::SparseMatrix<double> A = op.combine(inst.problem, ts::mu1(0.5));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(inst.space.dim);
  CHECK((A * ones).lpNorm<Eigen::Infinity>() <= 1e-13 * ts::max_abs(A));
  const Eigen::SparseMatrix<double> asym = A - Eigen::SparseMatrix<double>(A.transpose());
  CHECK(ts::max_abs(asym) <= 1e-13 * ts::max_abs(A));
}

TEST_CASE("combined matrix is symmetric positive definite over the box") {
  for (SpaceKind kind : {SpaceKind::CG, SpaceKind::DG}) {
    auto inst = ts::make_instance(two_term_problem(), 4, 4, 2, 2, kind);
    const AffineOperator op = assemble_affine_fom(inst.problem, inst.data, inst.grid, inst.dd, inst.space, 16.0);
    const InnerProduct vh = assemble_product(inst.grid, inst.dd, inst.space, ProductKind::Vh);
    NormalStream rng(2);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd mu = ts::random_mu(inst.problem, rng);
      const Eigen::SparseMatrix<double> A = op.combine(inst.problem, mu);
      const Eigen::SparseMatrix<double> asym = A - Eigen::SparseMatrix<double>(A.transpose());
      CHECK(ts::max_abs(asym) <= 1e-12 * ts::max_abs(A));
      const CoercivityBounds cb =
          coercivity_oracle(A, with_dirichlet_rows(vh.M, op.dirichlet_dofs), op.dirichlet_dofs);
      CHECK(cb.alpha > 0.0);
      CHECK(cb.gamma >= cb.alpha);
    }
  }
}

TEST_CASE("single-subdomain DG equals the block-decomposed assembly up to permutation") {
  auto one = ts::make_instance(two_term_problem(), 8, 8, 1, 1, SpaceKind::DG);
  auto four = ts::make_instance(two_term_problem(), 8, 8, 2, 2, SpaceKind::DG);
  const AffineOperator op1 = assemble_affine_fom(one.problem, one.data, one.grid, one.dd, one.space);
  const AffineOperator op4 = assemble_affine_fom(four.problem, four.data, four.grid, four.dd, four.space);
  const Eigen::VectorXd mu = ts::mu1(0.37);
  const Eigen::MatrixXd A1(op1.combine(one.problem, mu));
  const Eigen::MatrixXd A4(op4.combine(four.problem, mu));

  // permutation via the shared cell enumeration (4 dofs per cell)
  std::vector<int> perm(one.space.dim);
  for (int c = 0; c < one.grid.n_cells(); ++c) {
    const auto d1 = one.space.cell_dofs[c];
    const auto d4 = four.space.cell_dofs[c];
    for (int k = 0; k < 4; ++k) perm[d1[k]] = d4[k];
  }
  double worst = 0.0;
  for (int i = 0; i < one.space.dim; ++i)
    for (int j = 0; j < one.space.dim; ++j) worst = std::max(worst, std::abs(A1(i, j) - A4(perm[i], perm[j])));
  CHECK(worst <= 1e-12 * A1.cwiseAbs().maxCoeff());

  const Eigen::VectorXd F1 = op1.F;
  double worst_f = 0.0;
  for (int i = 0; i < one.space.dim; ++i) worst_f = std::max(worst_f, std::abs(F1[i] - op4.F[perm[i]]));
  CHECK(worst_f <= 1e-14);
}

TEST_CASE("coupling blocks only between neighbors") {
  auto inst = ts::make_instance(two_term_problem(), 6, 6, 3, 3, SpaceKind::DG);
  const AffineOperator op = assemble_affine_fom(inst.problem, inst.data, inst.grid, inst.dd, inst.space);
  for (const auto& A : op.A)
    for (int k = 0; k < A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
        const int mr = inst.space.block_of(static_cast<int>(it.row()));
        const int mc = inst.space.block_of(static_cast<int>(it.col()));
        if (mr == mc) continue;
        CHECK(inst.dd.interface_between(mr, mc) >= 0);
      }
}

TEST_CASE("source assembly") {
  auto inst = ts::make_instance(manufactured_problem(), 1, 1, 1, 1, SpaceKind::DG);
  SUBCASE("constant source gives quarter weights") {
    inst.data.source.setOnes();
    const Eigen::VectorXd F = assemble_rhs(inst.data, inst.grid, inst.dd, inst.space, whole_region(inst.space));
    for (int k = 0; k < 4; ++k) CHECK(F[k] == doctest::Approx(0.25));
  }
  SUBCASE("zero source gives the zero functional") {
    inst.data.source.setZero();
    const Eigen::VectorXd F = assemble_rhs(inst.data, inst.grid, inst.dd, inst.space, whole_region(inst.space));
    CHECK(F.norm() == 0.0);
  }
}

TEST_CASE("channel source boxes balance exactly on an aligned grid") {
  auto inst = ts::make_instance(channel_problem(), 500, 100, 25, 5, SpaceKind::DG);
  const Eigen::VectorXd F = assemble_rhs(inst.data, inst.grid, inst.dd, inst.space, whole_region(inst.space));
  const double expected = 2e3 * (0.15 * 0.15) - 1e3 * (0.15 * 0.15) * 2;  // = 0
  CHECK(F.sum() == doctest::Approx(expected).epsilon(1e-10));
  CHECK(std::abs(F.sum()) <= 1e-10);
}

TEST_CASE("nonpositive penalty constant is rejected") {
  auto inst = ts::make_instance(manufactured_problem(), 2, 2, 1, 1, SpaceKind::DG);
  CHECK_THROWS_AS(penalty_weights(inst.problem, inst.data, inst.grid, 0.0), config_error);
}

TEST_CASE("penalty weights follow the reference field") {
  auto inst = ts::make_instance(channel_problem(), 100, 20, 25, 5, SpaceKind::DG);
  const Eigen::VectorXd w = penalty_weights(inst.problem, inst.data, inst.grid, 16.0);
  const Eigen::VectorXd kref = inst.data.kappa_at(theta_eval(inst.problem, inst.problem.center()));
  for (int f = 0; f < inst.grid.n_faces(); f += 37) {
    const Face& face = inst.grid.faces[f];
    double k = kref[face.cell_plus];
    if (face.cell_minus >= 0) k = std::max(k, kref[face.cell_minus]);
    CHECK(w[f] == doctest::Approx(16.0 * k));
  }
}
