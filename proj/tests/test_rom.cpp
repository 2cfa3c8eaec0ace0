#include <doctest.h>

#include <sstream>

#include "test_support.hpp"

using namespace lrbms;

namespace {

struct RomFixture {
  ts::Instance inst;
  AffineOperator op;
  InnerProduct vh;
  std::unique_ptr<RomState> rom;

  explicit RomFixture(int nx = 8, int mx = 2, SpaceKind kind = SpaceKind::DG)
      : inst(ts::make_instance(two_term_problem(), nx, nx, mx, mx, kind)),
        op(assemble_affine_fom(inst.problem, inst.data, inst.grid, inst.dd, inst.space)),
        vh(assemble_product(inst.grid, inst.dd, inst.space, ProductKind::Vh)) {
    rom = std::make_unique<RomState>(op, inst.problem, inst.grid, inst.dd, inst.space, vh.M);
  }

  void full_bases() {
    for (int m = 0; m < rom->n_subdomains(); ++m)
      for (int l = 0; l < inst.space.locals[m].dim; ++l) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(inst.space.locals[m].dim);
        e[l] = 1.0;
        rom->extend_basis(m, e);
      }
  }
};

}  // namespace

TEST_CASE("full bases reproduce the FOM") {
  RomFixture fx;
  fx.full_bases();
  NormalStream rng(23);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::VectorXd mu = ts::random_mu(fx.inst.problem, rng);
    const FomSolution fom = solve_fom(fx.op, fx.inst.problem, mu);
    const Eigen::VectorXd u_rom = fx.rom->reconstruct(fx.rom->solve(mu));
    CHECK(quad_norm(fx.vh.M, u_rom - fom.u) <= 1e-8 * std::max(1e-30, quad_norm(fx.vh.M, fom.u)));
  }
}

TEST_CASE("block projection agrees with the dense congruence") {
  RomFixture fx;
  fx.full_bases();
  const Eigen::VectorXd mu = ts::mu1(0.3);
  const Eigen::MatrixXd A_red = fx.rom->reduced_matrix(mu);
  const Eigen::MatrixXd A_fom(fx.op.combine(fx.inst.problem, mu));
  Eigen::MatrixXd Ball = Eigen::MatrixXd::Zero(fx.inst.space.dim, fx.rom->total_size());
  const auto off = fx.rom->reduced_offsets();
  for (int m = 0; m < fx.rom->n_subdomains(); ++m)
    Ball.block(fx.inst.space.offsets[m], off[m], fx.inst.space.locals[m].dim, fx.rom->basis_size(m)) =
        fx.rom->basis(m);
  const Eigen::MatrixXd oracle = Ball.transpose() * A_fom * Ball;
  CHECK((A_red - oracle).cwiseAbs().maxCoeff() <= 1e-10 * A_fom.cwiseAbs().maxCoeff());
  CHECK((fx.rom->reduced_rhs() - Ball.transpose() * fx.op.F).norm() <= 1e-12 * fx.op.F.norm());
}

TEST_CASE("single-vector bases give Rayleigh quotient diagonal blocks") {
  RomFixture fx;
  for (int m = 0; m < fx.rom->n_subdomains(); ++m)
    fx.rom->extend_basis(m, Eigen::VectorXd::Ones(fx.inst.space.locals[m].dim));
  const Eigen::VectorXd mu = ts::mu1(0.5);
  for (int m = 0; m < fx.rom->n_subdomains(); ++m) {
    const Eigen::VectorXd b = fx.rom->basis(m).col(0);
    double expect = 0.0;
    for (std::size_t q = 0; q < fx.op.A.size(); ++q)
      expect += fx.op.theta_values(fx.inst.problem, mu)[q] *
                b.dot(operator_block(fx.op.A[q], fx.inst.space, m, m) * b);
    const auto off = fx.rom->reduced_offsets();
    CHECK(fx.rom->reduced_matrix(mu)(off[m], off[m]) == doctest::Approx(expect));
  }
}

TEST_CASE("zero source solves to zero") {
  RomFixture fx;
  fx.inst.data.source.setZero();
  const AffineOperator op0 =
      assemble_affine_fom(fx.inst.problem, fx.inst.data, fx.inst.grid, fx.inst.dd, fx.inst.space);
  RomState rom(op0, fx.inst.problem, fx.inst.grid, fx.inst.dd, fx.inst.space, fx.vh.M);
  seed_macro_q1(rom, fx.inst.grid);
  CHECK(rom.solve(ts::mu1(0.5)).norm() == 0.0);
  CHECK(rom.reconstruct(rom.solve(ts::mu1(0.5))).norm() == 0.0);
}

TEST_CASE("reconstruct maps unit coefficients to basis columns") {
  RomFixture fx;
  seed_macro_q1(*fx.rom, fx.inst.grid);
  const auto off = fx.rom->reduced_offsets();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(fx.rom->total_size());
  e[off[1]] = 1.0;
  const Eigen::VectorXd u = fx.rom->reconstruct(e);
  CHECK((u.segment(fx.inst.space.offsets[1], fx.inst.space.locals[1].dim) - fx.rom->basis(1).col(0)).norm() == 0.0);
  CHECK(u.segment(fx.inst.space.offsets[0], fx.inst.space.locals[0].dim).norm() == 0.0);
}

TEST_CASE("hand-checked two-block system") {
  // one basis vector per block; solve the 2x2 system by hand
  auto inst = ts::make_instance(two_term_problem(), 4, 4, 2, 1, SpaceKind::DG);
  const AffineOperator op = assemble_affine_fom(inst.problem, inst.data, inst.grid, inst.dd, inst.space);
  const InnerProduct vh = assemble_product(inst.grid, inst.dd, inst.space, ProductKind::Vh);
  RomState rom(op, inst.problem, inst.grid, inst.dd, inst.space, vh.M);
  NormalStream rng(41);
  rom.extend_basis(0, rng.normal_vector(inst.space.locals[0].dim));
  rom.extend_basis(1, rng.normal_vector(inst.space.locals[1].dim));
  const Eigen::VectorXd mu = ts::mu1(0.6);
  const Eigen::MatrixXd A = rom.reduced_matrix(mu);
  const Eigen::VectorXd F = rom.reduced_rhs();
  const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  const Eigen::Vector2d by_hand((F[0] * A(1, 1) - F[1] * A(0, 1)) / det,
                                (A(0, 0) * F[1] - A(1, 0) * F[0]) / det);
  CHECK((rom.solve(mu) - by_hand).norm() <= 1e-12 * by_hand.norm());
}

TEST_CASE("Galerkin residual is orthogonal to the reduced space") {
  RomFixture fx;
  seed_macro_q1(*fx.rom, fx.inst.grid);
  const Eigen::VectorXd mu = ts::mu1(0.45);
  const Eigen::VectorXd U = fx.rom->solve(mu);
  const Eigen::VectorXd residual =
      fx.op.F - fx.op.combine(fx.inst.problem, mu) * fx.rom->reconstruct(U);
  const double scale = fx.op.F.lpNorm<Eigen::Infinity>();
  for (int m = 0; m < fx.rom->n_subdomains(); ++m) {
    const Eigen::VectorXd r_m = residual.segment(fx.inst.space.offsets[m], fx.inst.space.locals[m].dim);
    CHECK((fx.rom->basis(m).transpose() * r_m).lpNorm<Eigen::Infinity>() <= 1e-9 * scale);
  }
}

TEST_CASE("projection round trip matches the product-orthogonal projection") {
  RomFixture fx;
  seed_macro_q1(*fx.rom, fx.inst.grid);
  NormalStream rng(29);
  const Eigen::VectorXd u = rng.normal_vector(fx.inst.space.dim);
  // blockwise orthogonal projection in the local products
  Eigen::VectorXd proj = Eigen::VectorXd::Zero(fx.inst.space.dim);
  for (int m = 0; m < fx.rom->n_subdomains(); ++m) {
    const Eigen::MatrixXd& B = fx.rom->basis(m);
    const Eigen::VectorXd um = u.segment(fx.inst.space.offsets[m], fx.inst.space.locals[m].dim);
    proj.segment(fx.inst.space.offsets[m], fx.inst.space.locals[m].dim) =
        B * (B.transpose() * (fx.rom->local_product(m) * um));
  }
  // reconstruct(project(u)) with the same convention
  Eigen::VectorXd red(fx.rom->total_size());
  const auto off = fx.rom->reduced_offsets();
  for (int m = 0; m < fx.rom->n_subdomains(); ++m) {
    const Eigen::VectorXd um = u.segment(fx.inst.space.offsets[m], fx.inst.space.locals[m].dim);
    red.segment(off[m], fx.rom->basis_size(m)) = fx.rom->basis(m).transpose() * (fx.rom->local_product(m) * um);
  }
  CHECK((fx.rom->reconstruct(red) - proj).norm() <= 1e-12 * proj.norm());
}

TEST_CASE("extend_basis rejects dependent vectors and updates locally") {
  RomFixture fx;
  seed_macro_q1(*fx.rom, fx.inst.grid);
  // duplicate of an existing basis vector is rejected
  CHECK_FALSE(fx.rom->extend_basis(1, fx.rom->basis(1).col(0)));
  CHECK_FALSE(fx.rom->extend_basis(1, Eigen::VectorXd::Ones(fx.inst.space.locals[1].dim)));

  // snapshot the far blocks, then extend subdomain 0
  const int far = 3;  // diagonal corner, not adjacent to 0 in a 2x2 layout
  std::vector<Eigen::MatrixXd> before;
  for (std::size_t q = 0; q < fx.op.A.size(); ++q) before.push_back(fx.rom->block(q, far, far));
  NormalStream rng(31);
  CHECK(fx.rom->extend_basis(0, rng.normal_vector(fx.inst.space.locals[0].dim)));
  for (std::size_t q = 0; q < fx.op.A.size(); ++q) {
    const Eigen::MatrixXd& after = fx.rom->block(q, far, far);
    REQUIRE(after.rows() == before[q].rows());
    CHECK((after - before[q]).cwiseAbs().maxCoeff() == 0.0);  // bit-identical
  }
  CHECK(fx.rom->basis_size(0) == 5);
}

TEST_CASE("nested bases never increase the best-approximation error") {
  RomFixture fx;
  seed_macro_q1(*fx.rom, fx.inst.grid);
  const Eigen::VectorXd mu = ts::mu1(0.35);
  const FomSolution fom = solve_fom(fx.op, fx.inst.problem, mu);
  const auto proj_error = [&] {
    double err2 = 0.0;
    for (int m = 0; m < fx.rom->n_subdomains(); ++m) {
      const Eigen::MatrixXd& B = fx.rom->basis(m);
      const Eigen::VectorXd um = fom.u.segment(fx.inst.space.offsets[m], fx.inst.space.locals[m].dim);
      const Eigen::VectorXd d = um - B * (B.transpose() * (fx.rom->local_product(m) * um));
      err2 += d.dot(fx.rom->local_product(m) * d);
    }
    return std::sqrt(err2);
  };
  const double before = proj_error();
  NormalStream rng(37);
  for (int m = 0; m < fx.rom->n_subdomains(); ++m)
    fx.rom->extend_basis(m, rng.normal_vector(fx.inst.space.locals[m].dim));
  CHECK(proj_error() <= before * (1 + 1e-12));

  // inserting the FOM snapshot itself drives the projection error to zero
  fx.rom->insert_global_snapshot(fom.u);
  CHECK(proj_error() <= 1e-8 * quad_norm(fx.vh.M, fom.u));
}

TEST_CASE("Galerkin error is within the stability factor of the best approximation") {
  RomFixture fx;
  seed_macro_q1(*fx.rom, fx.inst.grid);
  const Eigen::VectorXd mu = ts::mu1(0.25);
  const Eigen::SparseMatrix<double> A = fx.op.combine(fx.inst.problem, mu);
  const CoercivityBounds cb = coercivity_oracle(A, fx.vh.M, fx.op.dirichlet_dofs);
  const FomSolution fom = solve_fom(fx.op, fx.inst.problem, mu);
  const Eigen::VectorXd u_rom = fx.rom->reconstruct(fx.rom->solve(mu));

  // best approximation in the Vh norm over the product space (dense projection)
  Eigen::MatrixXd Ball = Eigen::MatrixXd::Zero(fx.inst.space.dim, fx.rom->total_size());
  const auto off = fx.rom->reduced_offsets();
  for (int m = 0; m < fx.rom->n_subdomains(); ++m)
    Ball.block(fx.inst.space.offsets[m], off[m], fx.inst.space.locals[m].dim, fx.rom->basis_size(m)) =
        fx.rom->basis(m);
  const Eigen::MatrixXd MV(fx.vh.M);
  const Eigen::MatrixXd G = Ball.transpose() * MV * Ball;
  const Eigen::VectorXd c = G.ldlt().solve(Ball.transpose() * (MV * fom.u));
  const double best = quad_norm(fx.vh.M, fom.u - Ball * c);
  const double galerkin = quad_norm(fx.vh.M, fom.u - u_rom);
  CHECK(galerkin <= (cb.gamma / cb.alpha) * best * (1 + 1e-9));
}

TEST_CASE("text dump lists every stored block") {
  RomFixture fx(4, 2);
  seed_macro_q1(*fx.rom, fx.inst.grid);
  std::ostringstream os;
  fx.rom->dump(os);
  const std::string s = os.str();
  CHECK(s.find("reduced model dump v1") == 0);
  CHECK(s.find("subdomains,4") != std::string::npos);
  CHECK(s.find("BLOCK,q=0,m=0,n=0") != std::string::npos);
  CHECK(s.find("BLOCK,q=2,m=3,n=3") != std::string::npos);
  CHECK(s.find("RHS,m=0") != std::string::npos);
  // round-trip stability of the header line count: 4 subdomains, 3 terms,
  // diagonal plus 8 directed neighbor pairs = 12 blocks per term
  int blocks = 0;
  for (std::size_t pos = s.find("BLOCK"); pos != std::string::npos; pos = s.find("BLOCK", pos + 1)) ++blocks;
  CHECK(blocks == 3 * 12);
}
