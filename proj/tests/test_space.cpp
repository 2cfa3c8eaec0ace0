#include <doctest.h>

#include "test_support.hpp"

using namespace lrbms;

namespace {
ts::Instance unit_cell(SpaceKind kind) {
  return ts::make_instance(manufactured_problem(), 1, 1, 1, 1, kind);
}
}  // namespace

TEST_CASE("block space dimensions") {
  CHECK(unit_cell(SpaceKind::CG).space.dim == 4);
  CHECK(unit_cell(SpaceKind::DG).space.dim == 4);

  auto inst = ts::make_instance(channel_problem(), 500, 100, 25, 5, SpaceKind::CG);
  CHECK(inst.space.locals[0].dim == 441);  // 21 x 21 vertices per subdomain
  CHECK(inst.space.dim == 125 * 441);
}

TEST_CASE("evaluate constants and linears") {
  for (SpaceKind kind : {SpaceKind::CG, SpaceKind::DG}) {
    auto inst = ts::make_instance(manufactured_problem(), 4, 4, 2, 2, kind);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(inst.space.dim);
    const PointValue pv = evaluate(inst.grid, inst.dd, inst.space, ones, 0.3, 0.7);
    CHECK(pv.value == doctest::Approx(1.0));
    CHECK(pv.gradient[0] == doctest::Approx(0.0));
    CHECK(pv.gradient[1] == doctest::Approx(0.0));

    // interpolant of u = x
    Eigen::VectorXd ux(inst.space.dim);
    for (int c = 0; c < inst.grid.n_cells(); ++c) {
      const auto cv = inst.grid.cell_vertices(c);
      const auto cd = inst.space.cell_dofs[c];
      for (int k = 0; k < 4; ++k) ux[cd[k]] = inst.grid.vertex_xy(cv[k])[0];
    }
    const PointValue px = evaluate(inst.grid, inst.dd, inst.space, ux, 0.6, 0.4);
    CHECK(px.value == doctest::Approx(0.6));
    CHECK(px.gradient[0] == doctest::Approx(1.0));
    CHECK(px.gradient[1] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("cell-center value is the corner mean") {
  auto inst = unit_cell(SpaceKind::DG);
  NormalStream rng(3);
  const Eigen::VectorXd u = rng.normal_vector(4);
  const PointValue pv = evaluate(inst.grid, inst.dd, inst.space, u, 0.5, 0.5);
  CHECK(pv.value == doctest::Approx(u.mean()));
}

TEST_CASE("unit-cell L2 product matches the exact Q1 mass matrix") {
  auto inst = unit_cell(SpaceKind::DG);
  const InnerProduct ip = assemble_product(inst.grid, inst.dd, inst.space, ProductKind::L2);
  const Eigen::MatrixXd M(ip.M);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const int shared = (a == b) ? 2 : ((a ^ b) == 3 ? 0 : 1);
      const double expect = shared == 2 ? 1.0 / 9.0 : shared == 1 ? 1.0 / 18.0 : 1.0 / 36.0;
      CHECK(M(a, b) == doctest::Approx(expect));
    }
}

TEST_CASE("Vh product annihilates constants") {
  for (SpaceKind kind : {SpaceKind::CG, SpaceKind::DG}) {
    auto inst = ts::make_instance(manufactured_problem(), 4, 4, 2, 2, kind);
    const InnerProduct ip = assemble_product(inst.grid, inst.dd, inst.space, ProductKind::Vh);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(inst.space.dim);
    if (kind == SpaceKind::CG) {
      CHECK(quad_norm(ip.M, ones) <= 1e-7);  // seminorm kernel, up to roundoff
    } else {
      // DG includes boundary penalties: the constant scores its boundary trace
      CHECK(quad_norm(ip.M, ones) > 0.0);
    }
  }
}

TEST_CASE("unit jump across one face scores h^-1 h = 1") {
  auto inst = ts::make_instance(manufactured_problem(), 2, 1, 2, 1, SpaceKind::CG);
  const InnerProduct ip = assemble_product(inst.grid, inst.dd, inst.space, ProductKind::Vh);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(inst.space.dim);
  u.segment(inst.space.offsets[0], inst.space.locals[0].dim).setOnes();
  // piecewise constant (1, 0): no broken gradient, one unit jump on the interface
  CHECK(u.dot(ip.M * u) == doctest::Approx(1.0));
}

TEST_CASE("products are positive semidefinite on random vectors") {
  auto inst = ts::make_instance(two_term_problem(), 4, 4, 2, 2, SpaceKind::DG);
  const Eigen::VectorXd mu_bar = inst.problem.center();
  const InnerProduct vh = assemble_product(inst.grid, inst.dd, inst.space, ProductKind::Vh);
  const InnerProduct l2 = assemble_product(inst.grid, inst.dd, inst.space, ProductKind::L2);
  const InnerProduct en =
      assemble_product(inst.grid, inst.dd, inst.space, ProductKind::Energy, &inst.problem, &mu_bar);
  NormalStream rng(11);
  for (int trial = 0; trial < 10000; ++trial) {
    const Eigen::VectorXd x = rng.normal_vector(inst.space.dim);
    CHECK(x.dot(vh.M * x) >= 0.0);
    CHECK(x.dot(l2.M * x) > 0.0);
    CHECK(x.dot(en.M * x) >= 0.0);
  }
  const Eigen::SparseMatrix<double> asym = vh.M - Eigen::SparseMatrix<double>(vh.M.transpose());
  CHECK(ts::max_abs(asym) <= 1e-12 * ts::max_abs(vh.M));
}

TEST_CASE("CG blocks are conforming: shared vertices share dofs") {
  auto inst = ts::make_instance(manufactured_problem(), 4, 4, 2, 2, SpaceKind::CG);
  for (int m = 0; m < inst.dd.n_subdomains(); ++m)
    for (int f : inst.dd.interior_faces[m]) {
      const Face& face = inst.grid.faces[f];
      const auto cvp = inst.grid.cell_vertices(face.cell_plus);
      const auto cvm = inst.grid.cell_vertices(face.cell_minus);
      const auto cdp = inst.space.cell_dofs[face.cell_plus];
      const auto cdm = inst.space.cell_dofs[face.cell_minus];
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          if (cvp[a] == cvm[b]) CHECK(cdp[a] == cdm[b]);
    }
}

TEST_CASE("region restriction round trip") {
  auto inst = ts::make_instance(manufactured_problem(), 6, 6, 3, 3, SpaceKind::DG);
  const Region region = make_region(inst.space, {1, 4, 5});
  NormalStream rng(7);
  const Eigen::VectorXd g = rng.normal_vector(inst.space.dim);
  const Eigen::VectorXd r = restrict_to_region(inst.space, region, g);
  Eigen::VectorXd back = Eigen::VectorXd::Zero(inst.space.dim);
  scatter_from_region(inst.space, region, r, back);
  for (int m : region.subs)
    CHECK((back.segment(inst.space.offsets[m], inst.space.locals[m].dim) -
           g.segment(inst.space.offsets[m], inst.space.locals[m].dim))
              .norm() == 0.0);
  CHECK(back.segment(inst.space.offsets[0], inst.space.locals[0].dim).norm() == 0.0);

  // the whole-space region reproduces the global numbering
  const Region whole = whole_region(inst.space);
  CHECK(whole.dim == inst.space.dim);
  CHECK(whole.dof(inst.space, 4, 7) == inst.space.offsets[4] + 7);
}
