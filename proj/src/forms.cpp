#include "lrbms/forms.hpp"

#include <Eigen/Sparse>
#include <array>
#include <set>

#include "assembly_detail.hpp"
#include "lrbms/errors.hpp"
#include "q1.hpp"

namespace lrbms {

namespace detail {

// D[i][j] = -int_sigma {kappa grad phi_i . n} [phi_j]; caller adds D + D^T.
void consistency_triplets(const FineGrid& grid, const BlockSpace& space, const Region& region,
                          const DomainDecomposition& dd, int f, const Eigen::VectorXd& kappa,
                          std::vector<Eigen::Triplet<double>>& out) {
  const Face& face = grid.faces[f];
  const bool plus_in = region.contains(dd.subdomain_of_cell(face.cell_plus));
  const bool minus_in = face.cell_minus >= 0 && region.contains(dd.subdomain_of_cell(face.cell_minus));
  const bool two_sided = plus_in && minus_in;
  const int cp = plus_in ? face.cell_plus : face.cell_minus;  // in-region trace carrier
  const int out_sign = plus_in ? face.sign : -face.sign;      // outward for one-sided faces
  const int nd = two_sided ? 8 : 4;
  const double kp = kappa[cp];
  const double km = two_sided ? kappa[face.cell_minus] : 0.0;
  if (kp == 0.0 && km == 0.0) return;

  const int mp = dd.subdomain_of_cell(cp);
  std::array<int, 8> dofs{};
  const auto dp = space.cell_dofs[cp];
  for (int k = 0; k < 4; ++k) dofs[k] = region.dof(space, mp, dp[k] - space.offsets[mp]);
  const auto side_p = detail::face_side(grid, face, cp);
  q1::FaceSide side_m{};
  if (two_sided) {
    const int mm = dd.subdomain_of_cell(face.cell_minus);
    const auto dm = space.cell_dofs[face.cell_minus];
    for (int k = 0; k < 4; ++k) dofs[4 + k] = region.dof(space, mm, dm[k] - space.offsets[mm]);
    side_m = detail::face_side(grid, face, face.cell_minus);
  }

  Eigen::Matrix<double, 8, 8> D = Eigen::Matrix<double, 8, 8>::Zero();
  const double hcell[2] = {grid.hx, grid.hy};
  for (double t : q1::kGauss2) {
    Eigen::Matrix<double, 8, 1> mean_flux = Eigen::Matrix<double, 8, 1>::Zero();
    Eigen::Matrix<double, 8, 1> jump = Eigen::Matrix<double, 8, 1>::Zero();
    const auto pp = side_p.point(t);
    const double half = two_sided ? 0.5 : 1.0;
    for (int k = 0; k < 4; ++k) {
      jump[k] = q1::shape(k, pp[0], pp[1]);
      const auto g = q1::shape_grad(k, pp[0], pp[1], hcell[0], hcell[1]);
      mean_flux[k] = half * kp * out_sign * g[face.axis];
    }
    if (two_sided) {
      const auto pm = side_m.point(t);
      for (int k = 0; k < 4; ++k) {
        jump[4 + k] = -q1::shape(k, pm[0], pm[1]);
        const auto g = q1::shape_grad(k, pm[0], pm[1], hcell[0], hcell[1]);
        mean_flux[4 + k] = 0.5 * km * face.sign * g[face.axis];
      }
    }
    D -= (0.5 * face.h) * mean_flux * jump.transpose();
  }
  for (int a = 0; a < nd; ++a)
    for (int b = 0; b < nd; ++b) {
      const double v = D(a, b) + D(b, a);
      if (v != 0.0) out.emplace_back(dofs[a], dofs[b], v);
    }
}

}  // namespace detail

namespace {

std::vector<Eigen::Triplet<double>> constrain(const std::vector<Eigen::Triplet<double>>& trip,
                                              const std::vector<char>& fixed, bool identity_diag) {
  std::vector<Eigen::Triplet<double>> out;
  out.reserve(trip.size());
  for (const auto& t : trip)
    if (!fixed[t.row()] && !fixed[t.col()]) out.push_back(t);
  if (identity_diag)
    for (int d = 0; d < static_cast<int>(fixed.size()); ++d)
      if (fixed[d]) out.emplace_back(d, d, 1.0);
  return out;
}

}  // namespace

Eigen::VectorXd AffineOperator::theta_values(const ParamProblem& problem, const Eigen::VectorXd& mu) const {
  const Eigen::VectorXd t = theta_eval(problem, mu);
  Eigen::VectorXd out(t.size() + 1);
  out.head(t.size()) = t;
  out[t.size()] = 1.0;
  return out;
}

Eigen::SparseMatrix<double> AffineOperator::combine(const ParamProblem& problem, const Eigen::VectorXd& mu) const {
  const Eigen::VectorXd t = theta_values(problem, mu);
  Eigen::SparseMatrix<double> out = t[0] * A[0];
  for (int q = 1; q < static_cast<int>(A.size()); ++q) out += t[q] * A[q];
  return out;
}

Eigen::SparseMatrix<double> AffineOperator::combine_volume(const ParamProblem& problem,
                                                           const Eigen::VectorXd& mu) const {
  const Eigen::VectorXd t = theta_eval(problem, mu);
  Eigen::SparseMatrix<double> out = t[0] * A_vol[0];
  for (int q = 1; q < static_cast<int>(A_vol.size()); ++q) out += t[q] * A_vol[q];
  return out;
}

Eigen::VectorXd penalty_weights(const ParamProblem& problem, const ProblemData& data, const FineGrid& grid,
                                double c_pen) {
  if (c_pen <= 0.0) throw config_error("penalty constant must be positive");
  const Eigen::VectorXd kref = data.kappa_at(theta_eval(problem, problem.center()));
  Eigen::VectorXd w(grid.n_faces());
  for (int f = 0; f < grid.n_faces(); ++f) {
    const Face& face = grid.faces[f];
    double k = kref[face.cell_plus];
    if (face.cell_minus >= 0) k = std::max(k, kref[face.cell_minus]);
    w[f] = c_pen * k;
  }
  return w;
}

Eigen::VectorXd assemble_rhs(const ProblemData& data, const FineGrid& grid, const DomainDecomposition& dd,
                             const BlockSpace& space, const Region& region) {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(region.dim);
  const Eigen::Vector4d local = q1::load(grid.hx, grid.hy);
  for (int m : region.subs)
    for (int c : dd.cells_of(m)) {
      const double q = data.source[c];
      if (q == 0.0) continue;
      const auto dp = space.cell_dofs[c];
      for (int k = 0; k < 4; ++k) F[region.dof(space, m, dp[k] - space.offsets[m])] += q * local[k];
    }
  return F;
}

std::vector<int> dirichlet_vertex_dofs(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                                       const Region& region) {
  std::set<int> dofs;
  for (int m : region.subs) {
    const LocalSpace& ls = space.locals[m];
    for (int jv = ls.cy0; jv <= ls.cy0 + ls.cny; ++jv)
      for (int iv = ls.cx0; iv <= ls.cx0 + ls.cnx; ++iv) {
        if (iv != 0 && iv != grid.nx && jv != 0 && jv != grid.ny) continue;
        const int local = (jv - ls.cy0) * (ls.cnx + 1) + (iv - ls.cx0);
        dofs.insert(region.dof(space, m, local));
      }
  }
  return {dofs.begin(), dofs.end()};
}

AffineOperator assemble_affine_fom(const ParamProblem& problem, const ProblemData& data, const FineGrid& grid,
                                   const DomainDecomposition& dd, const BlockSpace& space, double c_pen) {
  AffineOperator op;
  op.kind = space.kind;
  op.c_pen = c_pen;
  op.region = whole_region(space);
  op.theta = problem.theta;
  op.theta.push_back(ThetaAffine{1.0, Eigen::VectorXd::Zero(problem.p_lo.size())});
  const int Qa = problem.n_terms();
  const Eigen::VectorXd w = penalty_weights(problem, data, grid, c_pen);

  // jump-bearing faces: interfaces always, everything else only for DG
  std::vector<int> jump_faces;
  for (const auto& gamma : dd.interfaces) jump_faces.insert(jump_faces.end(), gamma.faces.begin(), gamma.faces.end());
  if (space.kind == SpaceKind::DG) {
    for (int m = 0; m < dd.n_subdomains(); ++m) {
      jump_faces.insert(jump_faces.end(), dd.interior_faces[m].begin(), dd.interior_faces[m].end());
      if (problem.bc == BoundaryKind::Dirichlet)
        jump_faces.insert(jump_faces.end(), dd.boundary_faces[m].begin(), dd.boundary_faces[m].end());
    }
  }

  std::vector<std::vector<Eigen::Triplet<double>>> trip(Qa + 1);
  std::vector<std::vector<Eigen::Triplet<double>>> trip_vol(Qa);
  for (int q = 0; q < Qa; ++q) {
    detail::volume_triplets(grid, space, op.region, dd, &data.kappa[q], true, trip_vol[q]);
    trip[q] = trip_vol[q];
    for (int f : jump_faces) detail::consistency_triplets(grid, space, op.region, dd, f, data.kappa[q], trip[q]);
  }
  for (int f : jump_faces) detail::penalty_triplets(grid, space, op.region, dd, f, w[f], trip[Qa]);

  op.F = assemble_rhs(data, grid, dd, space, op.region);

  std::vector<char> fixed(op.region.dim, 0);
  if (space.kind == SpaceKind::CG && problem.bc == BoundaryKind::Dirichlet) {
    op.dirichlet_dofs = dirichlet_vertex_dofs(grid, dd, space, op.region);
    for (int d : op.dirichlet_dofs) {
      fixed[d] = 1;
      op.F[d] = 0.0;
    }
  }

  op.A.resize(Qa + 1);
  op.A_vol.resize(Qa);
  for (int q = 0; q <= Qa; ++q) {
    const auto t = op.dirichlet_dofs.empty() ? trip[q] : constrain(trip[q], fixed, q == Qa);
    op.A[q].resize(op.region.dim, op.region.dim);
    op.A[q].setFromTriplets(t.begin(), t.end());
  }
  for (int q = 0; q < Qa; ++q) {
    const auto t = op.dirichlet_dofs.empty() ? trip_vol[q] : constrain(trip_vol[q], fixed, false);
    op.A_vol[q].resize(op.region.dim, op.region.dim);
    op.A_vol[q].setFromTriplets(t.begin(), t.end());
  }
  return op;
}

}  // namespace lrbms
