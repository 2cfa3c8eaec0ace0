#include "lrbms/space.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>

#include "lrbms/errors.hpp"
#include "lrbms/problem.hpp"
#include "assembly_detail.hpp"
#include "q1.hpp"

namespace lrbms {

namespace {

int upper_block(const std::vector<int>& offsets, int dof) {
  const auto it = std::upper_bound(offsets.begin(), offsets.end(), dof);
  return static_cast<int>(it - offsets.begin()) - 1;
}

}  // namespace

int BlockSpace::block_of(int dof) const { return upper_block(offsets, dof); }

BlockSpace build_block_space(const FineGrid& grid, const DomainDecomposition& dd, SpaceKind kind) {
  BlockSpace s;
  s.kind = kind;
  const int M = dd.n_subdomains();
  s.locals.resize(M);
  s.offsets.resize(M);
  int offset = 0;
  for (int m = 0; m < M; ++m) {
    LocalSpace& ls = s.locals[m];
    ls.kind = kind;
    ls.m = m;
    const auto [I, J] = dd.sub_ij(m);
    ls.cx0 = I * dd.cw;
    ls.cy0 = J * dd.ch;
    ls.cnx = dd.cw;
    ls.cny = dd.ch;
    ls.dim = kind == SpaceKind::CG ? (dd.cw + 1) * (dd.ch + 1) : 4 * dd.cw * dd.ch;
    s.offsets[m] = offset;
    offset += ls.dim;
  }
  s.dim = offset;

  s.cell_dofs.resize(grid.n_cells());
  for (int c = 0; c < grid.n_cells(); ++c) {
    const int m = dd.subdomain_of_cell(c);
    const LocalSpace& ls = s.locals[m];
    const auto [i, j] = grid.cell_ij(c);
    const int li = i - ls.cx0, lj = j - ls.cy0;
    if (kind == SpaceKind::CG) {
      const int stride = ls.cnx + 1;
      const int base = s.offsets[m] + lj * stride + li;
      s.cell_dofs[c] = {base, base + 1, base + stride, base + stride + 1};
    } else {
      const int base = s.offsets[m] + 4 * (lj * ls.cnx + li);
      s.cell_dofs[c] = {base, base + 1, base + 2, base + 3};
    }
  }
  return s;
}

Region make_region(const BlockSpace& space, std::vector<int> subs) {
  std::sort(subs.begin(), subs.end());
  Region r;
  r.subs = std::move(subs);
  r.sub_index.assign(space.locals.size(), -1);
  r.offsets.resize(r.subs.size());
  int offset = 0;
  for (int k = 0; k < static_cast<int>(r.subs.size()); ++k) {
    r.sub_index[r.subs[k]] = k;
    r.offsets[k] = offset;
    offset += space.locals[r.subs[k]].dim;
  }
  r.dim = offset;
  return r;
}

Region whole_region(const BlockSpace& space) {
  std::vector<int> subs(space.locals.size());
  for (int m = 0; m < static_cast<int>(subs.size()); ++m) subs[m] = m;
  return make_region(space, std::move(subs));
}

int Region::from_global(const BlockSpace& space, int global_dof) const {
  const int m = space.block_of(global_dof);
  return dof(space, m, global_dof - space.offsets[m]);
}

Eigen::VectorXd restrict_to_region(const BlockSpace& space, const Region& region, const Eigen::VectorXd& global) {
  Eigen::VectorXd out(region.dim);
  for (int k = 0; k < static_cast<int>(region.subs.size()); ++k) {
    const int m = region.subs[k];
    out.segment(region.offsets[k], space.locals[m].dim) = global.segment(space.offsets[m], space.locals[m].dim);
  }
  return out;
}

void scatter_from_region(const BlockSpace& space, const Region& region, const Eigen::VectorXd& local,
                         Eigen::VectorXd& global) {
  for (int k = 0; k < static_cast<int>(region.subs.size()); ++k) {
    const int m = region.subs[k];
    global.segment(space.offsets[m], space.locals[m].dim) = local.segment(region.offsets[k], space.locals[m].dim);
  }
}

PointValue evaluate(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                    const Eigen::VectorXd& coefficients, double x, double y) {
  const int c = grid.locate_cell(x, y);
  const auto [ox, oy] = grid.cell_origin(c);
  const double xh = (x - ox) / grid.hx, yh = (y - oy) / grid.hy;
  PointValue pv{0.0, {0.0, 0.0}};
  const auto& dofs = space.cell_dofs[c];
  for (int k = 0; k < 4; ++k) {
    const double u = coefficients[dofs[k]];
    pv.value += u * q1::shape(k, xh, yh);
    const auto g = q1::shape_grad(k, xh, yh, grid.hx, grid.hy);
    pv.gradient[0] += u * g[0];
    pv.gradient[1] += u * g[1];
  }
  return pv;
}

namespace detail {

q1::FaceSide face_side(const FineGrid& grid, const Face& face, int cell) {
  if (face.axis == 0) {
    const int line = static_cast<int>(std::lround((face.px - grid.domain.x0) / grid.hx));
    const int ci = cell % grid.nx;
    return {true, ci == line ? 0.0 : 1.0};
  }
  const int line = static_cast<int>(std::lround((face.py - grid.domain.y0) / grid.hy));
  const int cj = cell / grid.nx;
  return {false, cj == line ? 0.0 : 1.0};
}

// integral over the face of h^-1 [u][v], parameter form (h cancels); for
// one-sided faces the in-region cell carries the trace
void penalty_triplets(const FineGrid& grid, const BlockSpace& space, const Region& region,
                      const DomainDecomposition& dd, int f, double weight,
                      std::vector<Eigen::Triplet<double>>& out) {
  const Face& face = grid.faces[f];
  const int mp_raw = dd.subdomain_of_cell(face.cell_plus);
  const bool plus_in = region.contains(mp_raw);
  const bool minus_in = face.cell_minus >= 0 && region.contains(dd.subdomain_of_cell(face.cell_minus));
  const bool two_sided = plus_in && minus_in;
  const int cp = plus_in ? face.cell_plus : face.cell_minus;
  const int nd = two_sided ? 8 : 4;
  std::array<int, 8> dofs{};
  const auto side_p = face_side(grid, face, cp);
  const auto dp = space.cell_dofs[cp];
  const int mp = dd.subdomain_of_cell(cp);
  for (int k = 0; k < 4; ++k) dofs[k] = region.dof(space, mp, dp[k] - space.offsets[mp]);
  q1::FaceSide side_m{};
  if (two_sided) {
    side_m = face_side(grid, face, face.cell_minus);
    const auto dm = space.cell_dofs[face.cell_minus];
    const int mm = dd.subdomain_of_cell(face.cell_minus);
    for (int k = 0; k < 4; ++k) dofs[4 + k] = region.dof(space, mm, dm[k] - space.offsets[mm]);
  }
  Eigen::Matrix<double, 8, 8> P = Eigen::Matrix<double, 8, 8>::Zero();
  for (double t : q1::kGauss2) {
    Eigen::Matrix<double, 8, 1> jump = Eigen::Matrix<double, 8, 1>::Zero();
    const auto pp = side_p.point(t);
    for (int k = 0; k < 4; ++k) jump[k] = q1::shape(k, pp[0], pp[1]);
    if (two_sided) {
      const auto pm = side_m.point(t);
      for (int k = 0; k < 4; ++k) jump[4 + k] = -q1::shape(k, pm[0], pm[1]);
    }
    P += 0.5 * weight * jump * jump.transpose();
  }
  for (int a = 0; a < nd; ++a)
    for (int b = 0; b < nd; ++b)
      if (P(a, b) != 0.0) out.emplace_back(dofs[a], dofs[b], P(a, b));
}

void volume_triplets(const FineGrid& grid, const BlockSpace& space, const Region& region,
                     const DomainDecomposition& dd, const Eigen::VectorXd* cell_weight, bool stiffness,
                     std::vector<Eigen::Triplet<double>>& out) {
  const Eigen::Matrix4d K = stiffness ? q1::stiffness(grid.hx, grid.hy) : q1::mass(grid.hx, grid.hy);
  for (int m : region.subs) {
    for (int c : dd.cells_of(m)) {
      const double w = cell_weight ? (*cell_weight)[c] : 1.0;
      if (w == 0.0) continue;
      const auto dp = space.cell_dofs[c];
      std::array<int, 4> dofs;
      for (int k = 0; k < 4; ++k) dofs[k] = region.dof(space, m, dp[k] - space.offsets[m]);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) out.emplace_back(dofs[a], dofs[b], w * K(a, b));
    }
  }
}

}  // namespace detail

InnerProduct assemble_product(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                              ProductKind kind, const ParamProblem* problem, const Eigen::VectorXd* mu_bar) {
  const Region region = whole_region(space);
  std::vector<Eigen::Triplet<double>> trip;
  InnerProduct ip;
  ip.kind = kind;

  if (kind == ProductKind::L2) {
    detail::volume_triplets(grid, space, region, dd, nullptr, false, trip);
    ip.kernel_note = "definite";
  } else if (kind == ProductKind::Energy) {
    if (!problem || !mu_bar) throw config_error("energy product needs a problem and a reference parameter");
    const ProblemData data = sample_problem(*problem, grid);
    const Eigen::VectorXd k = data.kappa_at(theta_eval(*problem, *mu_bar));
    detail::volume_triplets(grid, space, region, dd, &k, true, trip);
    ip.kernel_note = "broken seminorm, kernel: per-subdomain constants";
  } else {
    detail::volume_triplets(grid, space, region, dd, nullptr, true, trip);
    for (const auto& gamma : dd.interfaces)
      for (int f : gamma.faces) detail::penalty_triplets(grid, space, region, dd, f, 1.0, trip);
    if (space.kind == SpaceKind::DG) {
      for (int m = 0; m < dd.n_subdomains(); ++m) {
        for (int f : dd.interior_faces[m]) detail::penalty_triplets(grid, space, region, dd, f, 1.0, trip);
        for (int f : dd.boundary_faces[m]) detail::penalty_triplets(grid, space, region, dd, f, 1.0, trip);
      }
      ip.kernel_note = "definite";
    } else {
      ip.kernel_note = "seminorm, kernel: global constants";
    }
  }

  ip.M.resize(space.dim, space.dim);
  ip.M.setFromTriplets(trip.begin(), trip.end());
  return ip;
}

Eigen::SparseMatrix<double> local_product_block(const Eigen::SparseMatrix<double>& M, const BlockSpace& space,
                                                int m) {
  const int o = space.offsets[m], d = space.locals[m].dim;
  Eigen::SparseMatrix<double> B = M.block(o, o, d, d);
  return B;
}

Eigen::SparseMatrix<double> with_dirichlet_rows(const Eigen::SparseMatrix<double>& M, const std::vector<int>& dofs) {
  std::vector<char> fixed(M.rows(), 0);
  for (int d : dofs) fixed[d] = 1;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(M.nonZeros() + dofs.size());
  for (int k = 0; k < M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
      if (!fixed[it.row()] && !fixed[it.col()]) trip.emplace_back(it.row(), it.col(), it.value());
  for (int d : dofs) trip.emplace_back(d, d, 1.0);
  Eigen::SparseMatrix<double> out(M.rows(), M.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace lrbms
