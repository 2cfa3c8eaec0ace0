#include "lrbms/fom.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <set>

#include "assembly_detail.hpp"
#include "lrbms/errors.hpp"
#include "q1.hpp"

namespace lrbms {

Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                          const SolverOptions& opts, SolveStats* stats) {
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    if (stats) *stats = {};
    return Eigen::VectorXd::Zero(b.size());
  }
  Eigen::VectorXd x;
  SolveStats st;
  if (A.rows() <= opts.direct_cap) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw numerical_error("sparse factorization failed");
    x = ldlt.solve(b);
    st.direct = true;
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(opts.tol);
    cg.setMaxIterations(std::max<Eigen::Index>(100, opts.maxiter_factor * A.rows()));
    cg.compute(A);
    x = cg.solve(b);
    st.direct = false;
    st.iterations = static_cast<int>(cg.iterations());
  }
  st.residual = (b - A * x).norm() / bnorm;
  if (st.residual > 100.0 * opts.tol)
    throw numerical_error("solver did not converge, relative residual " + std::to_string(st.residual));
  if (stats) *stats = st;
  return x;
}

FomSolution solve_fom(const AffineOperator& op, const ParamProblem& problem, const Eigen::VectorXd& mu,
                      const SolverOptions& opts) {
  const Eigen::SparseMatrix<double> A = op.combine(problem, mu);
  SolveStats st;
  FomSolution sol;
  sol.u = solve_spd(A, op.F, opts, &st);
  sol.mu = mu;
  sol.residual = st.residual;
  return sol;
}

void PatchSystem::factorize() {
  fact_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(A);
  if (fact_->info() != Eigen::Success) throw numerical_error("patch factorization failed");
}

Eigen::VectorXd PatchSystem::solve(const Eigen::VectorXd& rhs) const { return fact_->solve(rhs); }

Eigen::VectorXd PatchSystem::solve_with_trace(const Eigen::VectorXd& g, bool with_source) const {
  if (g.size() != n_source()) throw config_error("trace data size mismatch");
  Eigen::VectorXd rhs = trace_rhs * g;
  if (with_source) rhs += f_source;
  return solve(rhs);
}

namespace {

// endpoint vertex ids -> P1 values on a face; used for weak Dirichlet data
struct SourceIndex {
  std::vector<int> vertex_ids;  // sorted
  int of(int v) const {
    const auto it = std::lower_bound(vertex_ids.begin(), vertex_ids.end(), v);
    return it != vertex_ids.end() && *it == v ? static_cast<int>(it - vertex_ids.begin()) : -1;
  }
};

}  // namespace

std::vector<int> gamma_out_source_vertices(const FineGrid& grid, const OversamplingPatch& patch, BoundaryKind bc) {
  std::set<int> sv;
  for (int f : patch.gamma_out_faces) {
    sv.insert(grid.faces[f].vertex_a);
    sv.insert(grid.faces[f].vertex_b);
  }
  if (bc == BoundaryKind::Dirichlet) {
    for (auto it = sv.begin(); it != sv.end();) {
      const auto [x, y] = grid.vertex_xy(*it);
      const bool on_bnd = x == grid.domain.x0 || x == grid.domain.x1 || y == grid.domain.y0 || y == grid.domain.y1;
      it = on_bnd ? sv.erase(it) : std::next(it);
    }
  }
  return {sv.begin(), sv.end()};
}

std::shared_ptr<PatchSystem> build_patch_system(const ParamProblem& problem, const ProblemData& data,
                                                const FineGrid& grid, const DomainDecomposition& dd,
                                                const BlockSpace& space, const OversamplingPatch& patch,
                                                const Eigen::VectorXd& mu, double c_pen) {
  auto sys = std::make_shared<PatchSystem>();
  sys->kind = space.kind;
  sys->region = make_region(space, patch.subdomains);
  const Region& region = sys->region;

  const Eigen::VectorXd kappa = data.kappa_at(theta_eval(problem, mu));
  const Eigen::VectorXd w = penalty_weights(problem, data, grid, c_pen);

  SourceIndex srcidx;
  srcidx.vertex_ids = gamma_out_source_vertices(grid, patch, problem.bc);
  sys->source_vertices = srcidx.vertex_ids;
  const int ns = static_cast<int>(srcidx.vertex_ids.size());

  std::vector<Eigen::Triplet<double>> atrip;
  detail::volume_triplets(grid, space, region, dd, &kappa, true, atrip);
  for (int m : region.subs)
    for (int f : dd.interior_faces[m])
      if (space.kind == SpaceKind::DG) {
        detail::consistency_triplets(grid, space, region, dd, f, kappa, atrip);
        detail::penalty_triplets(grid, space, region, dd, f, w[f], atrip);
      }
  for (const auto& gamma : dd.interfaces) {
    if (!region.contains(gamma.m_plus) && !region.contains(gamma.m_minus)) continue;
    if (region.contains(gamma.m_plus) && region.contains(gamma.m_minus))
      for (int f : gamma.faces) {
        detail::consistency_triplets(grid, space, region, dd, f, kappa, atrip);
        detail::penalty_triplets(grid, space, region, dd, f, w[f], atrip);
      }
  }

  std::vector<Eigen::Triplet<double>> gtrip;
  if (space.kind == SpaceKind::DG) {
    // weak Dirichlet terms on the domain boundary and on Gamma_out
    if (problem.bc == BoundaryKind::Dirichlet)
      for (int m : region.subs)
        for (int f : dd.boundary_faces[m]) {
          detail::consistency_triplets(grid, space, region, dd, f, kappa, atrip);
          detail::penalty_triplets(grid, space, region, dd, f, w[f], atrip);
        }
    for (int f : patch.gamma_out_faces) {
      detail::consistency_triplets(grid, space, region, dd, f, kappa, atrip);
      detail::penalty_triplets(grid, space, region, dd, f, w[f], atrip);
      // rhs map: l(v) = int_sigma (-kappa grad v . n_out) g + w h^-1 g v
      const Face& face = grid.faces[f];
      const bool plus_in = region.contains(dd.subdomain_of_cell(face.cell_plus));
      const int cp = plus_in ? face.cell_plus : face.cell_minus;
      const int out_sign = plus_in ? face.sign : -face.sign;
      const int m = dd.subdomain_of_cell(cp);
      const auto side = detail::face_side(grid, face, cp);
      const auto dp = space.cell_dofs[cp];
      const int sa = srcidx.of(face.vertex_a), sb = srcidx.of(face.vertex_b);
      const double hc[2] = {grid.hx, grid.hy};
      Eigen::Matrix<double, 4, 2> L = Eigen::Matrix<double, 4, 2>::Zero();
      for (double t : q1::kGauss2) {
        const auto pt = side.point(t);
        const double gval[2] = {1.0 - t, t};  // P1 data along vertex_a -> vertex_b
        for (int k = 0; k < 4; ++k) {
          const auto gr = q1::shape_grad(k, pt[0], pt[1], hc[0], hc[1]);
          const double tr = q1::shape(k, pt[0], pt[1]);
          for (int e = 0; e < 2; ++e) {
            L(k, e) += 0.5 * face.h * (-kappa[cp] * out_sign * gr[face.axis]) * gval[e];
            L(k, e) += 0.5 * w[f] * tr * gval[e];  // h cancels in h^-1 int
          }
        }
      }
      for (int k = 0; k < 4; ++k) {
        const int rd = region.dof(space, m, dp[k] - space.offsets[m]);
        if (sa >= 0 && L(k, 0) != 0.0) gtrip.emplace_back(rd, sa, L(k, 0));
        if (sb >= 0 && L(k, 1) != 0.0) gtrip.emplace_back(rd, sb, L(k, 1));
      }
    }
    sys->A.resize(region.dim, region.dim);
    sys->A.setFromTriplets(atrip.begin(), atrip.end());
    sys->f_source = assemble_rhs(data, grid, dd, space, region);
  } else {
    // CG: strong rows at Gamma_out vertices and the Dirichlet boundary
    std::vector<char> fixed(region.dim, 0);
    std::vector<std::pair<int, int>> trace_dofs;  // (region dof, source index)
    for (int m : region.subs) {
      const LocalSpace& ls = space.locals[m];
      for (int jv = ls.cy0; jv <= ls.cy0 + ls.cny; ++jv)
        for (int iv = ls.cx0; iv <= ls.cx0 + ls.cnx; ++iv) {
          const int v = grid.vertex_index(iv, jv);
          const int local = (jv - ls.cy0) * (ls.cnx + 1) + (iv - ls.cx0);
          const int rd = region.dof(space, m, local);
          const int s = srcidx.of(v);
          const bool on_bnd = iv == 0 || iv == grid.nx || jv == 0 || jv == grid.ny;
          if (s >= 0) {
            fixed[rd] = 1;
            trace_dofs.emplace_back(rd, s);
          } else if (on_bnd && problem.bc == BoundaryKind::Dirichlet) {
            fixed[rd] = 1;
          }
        }
    }
    Eigen::SparseMatrix<double> A0(region.dim, region.dim);
    A0.setFromTriplets(atrip.begin(), atrip.end());
    // lifting: rhs = L g on fixed rows, -A0_fc g on free rows
    for (const auto& [rd, s] : trace_dofs) gtrip.emplace_back(rd, s, 1.0);
    std::vector<int> src_of_dof(region.dim, -1);
    for (const auto& [rd, s] : trace_dofs) src_of_dof[rd] = s;
    for (int k = 0; k < A0.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A0, k); it; ++it) {
        const int s = src_of_dof[it.col()];
        if (s >= 0 && !fixed[it.row()]) gtrip.emplace_back(it.row(), s, -it.value());
      }
    std::vector<Eigen::Triplet<double>> ctrip;
    for (int k = 0; k < A0.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A0, k); it; ++it)
        if (!fixed[it.row()] && !fixed[it.col()]) ctrip.emplace_back(it.row(), it.col(), it.value());
    for (int d = 0; d < region.dim; ++d)
      if (fixed[d]) ctrip.emplace_back(d, d, 1.0);
    sys->A.resize(region.dim, region.dim);
    sys->A.setFromTriplets(ctrip.begin(), ctrip.end());
    sys->f_source = assemble_rhs(data, grid, dd, space, region);
    for (int d = 0; d < region.dim; ++d)
      if (fixed[d]) sys->f_source[d] = 0.0;
  }

  sys->trace_rhs.resize(region.dim, ns);
  sys->trace_rhs.setFromTriplets(gtrip.begin(), gtrip.end());
  sys->factorize();
  return sys;
}

RieszSolver::RieszSolver(Eigen::SparseMatrix<double> M) : M_(std::move(M)), fact_(M_) {
  if (fact_.info() != Eigen::Success) throw numerical_error("product factorization failed");
}

Eigen::VectorXd RieszSolver::representative(const Eigen::VectorXd& f) const { return fact_.solve(f); }

double RieszSolver::dual_norm(const Eigen::VectorXd& f) const {
  return std::sqrt(std::max(0.0, f.dot(representative(f))));
}

double energy_norm(const AffineOperator& op, const ParamProblem& problem, const Eigen::VectorXd& mu,
                   const Eigen::VectorXd& u) {
  return quad_norm(op.combine(problem, mu), u);
}

double energy_seminorm(const AffineOperator& op, const ParamProblem& problem, const Eigen::VectorXd& mu,
                       const Eigen::VectorXd& u) {
  return quad_norm(op.combine_volume(problem, mu), u);
}

double l2_error_against(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                        const Eigen::VectorXd& u, const std::function<double(double, double)>& exact) {
  static const double gp[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  static const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  double err2 = 0.0;
  for (int c = 0; c < grid.n_cells(); ++c) {
    const auto [ox, oy] = grid.cell_origin(c);
    const auto& dofs = space.cell_dofs[c];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        double uh = 0.0;
        for (int k = 0; k < 4; ++k) uh += u[dofs[k]] * q1::shape(k, gp[a], gp[b]);
        const double x = ox + gp[a] * grid.hx, y = oy + gp[b] * grid.hy;
        const double d = uh - exact(x, y);
        err2 += gw[a] * gw[b] * grid.hx * grid.hy * d * d;
      }
  }
  return std::sqrt(err2);
}

}  // namespace lrbms
