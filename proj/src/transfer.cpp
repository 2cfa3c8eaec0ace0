#include "lrbms/transfer.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "assembly_detail.hpp"
#include "lrbms/errors.hpp"
#include "lrbms/orthonorm.hpp"
#include "q1.hpp"

namespace lrbms {

namespace {

// corner index of a vertex within a cell
int corner_of(const FineGrid& grid, int cell, int vertex) {
  const auto cv = grid.cell_vertices(cell);
  for (int k = 0; k < 4; ++k)
    if (cv[k] == vertex) return k;
  throw numerical_error("vertex not on cell");
}

Eigen::SparseMatrix<double> interface_trace_mass(const FineGrid& grid, const Interface& gamma) {
  const int n = 2 * static_cast<int>(gamma.faces.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < static_cast<int>(gamma.faces.size()); ++i) {
    const double h = grid.faces[gamma.faces[i]].h;
    trip.emplace_back(2 * i, 2 * i, h / 3.0);
    trip.emplace_back(2 * i + 1, 2 * i + 1, h / 3.0);
    trip.emplace_back(2 * i, 2 * i + 1, h / 6.0);
    trip.emplace_back(2 * i + 1, 2 * i, h / 6.0);
  }
  Eigen::SparseMatrix<double> M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

}  // namespace

TransferSetup make_transfer_setup(const ParamProblem& problem, const FineGrid& grid, const DomainDecomposition& dd,
                                  const BlockSpace& space, const OversamplingPatch& patch, RangeKind range_kind,
                                  TransferConfig config) {
  TransferSetup s;
  s.patch = patch;
  s.range_kind = range_kind;
  s.config = config;
  s.mu_bar = problem.center();
  s.subtract_kernel = !(patch.touches_domain_boundary && problem.bc == BoundaryKind::Dirichlet);
  if (range_kind == RangeKind::Subdomain) {
    if (patch.target_is_interface) throw config_error("subdomain range needs a subdomain target");
    s.range_sub = patch.target;
  } else {
    if (!patch.target_is_interface) throw config_error("interface range needs an interface target");
    s.range_interface = patch.target;
  }

  s.source_vertices = gamma_out_source_vertices(grid, patch, problem.bc);
  s.N_S = static_cast<int>(s.source_vertices.size());

  // M_S: P1 mass along the Gamma_out polyline(s)
  {
    std::vector<Eigen::Triplet<double>> trip;
    const auto index_of = [&](int v) {
      const auto it = std::lower_bound(s.source_vertices.begin(), s.source_vertices.end(), v);
      return it != s.source_vertices.end() && *it == v ? static_cast<int>(it - s.source_vertices.begin()) : -1;
    };
    for (int f : patch.gamma_out_faces) {
      const Face& face = grid.faces[f];
      const int ia = index_of(face.vertex_a), ib = index_of(face.vertex_b);
      if (ia >= 0) trip.emplace_back(ia, ia, face.h / 3.0);
      if (ib >= 0) trip.emplace_back(ib, ib, face.h / 3.0);
      if (ia >= 0 && ib >= 0) {
        trip.emplace_back(ia, ib, face.h / 6.0);
        trip.emplace_back(ib, ia, face.h / 6.0);
      }
    }
    s.M_S.resize(s.N_S, s.N_S);
    s.M_S.setFromTriplets(trip.begin(), trip.end());
  }

  const Region patch_region = make_region(space, patch.subdomains);
  const double cell_area = grid.hx * grid.hy;
  s.patch_measure = cell_area * dd.cw * dd.ch * static_cast<double>(patch.subdomains.size());
  {
    std::vector<Eigen::Triplet<double>> trip;
    detail::volume_triplets(grid, space, patch_region, dd, nullptr, false, trip);
    Eigen::SparseMatrix<double> Mp(patch_region.dim, patch_region.dim);
    Mp.setFromTriplets(trip.begin(), trip.end());
    s.patch_mean_weights = Mp * Eigen::VectorXd::Ones(patch_region.dim);
  }

  if (range_kind == RangeKind::Subdomain) {
    const int m = s.range_sub;
    const Region local = make_region(space, {m});
    s.N_R = local.dim;
    const ProblemData data = sample_problem(problem, grid);
    const Eigen::VectorXd kbar = data.kappa_at(theta_eval(problem, s.mu_bar));
    std::vector<Eigen::Triplet<double>> trip;
    detail::volume_triplets(grid, space, local, dd, &kbar, true, trip);
    Eigen::SparseMatrix<double> E(s.N_R, s.N_R);
    E.setFromTriplets(trip.begin(), trip.end());
    trip.clear();
    detail::volume_triplets(grid, space, local, dd, nullptr, false, trip);
    Eigen::SparseMatrix<double> L2(s.N_R, s.N_R);
    L2.setFromTriplets(trip.begin(), trip.end());
    s.M_R = E + config.l2_reg * L2;
    s.range_mean_weights = L2 * Eigen::VectorXd::Ones(s.N_R);
    s.range_measure = cell_area * dd.cw * dd.ch;
  } else {
    const Interface& gamma = dd.interfaces[s.range_interface];
    s.N_R = 2 * static_cast<int>(gamma.faces.size());
    s.M_R = interface_trace_mass(grid, gamma);
  }
  return s;
}

TransferOperator make_transfer_operator(const TransferSetup& setup, const ParamProblem& problem,
                                        const ProblemData& data, const FineGrid& grid,
                                        const DomainDecomposition& dd, const BlockSpace& space,
                                        const Eigen::VectorXd& mu, double c_pen) {
  TransferOperator op;
  op.setup = &setup;
  op.grid = &grid;
  op.dd = &dd;
  op.space = &space;
  op.sys = build_patch_system(problem, data, grid, dd, space, setup.patch, mu, c_pen);
  if (op.sys->source_vertices != setup.source_vertices)
    throw numerical_error("patch system and transfer setup disagree on the source space");
  return op;
}

Eigen::VectorXd TransferOperator::to_range(Eigen::VectorXd u, bool project_kernel) const {
  const TransferSetup& s = *setup;
  if (s.range_kind == RangeKind::Subdomain) {
    const Region& region = sys->region;
    const int k = region.sub_index[s.range_sub];
    Eigen::VectorXd r = u.segment(region.offsets[k], space->locals[s.range_sub].dim);
    if (project_kernel && s.subtract_kernel) {
      const double mean = s.range_mean_weights.dot(r) / s.range_measure;
      r.array() -= mean;
    }
    return r;
  }
  if (project_kernel && s.subtract_kernel) {
    const double mean = s.patch_mean_weights.dot(u) / s.patch_measure;
    u.array() -= mean;
  }
  const Interface& gamma = dd->interfaces[s.range_interface];
  Eigen::VectorXd r(s.N_R);
  const Region& region = sys->region;
  for (int i = 0; i < static_cast<int>(gamma.faces.size()); ++i) {
    const Face& face = grid->faces[gamma.faces[i]];
    const int c = face.cell_plus;
    const int m = dd->subdomain_of_cell(c);
    const auto dofs = space->cell_dofs[c];
    r[2 * i] = u[region.dof(*space, m, dofs[corner_of(*grid, c, face.vertex_a)] - space->offsets[m])];
    r[2 * i + 1] = u[region.dof(*space, m, dofs[corner_of(*grid, c, face.vertex_b)] - space->offsets[m])];
  }
  return r;
}

Eigen::VectorXd TransferOperator::apply(const Eigen::VectorXd& zeta) const {
  return to_range(sys->solve_with_trace(zeta, false), true);
}

Eigen::VectorXd TransferOperator::source_solution_range() const {
  return to_range(sys->solve(sys->f_source), false);
}

Eigen::MatrixXd assemble_transfer_matrix(const TransferOperator& op) {
  const TransferSetup& s = *op.setup;
  if (s.N_S > s.config.dense_cap) throw resource_error("source dimension exceeds the dense transfer cap");
  Eigen::MatrixXd T(s.N_R, s.N_S);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(s.N_S);
  for (int j = 0; j < s.N_S; ++j) {
    e[j] = 1.0;
    T.col(j) = op.apply(e);
    e[j] = 0.0;
  }
  return T;
}

TransferEig transfer_eigs(const TransferSetup& setup, const TransferOperator& op) {
  TransferEig out;
  if (setup.N_S == 0) {
    out.lambda.resize(0);
    out.zeta.resize(setup.N_S, 0);
    out.modes.resize(setup.N_R, 0);
    return out;
  }
  const Eigen::MatrixXd T = assemble_transfer_matrix(op);
  const Eigen::MatrixXd MS = Eigen::MatrixXd(setup.M_S);
  const Eigen::MatrixXd C = T.transpose() * (setup.M_R * T);
  const Eigen::LLT<Eigen::MatrixXd> llt(MS);
  if (llt.info() != Eigen::Success) throw numerical_error("source product not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::MatrixXd W =
      L.triangularView<Eigen::Lower>().solve((L.triangularView<Eigen::Lower>().solve(C)).transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (W + W.transpose()));
  if (es.info() != Eigen::Success) throw numerical_error("transfer eigenproblem failed");

  const int n = setup.N_S;
  out.lambda.resize(n);
  out.zeta.resize(n, n);
  for (int j = 0; j < n; ++j) {  // ascending -> descending
    out.lambda[j] = std::max(0.0, es.eigenvalues()[n - 1 - j]);
    out.zeta.col(j) = L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors().col(n - 1 - j));
  }
  out.modes = T * out.zeta;
  return out;
}

LocalBasis optimal_space(const TransferSetup& setup, const TransferOperator& op, int n, bool with_rhs) {
  if (n < 0) throw config_error("mode count must be nonnegative");
  const TransferEig eig = transfer_eigs(setup, op);
  n = std::min<int>(n, static_cast<int>(eig.lambda.size()));

  GramSchmidt gs(setup.M_R, setup.N_R);
  std::vector<double> weights, lambdas;
  for (int j = 0; j < n; ++j) {
    double w = 0.0;
    if (gs.append(eig.modes.col(j), &w)) {
      weights.push_back(w);
      lambdas.push_back(eig.lambda[j]);
    }
  }
  if (with_rhs && op.source_active()) {
    double w = 0.0;
    if (gs.append(op.source_solution_range(), &w)) {
      weights.push_back(w);
      lambdas.push_back(0.0);
    }
  }
  if (setup.subtract_kernel) {
    double w = 0.0;
    if (gs.append(Eigen::VectorXd::Ones(setup.N_R), &w)) {
      weights.push_back(w);
      lambdas.push_back(0.0);
    }
  }
  LocalBasis basis;
  basis.B = gs.basis();
  basis.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), weights.size());
  basis.lambdas = Eigen::Map<Eigen::VectorXd>(lambdas.data(), lambdas.size());
  return basis;
}

double apriori_interface_bound(const std::vector<double>& lambda_next, double C_gamma) {
  double worst = 0.0;
  for (double l : lambda_next) {
    if (l < 0.0) throw config_error("eigenvalues must be nonnegative");
    worst = std::max(worst, std::sqrt(l));
  }
  return static_cast<double>(lambda_next.size()) * C_gamma * worst;
}

ProductFactors make_product_factors(const Eigen::SparseMatrix<double>& M_R,
                                    const Eigen::SparseMatrix<double>& M_S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esR{Eigen::MatrixXd(M_R)};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esS{Eigen::MatrixXd(M_S)};
  if (esR.info() != Eigen::Success || esS.info() != Eigen::Success)
    throw numerical_error("product eigendecomposition failed");
  if (esS.eigenvalues().minCoeff() <= 0.0) throw numerical_error("source product not positive definite");
  ProductFactors f;
  f.lmax_R = esR.eigenvalues().maxCoeff();
  f.lmin_R = std::max(esR.eigenvalues().minCoeff(), 1e-16 * f.lmax_R);  // resolvable floor
  f.lmax_S = esS.eigenvalues().maxCoeff();
  f.lmin_S = esS.eigenvalues().minCoeff();
  const Eigen::VectorXd sqR = esR.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::VectorXd isqS = esS.eigenvalues().cwiseSqrt().cwiseInverse();
  f.sqrt_R = sqR.asDiagonal() * esR.eigenvectors().transpose();
  f.isqrt_S = esS.eigenvectors() * isqS.asDiagonal();
  return f;
}

double projection_error_norm(const Eigen::MatrixXd& T, const ProductFactors& factors,
                             const Eigen::SparseMatrix<double>& M_R, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd Tp = T;
  if (B.cols() > 0) Tp -= B * (B.transpose() * (M_R * T));
  const Eigen::MatrixXd Y = factors.sqrt_R * Tp * factors.isqrt_S;
  if (Y.size() == 0) return 0.0;
  return Y.jacobiSvd().singularValues()[0];
}

double projection_error_norm(const Eigen::MatrixXd& T, const Eigen::SparseMatrix<double>& M_R,
                             const Eigen::SparseMatrix<double>& M_S, const Eigen::MatrixXd& B) {
  return projection_error_norm(T, make_product_factors(M_R, M_S), M_R, B);
}

}  // namespace lrbms
