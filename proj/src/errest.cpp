#include "lrbms/errest.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <set>

#include "assembly_detail.hpp"
#include "lrbms/errors.hpp"
#include "q1.hpp"

namespace lrbms {

ThetaBounds theta_bounds(const ParamProblem& problem, const Eigen::VectorXd& mu, const Eigen::VectorXd& mu_bar) {
  const Eigen::VectorXd tb = theta_eval(problem, mu_bar);
  if (tb.minCoeff() <= 0.0) throw config_error("reference thetas must be positive");
  const Eigen::VectorXd tm = theta_eval(problem, mu).cwiseMax(1e-12);
  ThetaBounds b;
  b.lo = (tm.array() / tb.array()).minCoeff();
  b.hi = (tm.array() / tb.array()).maxCoeff();
  return b;
}

Eigen::VectorXd oswald_interpolate(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                                   const Eigen::VectorXd& u, BoundaryKind bc) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(grid.n_vertices());
  Eigen::VectorXd count = Eigen::VectorXd::Zero(grid.n_vertices());
  for (int c = 0; c < grid.n_cells(); ++c) {
    const auto cv = grid.cell_vertices(c);
    const auto cd = space.cell_dofs[c];
    for (int k = 0; k < 4; ++k) {
      sum[cv[k]] += u[cd[k]];
      count[cv[k]] += 1.0;
    }
  }
  Eigen::VectorXd out = sum.array() / count.array();
  if (bc == BoundaryKind::Dirichlet) {
    for (int i = 0; i <= grid.nx; ++i) {
      out[grid.vertex_index(i, 0)] = 0.0;
      out[grid.vertex_index(i, grid.ny)] = 0.0;
    }
    for (int j = 0; j <= grid.ny; ++j) {
      out[grid.vertex_index(0, j)] = 0.0;
      out[grid.vertex_index(grid.nx, j)] = 0.0;
    }
  }
  return out;
}

Eigen::VectorXd conforming_embed(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                                 const Eigen::VectorXd& vertex_values) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(space.dim);
  for (int c = 0; c < grid.n_cells(); ++c) {
    const auto cv = grid.cell_vertices(c);
    const auto cd = space.cell_dofs[c];
    for (int k = 0; k < 4; ++k) u[cd[k]] = vertex_values[cv[k]];
  }
  return u;
}

namespace {

// jump and mean-flux samples of u on a face at the two Gauss points
struct FaceSamples {
  double jump[2];
  double mean_flux[2];  // {kappa grad u . n_sigma}
};

FaceSamples face_samples(const FineGrid& grid, const BlockSpace& space, const Eigen::VectorXd& kappa,
                         const Eigen::VectorXd& u, const Face& face) {
  FaceSamples s{};
  const double hc[2] = {grid.hx, grid.hy};
  const auto side_p = detail::face_side(grid, face, face.cell_plus);
  const auto dp = space.cell_dofs[face.cell_plus];
  const bool two = face.cell_minus >= 0;
  const auto side_m = two ? detail::face_side(grid, face, face.cell_minus) : q1::FaceSide{};
  for (int g = 0; g < 2; ++g) {
    const double t = q1::kGauss2[g];
    const auto pp = side_p.point(t);
    double up = 0.0, fp = 0.0;
    for (int k = 0; k < 4; ++k) {
      up += u[dp[k]] * q1::shape(k, pp[0], pp[1]);
      fp += u[dp[k]] * q1::shape_grad(k, pp[0], pp[1], hc[0], hc[1])[face.axis];
    }
    fp *= kappa[face.cell_plus] * face.sign;
    if (!two) {
      s.jump[g] = up;
      s.mean_flux[g] = fp;
    } else {
      const auto dm = space.cell_dofs[face.cell_minus];
      const auto pm = side_m.point(t);
      double um = 0.0, fm = 0.0;
      for (int k = 0; k < 4; ++k) {
        um += u[dm[k]] * q1::shape(k, pm[0], pm[1]);
        fm += u[dm[k]] * q1::shape_grad(k, pm[0], pm[1], hc[0], hc[1])[face.axis];
      }
      fm *= kappa[face.cell_minus] * face.sign;
      s.jump[g] = up - um;
      s.mean_flux[g] = 0.5 * (fp + fm);
    }
  }
  return s;
}

double kappa_floor(const ParamProblem& problem, const ProblemData& data, const DomainDecomposition& dd, int m) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& corner : problem.box_corners()) {
    const Eigen::VectorXd k = data.kappa_at(theta_eval(problem, corner));
    for (int c : dd.cells_of(m)) lo = std::min(lo, k[c]);
  }
  return lo;
}

}  // namespace

RtFlux flux_reconstruct(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                        const Eigen::VectorXd& kappa_mu, const Eigen::VectorXd& penalty_w, const Eigen::VectorXd& u,
                        BoundaryKind bc) {
  RtFlux flux;
  flux.face_normal.resize(grid.n_faces());
  for (int f = 0; f < grid.n_faces(); ++f) {
    const Face& face = grid.faces[f];
    const FaceSamples s = face_samples(grid, space, kappa_mu, u, face);
    const double mean_flux = 0.5 * (s.mean_flux[0] + s.mean_flux[1]);
    if (face.cell_minus < 0 && bc == BoundaryKind::Neumann) {
      flux.face_normal[f] = -mean_flux;  // natural boundary: no trace penalty
      continue;
    }
    const double mean_jump = 0.5 * (s.jump[0] + s.jump[1]);
    flux.face_normal[f] = -mean_flux + penalty_w[f] / face.h * mean_jump;
  }
  flux.cell_divergence.resize(grid.n_cells());
  const double area = grid.hx * grid.hy;
  for (int c = 0; c < grid.n_cells(); ++c) {
    const auto cf = grid.cell_faces(c);
    double net = 0.0;
    for (int f : cf) {
      const Face& face = grid.faces[f];
      const double orient = face.cell_plus == c ? 1.0 : -1.0;
      net += orient * flux.face_normal[f] * face.h;
    }
    flux.cell_divergence[c] = net / area;
  }
  return flux;
}

Eigen::VectorXd conservation_defects(const FineGrid& grid, const DomainDecomposition& dd, const ProblemData& data,
                                     const RtFlux& flux) {
  const double area = grid.hx * grid.hy;
  Eigen::VectorXd defect(dd.n_subdomains());
  for (int m = 0; m < dd.n_subdomains(); ++m) {
    double lhs = 0.0, rhs = 0.0;
    for (int c : dd.cells_of(m)) {
      lhs += flux.cell_divergence[c] * area;
      rhs += data.source[c] * area;
    }
    defect[m] = std::abs(lhs - rhs);
  }
  return defect;
}

ErrorReport flux_estimate(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                          const ParamProblem& problem, const ProblemData& data, const AffineOperator& op,
                          const Eigen::VectorXd& u, const Eigen::VectorXd& mu, const Eigen::VectorXd& mu_bar,
                          const Eigen::VectorXd& mu_hat) {
  const ThetaBounds tb_bar = theta_bounds(problem, mu, mu_bar);
  const ThetaBounds tb_hat = theta_bounds(problem, mu, mu_hat);
  const Eigen::VectorXd k_mu = data.kappa_at(theta_eval(problem, mu));
  const Eigen::VectorXd k_bar = data.kappa_at(theta_eval(problem, mu_bar));
  const Eigen::VectorXd k_hat = data.kappa_at(theta_eval(problem, mu_hat));
  const Eigen::VectorXd w = penalty_weights(problem, data, grid, op.c_pen);

  const RtFlux flux = flux_reconstruct(grid, dd, space, k_mu, w, u, problem.bc);
  const Eigen::VectorXd d = u - conforming_embed(grid, dd, space, oswald_interpolate(grid, dd, space, u, problem.bc));

  const int M = dd.n_subdomains();
  Eigen::VectorXd eta_nc(M), eta_r(M), eta_df(M);
  const Eigen::Matrix4d K = q1::stiffness(grid.hx, grid.hy);
  const double area = grid.hx * grid.hy;
  constexpr double C_P = 1.0 / (M_PI * M_PI);

  for (int m = 0; m < M; ++m) {
    double nc2 = 0.0, r2 = 0.0, df2 = 0.0;
    const double kfloor = kappa_floor(problem, data, dd, m);
    for (int c : dd.cells_of(m)) {
      const auto cd = space.cell_dofs[c];
      Eigen::Vector4d dc;
      for (int k = 0; k < 4; ++k) dc[k] = d[cd[k]];
      nc2 += k_bar[c] * dc.dot(K * dc);

      const double misfit = data.source[c] - flux.cell_divergence[c];
      r2 += misfit * misfit * area;

      // 2x2 Gauss of kappa_hat^-1 |kappa_mu grad u + R|^2
      const auto cf = grid.cell_faces(c);
      const double rxl = flux.face_normal[cf[0]] * grid.faces[cf[0]].sign;
      const double rxr = flux.face_normal[cf[1]] * grid.faces[cf[1]].sign;
      const double ryb = flux.face_normal[cf[2]] * grid.faces[cf[2]].sign;
      const double ryt = flux.face_normal[cf[3]] * grid.faces[cf[3]].sign;
      for (double gx : q1::kGauss2)
        for (double gy : q1::kGauss2) {
          double ux = 0.0, uy = 0.0;
          for (int k = 0; k < 4; ++k) {
            const auto g = q1::shape_grad(k, gx, gy, grid.hx, grid.hy);
            ux += u[cd[k]] * g[0];
            uy += u[cd[k]] * g[1];
          }
          const double mx = k_mu[c] * ux + ((1.0 - gx) * rxl + gx * rxr);
          const double my = k_mu[c] * uy + ((1.0 - gy) * ryb + gy * ryt);
          df2 += 0.25 * area * (mx * mx + my * my) / k_hat[c];
        }
    }
    eta_nc[m] = std::sqrt(nc2);
    eta_r[m] = std::sqrt(C_P / kfloor * r2);
    eta_df[m] = std::sqrt(df2);
  }

  ErrorReport rep;
  rep.kind = "flux";
  const Eigen::VectorXd mixed = eta_r + eta_df / tb_hat.lo;
  rep.global = std::pow(tb_bar.lo, -0.5) * (std::sqrt(tb_bar.hi) * eta_nc.norm() + mixed.norm());
  rep.indicators =
      (2.0 / tb_bar.lo * (tb_bar.hi * eta_nc.array().square() + mixed.array().square())).sqrt().matrix();
  rep.constants = {{"theta_lo_bar", tb_bar.lo}, {"theta_hi_bar", tb_bar.hi}, {"theta_lo_hat", tb_hat.lo},
                   {"C_P", C_P},                {"eta_nc", eta_nc.norm()},   {"eta_r", eta_r.norm()},
                   {"eta_df", eta_df.norm()}};
  return rep;
}

ErrorReport flux_estimate_rom(const RomState& rom, const FineGrid& grid, const ProblemData& data,
                              const Eigen::VectorXd& mu, const Eigen::VectorXd& reduced,
                              const Eigen::VectorXd& mu_bar, const Eigen::VectorXd& mu_hat) {
  for (int m = 0; m < rom.n_subdomains(); ++m) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(rom.space().locals[m].dim);
    const Eigen::SparseMatrix<double>& P = rom.local_product(m);
    const Eigen::VectorXd res = ones - rom.basis(m) * (rom.basis(m).transpose() * (P * ones));
    const double rel = std::sqrt(std::max(0.0, res.dot(P * res))) /
                       std::sqrt(std::max(1e-300, ones.dot(P * ones)));
    if (rel > 1e-8) throw config_error("flux estimate needs the constant in every local basis");
  }
  const Eigen::VectorXd u = rom.reconstruct(reduced);
  return flux_estimate(grid, rom.dd(), rom.space(), rom.problem(), data, rom.fom(), u, mu, mu_bar, mu_hat);
}

CoercivityBounds coercivity_oracle(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& product,
                                   const std::vector<int>& dirichlet_dofs, int dense_cap) {
  if (A.rows() > dense_cap) throw resource_error("instance too large for the dense coercivity oracle");
  std::vector<char> fixed(A.rows(), 0);
  for (int d : dirichlet_dofs) fixed[d] = 1;
  std::vector<int> free;
  for (int i = 0; i < A.rows(); ++i)
    if (!fixed[i]) free.push_back(i);
  const int n = static_cast<int>(free.size());
  Eigen::MatrixXd Ad(n, n), Md(n, n);
  const Eigen::MatrixXd Af(A), Mf(product);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Ad(i, j) = Af(free[i], free[j]);
      Md(i, j) = Mf(free[i], free[j]);
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Ad + Ad.transpose()),
                                                               0.5 * (Md + Md.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numerical_error("coercivity oracle failed");
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

double alpha_min_theta(const AffineOperator& op, const ParamProblem& problem, const Eigen::VectorXd& mu,
                       const Eigen::VectorXd& mu_hat, double alpha_hat) {
  const Eigen::VectorXd tm = op.theta_values(problem, mu);
  const Eigen::VectorXd th = op.theta_values(problem, mu_hat);
  if (th.minCoeff() <= 0.0) throw config_error("reference thetas must be positive");
  return (tm.cwiseMax(0.0).array() / th.array()).minCoeff() * alpha_hat;
}

double stability_constant_oracle(const RomState& rom, const Eigen::SparseMatrix<double>& vh_product,
                                 const std::vector<int>& dirichlet_dofs) {
  const BlockSpace& space = rom.space();
  if (space.dim > 2000) throw resource_error("instance too large for the dense stability oracle");
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(space.dim, space.dim);
  for (int m = 0; m < rom.n_subdomains(); ++m) {
    const Eigen::MatrixXd P = Eigen::MatrixXd(rom.local_product(m));
    Eigen::MatrixXd D = P;
    if (rom.basis_size(m) > 0) {
      const Eigen::MatrixXd PB = P * rom.basis(m);
      D -= PB * PB.transpose();
    }
    G.block(space.offsets[m], space.offsets[m], space.locals[m].dim, space.locals[m].dim) = D;
  }
  std::vector<char> fixed(space.dim, 0);
  for (int d : dirichlet_dofs) fixed[d] = 1;
  std::vector<int> free;
  for (int i = 0; i < space.dim; ++i)
    if (!fixed[i]) free.push_back(i);
  const int n = static_cast<int>(free.size());
  Eigen::MatrixXd Gf(n, n), Mf(n, n);
  const Eigen::MatrixXd Md(vh_product);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Gf(i, j) = G(free[i], free[j]);
      Mf(i, j) = Md(free[i], free[j]);
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Gf + Gf.transpose()),
                                                               0.5 * (Mf + Mf.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numerical_error("stability oracle failed");
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

ResidualEstimator::ResidualEstimator(const RomState& rom) {
  data_.resize(rom.n_subdomains());
  refresh(rom);
}

void ResidualEstimator::build(const RomState& rom, int m) {
  const BlockSpace& space = rom.space();
  LocalData& ld = data_[m];
  ld.nbrs = {m};
  for (int n : rom.dd().neighbors[m]) ld.nbrs.push_back(n);
  ld.sizes.clear();
  const int Q = static_cast<int>(rom.fom().A.size());
  const int dim = space.locals[m].dim;
  int cols = 1;
  for (int n : ld.nbrs) {
    ld.sizes.push_back(rom.basis_size(n));
    cols += Q * rom.basis_size(n);
  }
  Eigen::MatrixXd raw(dim, cols);
  raw.col(0) = rom.fom().F.segment(space.offsets[m], dim);
  int c = 1;
  for (int q = 0; q < Q; ++q)
    for (int n : ld.nbrs) {
      if (rom.basis_size(n) == 0) continue;
      const Eigen::SparseMatrix<double> Amn = operator_block(rom.fom().A[q], space, m, n);
      raw.middleCols(c, rom.basis_size(n)) = Amn * rom.basis(n);
      c += rom.basis_size(n);
    }
  Eigen::MatrixXd riesz(dim, cols);
  for (int k = 0; k < cols; ++k) riesz.col(k) = rom.local_riesz(m).representative(raw.col(k));
  ld.gram = raw.transpose() * riesz;
  ld.gram = 0.5 * (ld.gram + ld.gram.transpose()).eval();
  ld.seen_versions.clear();
  for (int n : ld.nbrs) ld.seen_versions[n] = rom.basis_version(n);
}

void ResidualEstimator::refresh(const RomState& rom) {
  for (int m = 0; m < rom.n_subdomains(); ++m) {
    bool stale = data_[m].gram.size() == 0;
    if (!stale)
      for (const auto& [n, v] : data_[m].seen_versions) stale |= rom.basis_version(n) != v;
    if (stale) build(rom, m);
  }
}

Eigen::VectorXd ResidualEstimator::local_dual_norms(const RomState& rom, const Eigen::VectorXd& mu,
                                                    const Eigen::VectorXd& reduced) const {
  const Eigen::VectorXd theta = rom.fom().theta_values(rom.problem(), mu);
  const auto off = rom.reduced_offsets();
  Eigen::VectorXd eta(rom.n_subdomains());
  for (int m = 0; m < rom.n_subdomains(); ++m) {
    const LocalData& ld = data_[m];
    Eigen::VectorXd c = Eigen::VectorXd::Zero(ld.gram.rows());
    c[0] = 1.0;
    int pos = 1;
    for (int q = 0; q < static_cast<int>(theta.size()); ++q)
      for (std::size_t k = 0; k < ld.nbrs.size(); ++k) {
        const int n = ld.nbrs[k];
        const int sz = ld.sizes[k];
        if (sz > 0) c.segment(pos, sz) = -theta[q] * reduced.segment(off[n], sz);
        pos += sz;
      }
    eta[m] = std::sqrt(std::max(0.0, c.dot(ld.gram * c)));
  }
  return eta;
}

ErrorReport ResidualEstimator::localized_estimate(const RomState& rom, const Eigen::VectorXd& mu,
                                                  const Eigen::VectorXd& reduced, double alpha, double c_N) const {
  if (alpha <= 0.0) throw config_error("coercivity constant must be positive");
  ErrorReport rep;
  rep.kind = "residual_local";
  rep.indicators = local_dual_norms(rom, mu, reduced);
  rep.constants = {{"alpha", alpha}, {"J", 2.0}};
  if (c_N > 0.0) {
    rep.global = c_N / alpha * rep.indicators.norm();
    rep.constants["c_N"] = c_N;
  } else {  // no stability constant supplied: report the raw aggregation, flagged
    rep.global = rep.indicators.norm() / alpha;
    rep.constants["unscaled"] = 1.0;
  }
  return rep;
}

double global_residual_estimate(const RomState& rom, const RieszSolver& global_riesz, const Eigen::VectorXd& mu,
                                const Eigen::VectorXd& reduced, double alpha) {
  if (alpha <= 0.0) throw config_error("coercivity constant must be positive");
  const Eigen::VectorXd u = rom.reconstruct(reduced);
  const Eigen::VectorXd residual = rom.fom().F - rom.fom().combine(rom.problem(), mu) * u;
  return global_riesz.dual_norm(residual) / alpha;
}

}  // namespace lrbms
