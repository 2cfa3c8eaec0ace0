#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>

#include "lrbms/rom.hpp"

namespace lrbms {

struct ErrorReport {
  std::string kind;
  double global = 0.0;
  Eigen::VectorXd indicators;  // per subdomain, global^2 <= sum indicators^2
  std::map<std::string, double> constants;
};

/// Energy-seminorm equivalence constants between mu and mu_bar:
/// lo = min_q theta_q(mu)/theta_q(mu_bar), hi = max_q (volume terms,
/// theta(mu) clipped at 1e-12 from below).
struct ThetaBounds {
  double lo = 1.0, hi = 1.0;
};
ThetaBounds theta_bounds(const ParamProblem& problem, const Eigen::VectorXd& mu, const Eigen::VectorXd& mu_bar);

/// Nodal averaging onto the conforming space; boundary nodes are zero for
/// Dirichlet problems. Returns one value per fine-grid vertex.
Eigen::VectorXd oswald_interpolate(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                                   const Eigen::VectorXd& u, BoundaryKind bc = BoundaryKind::Dirichlet);

/// Conforming vertex field sampled back into the block space.
Eigen::VectorXd conforming_embed(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                                 const Eigen::VectorXd& vertex_values);

/// Lowest-order face-normal flux reconstruction: one moment per fine face,
/// R.n_sigma = -{kappa grad u . n} + w_sigma h^-1 [u].
struct RtFlux {
  Eigen::VectorXd face_normal;     // per face, along the face's unique normal
  Eigen::VectorXd cell_divergence;  // cellwise constant
};
RtFlux flux_reconstruct(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                        const Eigen::VectorXd& kappa_mu, const Eigen::VectorXd& penalty_w, const Eigen::VectorXd& u,
                        BoundaryKind bc = BoundaryKind::Dirichlet);

/// Per-subdomain |(q - div R, 1)| conservation defects and their scale.
Eigen::VectorXd conservation_defects(const FineGrid& grid, const DomainDecomposition& dd, const ProblemData& data,
                                     const RtFlux& flux);

/// Flux-reconstruction energy estimate with nonconformity, residual, and
/// diffusive-flux parts; indicators satisfy global^2 <= sum indicators^2.
ErrorReport flux_estimate(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                          const ParamProblem& problem, const ProblemData& data, const AffineOperator& op,
                          const Eigen::VectorXd& u, const Eigen::VectorXd& mu, const Eigen::VectorXd& mu_bar,
                          const Eigen::VectorXd& mu_hat);

/// Checks 1 in V_N^m for every subdomain, then estimates at the ROM solution.
ErrorReport flux_estimate_rom(const RomState& rom, const FineGrid& grid, const ProblemData& data,
                              const Eigen::VectorXd& mu, const Eigen::VectorXd& reduced,
                              const Eigen::VectorXd& mu_bar, const Eigen::VectorXd& mu_hat);

/// Smallest/largest generalized eigenvalues of A(mu) against the product on
/// the Dirichlet-free dofs (dense; capped).
struct CoercivityBounds {
  double alpha = 0.0, gamma = 0.0;
};
CoercivityBounds coercivity_oracle(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double>& product,
                                   const std::vector<int>& dirichlet_dofs, int dense_cap = 4000);

/// alpha(mu) >= min_q theta_q(mu)/theta_q(mu_hat) * alpha(mu_hat); all terms.
double alpha_min_theta(const AffineOperator& op, const ParamProblem& problem, const Eigen::VectorXd& mu,
                       const Eigen::VectorXd& mu_hat, double alpha_hat);

/// Largest generalized singular value of the blockwise V_N-deflated
/// restriction map against the global product (dense; capped at 2000).
double stability_constant_oracle(const RomState& rom, const Eigen::SparseMatrix<double>& vh_product,
                                 const std::vector<int>& dirichlet_dofs);

/// Offline/online split of the per-subdomain residual dual norms: Riesz
/// representatives of every affine term against every basis vector, reduced
/// to Gram matrices.
class ResidualEstimator {
 public:
  explicit ResidualEstimator(const RomState& rom);
  /// Rebuilds data for subdomains whose own or neighboring basis changed.
  void refresh(const RomState& rom);
  /// Dual norms ||R(mu, U)||_{O_m'} in the local product, all subdomains.
  Eigen::VectorXd local_dual_norms(const RomState& rom, const Eigen::VectorXd& mu,
                                   const Eigen::VectorXd& reduced) const;
  /// Delta_loc = c_N / alpha * sqrt(sum eta_m^2) with the given constants.
  ErrorReport localized_estimate(const RomState& rom, const Eigen::VectorXd& mu, const Eigen::VectorXd& reduced,
                                 double alpha, double c_N) const;

 private:
  void build(const RomState& rom, int m);
  struct LocalData {
    Eigen::MatrixXd gram;
    std::vector<int> nbrs;  // {m} + neighbors, layout order
    std::vector<int> sizes;
    std::map<int, int> seen_versions;
  };
  std::vector<LocalData> data_;
};

/// Plain residual-based estimate Delta = ||R||_{V_h'} / alpha via the global
/// Riesz solver.
double global_residual_estimate(const RomState& rom, const RieszSolver& global_riesz, const Eigen::VectorXd& mu,
                                const Eigen::VectorXd& reduced, double alpha);

}  // namespace lrbms
