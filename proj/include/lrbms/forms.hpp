#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "lrbms/grid.hpp"
#include "lrbms/problem.hpp"
#include "lrbms/space.hpp"

namespace lrbms {

/// Affine decomposition of the IP-localized bilinear form. One matrix per
/// diffusion term (volume + consistency faces), plus a final parameter-free
/// penalty matrix that also carries the Dirichlet identity rows for CG.
struct AffineOperator {
  SpaceKind kind = SpaceKind::DG;
  Region region;
  std::vector<ThetaAffine> theta;               // Q_a + 1 entries, last is constant 1
  std::vector<Eigen::SparseMatrix<double>> A;   // matching theta
  std::vector<Eigen::SparseMatrix<double>> A_vol;  // Q_a volume-only parts
  Eigen::VectorXd F;
  std::vector<int> dirichlet_dofs;
  double c_pen = 16.0;

  Eigen::VectorXd theta_values(const ParamProblem& problem, const Eigen::VectorXd& mu) const;
  Eigen::SparseMatrix<double> combine(const ParamProblem& problem, const Eigen::VectorXd& mu) const;
  /// kappa(mu)-weighted broken-gradient part only (energy seminorm matrix).
  Eigen::SparseMatrix<double> combine_volume(const ParamProblem& problem, const Eigen::VectorXd& mu) const;
};

/// Penalty weights per fine face: c_pen * max of the adjacent cell values of
/// kappa evaluated at the center of the parameter box.
Eigen::VectorXd penalty_weights(const ParamProblem& problem, const ProblemData& data, const FineGrid& grid,
                                double c_pen);

AffineOperator assemble_affine_fom(const ParamProblem& problem, const ProblemData& data, const FineGrid& grid,
                                   const DomainDecomposition& dd, const BlockSpace& space, double c_pen = 16.0);

/// Source functional over a region; Dirichlet rows are zeroed by the caller.
Eigen::VectorXd assemble_rhs(const ProblemData& data, const FineGrid& grid, const DomainDecomposition& dd,
                             const BlockSpace& space, const Region& region);

/// CG vertex dofs on the Dirichlet boundary, region numbering.
std::vector<int> dirichlet_vertex_dofs(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                                       const Region& region);

}  // namespace lrbms
