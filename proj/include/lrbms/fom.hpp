#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <memory>

#include "lrbms/forms.hpp"

namespace lrbms {

struct SolverOptions {
  double tol = 1e-10;
  int direct_cap = 20000;  // direct sparse factorization up to this dimension
  int maxiter_factor = 10;
};

struct SolveStats {
  bool direct = true;
  int iterations = 0;
  double residual = 0.0;
};

/// SPD solve, direct below the cap and diagonally preconditioned CG above.
Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                          const SolverOptions& opts = {}, SolveStats* stats = nullptr);

struct FomSolution {
  Eigen::VectorXd u;
  Eigen::VectorXd mu;
  double residual = 0.0;
};

FomSolution solve_fom(const AffineOperator& op, const ParamProblem& problem, const Eigen::VectorXd& mu,
                      const SolverOptions& opts = {});

/// Factorized local problem on an oversampling patch at a fixed parameter.
/// Dirichlet data on Gamma_out lives on the patch boundary vertices (one value
/// per geometric vertex) and is imposed strongly for CG, weakly for DG.
class PatchSystem {
 public:
  Region region;
  SpaceKind kind = SpaceKind::DG;
  std::vector<int> source_vertices;  // fine-grid vertex ids on Gamma_out, sorted
  Eigen::SparseMatrix<double> A;
  Eigen::SparseMatrix<double> trace_rhs;  // region.dim x N_S
  Eigen::VectorXd f_source;

  int n_source() const { return static_cast<int>(source_vertices.size()); }
  void factorize();
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  /// Solution with trace data g on Gamma_out; optionally with the source term.
  Eigen::VectorXd solve_with_trace(const Eigen::VectorXd& g, bool with_source = false) const;

 private:
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> fact_;
};

/// Fine-grid vertices carrying Dirichlet trace data on Gamma_out (vertices on
/// the Dirichlet part of the domain boundary are excluded), sorted.
std::vector<int> gamma_out_source_vertices(const FineGrid& grid, const OversamplingPatch& patch, BoundaryKind bc);

std::shared_ptr<PatchSystem> build_patch_system(const ParamProblem& problem, const ProblemData& data,
                                                const FineGrid& grid, const DomainDecomposition& dd,
                                                const BlockSpace& space, const OversamplingPatch& patch,
                                                const Eigen::VectorXd& mu, double c_pen = 16.0);

/// Riesz representative machinery for one SPD product matrix.
class RieszSolver {
 public:
  explicit RieszSolver(Eigen::SparseMatrix<double> M);
  const Eigen::SparseMatrix<double>& matrix() const { return M_; }
  Eigen::VectorXd representative(const Eigen::VectorXd& f) const;
  double dual_norm(const Eigen::VectorXd& f) const;

 private:
  Eigen::SparseMatrix<double> M_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fact_;
};

inline double quad_norm(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& u) {
  return std::sqrt(std::max(0.0, u.dot(A * u)));
}

/// a_h(u,u)^{1/2} for the combined form.
double energy_norm(const AffineOperator& op, const ParamProblem& problem, const Eigen::VectorXd& mu,
                   const Eigen::VectorXd& u);
/// kappa(mu)-weighted broken H1 seminorm.
double energy_seminorm(const AffineOperator& op, const ParamProblem& problem, const Eigen::VectorXd& mu,
                       const Eigen::VectorXd& u);

/// L2 distance between a coefficient vector and a smooth reference, 3x3 Gauss.
double l2_error_against(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                        const Eigen::VectorXd& u, const std::function<double(double, double)>& exact);

}  // namespace lrbms
