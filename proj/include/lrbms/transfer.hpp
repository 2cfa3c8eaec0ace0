#pragma once

#include <Eigen/Dense>
#include <memory>

#include "lrbms/fom.hpp"

namespace lrbms {

enum class RangeKind { Subdomain, InterfaceTrace };

struct TransferConfig {
  double l2_reg = 1e-12;  // restores definiteness of the energy product on constants
  int dense_cap = 4000;   // largest source dimension for assembled transfer matrices
};

/// Parameter-independent data of a transfer problem: oversampling patch,
/// source/range products, and the kernel-projection flag.
struct TransferSetup {
  OversamplingPatch patch;
  RangeKind range_kind = RangeKind::Subdomain;
  int range_sub = -1;        // Subdomain kind
  int range_interface = -1;  // InterfaceTrace kind
  bool subtract_kernel = false;
  int N_S = 0, N_R = 0;
  std::vector<int> source_vertices;
  Eigen::SparseMatrix<double> M_S;
  Eigen::SparseMatrix<double> M_R;
  Eigen::VectorXd mu_bar;
  TransferConfig config;
  // mean-value functionals for the kernel projection
  Eigen::VectorXd range_mean_weights;  // over the range subdomain (local dofs)
  Eigen::VectorXd patch_mean_weights;  // over the whole patch (region dofs)
  double range_measure = 0.0, patch_measure = 0.0;
};

TransferSetup make_transfer_setup(const ParamProblem& problem, const FineGrid& grid, const DomainDecomposition& dd,
                                  const BlockSpace& space, const OversamplingPatch& patch, RangeKind range_kind,
                                  TransferConfig config = {});

/// Transfer operator at a fixed parameter, backed by one patch factorization.
class TransferOperator {
 public:
  const TransferSetup* setup = nullptr;
  std::shared_ptr<PatchSystem> sys;
  const FineGrid* grid = nullptr;
  const DomainDecomposition* dd = nullptr;
  const BlockSpace* space = nullptr;

  Eigen::VectorXd apply(const Eigen::VectorXd& zeta) const;
  /// Restriction of the local source solution to the range (no projection).
  Eigen::VectorXd source_solution_range() const;
  bool source_active() const { return sys->f_source.norm() > 0.0; }

 private:
  Eigen::VectorXd to_range(Eigen::VectorXd patch_solution, bool project_kernel) const;
  friend TransferOperator make_transfer_operator(const TransferSetup&, const ParamProblem&, const ProblemData&,
                                                 const FineGrid&, const DomainDecomposition&, const BlockSpace&,
                                                 const Eigen::VectorXd&, double);
};

TransferOperator make_transfer_operator(const TransferSetup& setup, const ParamProblem& problem,
                                        const ProblemData& data, const FineGrid& grid,
                                        const DomainDecomposition& dd, const BlockSpace& space,
                                        const Eigen::VectorXd& mu, double c_pen = 16.0);

/// Columnwise application to the source basis; throws above the dense cap.
Eigen::MatrixXd assemble_transfer_matrix(const TransferOperator& op);

struct TransferEig {
  Eigen::VectorXd lambda;  // nonincreasing, size N_S
  Eigen::MatrixXd zeta;    // M_S-orthonormal source eigenvectors
  Eigen::MatrixXd modes;   // T zeta, ||mode_j||_{M_R}^2 = lambda_j
};

TransferEig transfer_eigs(const TransferSetup& setup, const TransferOperator& op);

/// Spectral modes plus optional source-solution and kernel augmentation,
/// M_R-orthonormalized. Weights are the pre-orthonormalization norms.
struct LocalBasis {
  Eigen::MatrixXd B;
  Eigen::VectorXd weights;
  Eigen::VectorXd lambdas;  // eigenvalue per column, 0 for augmentations
};

LocalBasis optimal_space(const TransferSetup& setup, const TransferOperator& op, int n, bool with_rhs);

/// #gamma * C_gamma * max_gamma sqrt(lambda_{n+1}); diagnostic only.
double apriori_interface_bound(const std::vector<double>& lambda_next, double C_gamma = 1.0);

/// Spectral square-root factors of the products for the dense oracle; the
/// range product may be semidefinite to roundoff, eigenvalue extremes are
/// clamped at the resolvable floor.
struct ProductFactors {
  Eigen::MatrixXd sqrt_R;   // M_R^{1/2}
  Eigen::MatrixXd isqrt_S;  // M_S^{-1/2}
  double lmin_R = 0, lmax_R = 0, lmin_S = 0, lmax_S = 0;
};
ProductFactors make_product_factors(const Eigen::SparseMatrix<double>& M_R, const Eigen::SparseMatrix<double>& M_S);

/// Dense oracle: operator norm of T - P_B T from M_S to M_R, B orthonormal
/// in M_R (pass an empty B for the plain operator norm).
double projection_error_norm(const Eigen::MatrixXd& T, const Eigen::SparseMatrix<double>& M_R,
                             const Eigen::SparseMatrix<double>& M_S, const Eigen::MatrixXd& B);
double projection_error_norm(const Eigen::MatrixXd& T, const ProductFactors& factors,
                             const Eigen::SparseMatrix<double>& M_R, const Eigen::MatrixXd& B);

}  // namespace lrbms
