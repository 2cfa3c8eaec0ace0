#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <functional>
#include <vector>

namespace lrbms {

/// erf^{-1} via Newton on std::erf with a bisection safeguard, |erf(x)-y| <= 1e-12.
double inv_erf(double y);

/// 1 / ( sqrt(2 lambda_min(M_S)) * erf^{-1}( eps_testfail^{1/n_t} ) ).
double c_est(int n_t, double eps_testfail, double lambda_min_MS);

/// Linear operator between product spaces, as the rangefinder consumes it.
struct OperatorPair {
  int ns = 0, nr = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  const Eigen::SparseMatrix<double>* M_S = nullptr;
  const Eigen::SparseMatrix<double>* M_R = nullptr;
  double lambda_min_MS = 0.0;  // smallest eigenvalue of M_S
};

double smallest_eigenvalue_dense(const Eigen::SparseMatrix<double>& M);

struct RangefinderConfig {
  double tol = 1e-4;
  int n_t = 10;
  double eps_algofail = 1e-10;
  int N_T_upper = 0;  // 0: min(ns, nr)
  std::uint64_t seed = 0;
};

struct RangefinderResult {
  Eigen::MatrixXd B;                   // M_R-orthonormal range basis
  Eigen::VectorXd pre_norms;           // pre-orthonormalization norms of accepted draws
  std::vector<double> estimator_trace;  // estimator value per check
  double c_est = 0.0;
  int iterations = 0;
};

/// Adaptive randomized range approximation: grows the basis with operator
/// applications to Gaussian draws until the probabilistic norm estimator
/// falls below tol.
RangefinderResult adaptive_randomized_range(const OperatorPair& op, const RangefinderConfig& config);

/// c_est * max_i || t_i ||_{M_R} over already-projected test vectors.
double norm_estimator(const Eigen::MatrixXd& projected_tests, const Eigen::SparseMatrix<double>& M_R, double c_est);

/// Expected-error bound: C_{R,S} * min_{k+p=n, k,p>=2} [ (1+sqrt(k/(p-1))) sqrt(l_{k+1})
/// + (e sqrt(n)/p) (sum_{j>k} l_j)^{1/2} ], with the product-spectrum constant
/// C_{R,S} = sqrt(lmax_R/lmin_R) sqrt(lmax_S lmin_S).
double apriori_mean_bound(const Eigen::VectorXd& lambda, int n, double lmin_MR, double lmax_MR, double lmin_MS,
                          double lmax_MS);

}  // namespace lrbms
