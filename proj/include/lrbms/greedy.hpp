#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lrbms/rangefinder.hpp"
#include "lrbms/transfer.hpp"

namespace lrbms {

enum class SpaceBuilder { ExactEigs, Randomized };

struct GreedyConfig {
  std::vector<Eigen::VectorXd> xi;  // training parameters
  double eps = 1e-3;
  double C1 = 1.0, C2 = 1.0;
  SpaceBuilder builder = SpaceBuilder::ExactEigs;
  bool with_rhs = true;
  RangefinderConfig rangefinder;  // Randomized builder settings
  double c_pen = 16.0;
};

/// One training parameter's local space with the weighted-ball data.
struct PerParameterSpace {
  Eigen::VectorXd mu;
  Eigen::MatrixXd B;        // M_R-orthonormal
  Eigen::VectorXd weights;  // subset-ball weights per column
};

PerParameterSpace per_parameter_space(const TransferSetup& setup, const ParamProblem& problem,
                                      const ProblemData& data, const FineGrid& grid, const DomainDecomposition& dd,
                                      const BlockSpace& space, const Eigen::VectorXd& mu, const GreedyConfig& config);

/// Worst deviation of the weighted unit ball of one space from span(R_N),
/// and the maximizing function.
struct Deviation {
  double E = 0.0;
  Eigen::VectorXd worst;
};
Deviation deviation(const PerParameterSpace& pps, const Eigen::MatrixXd& R_N, const Eigen::SparseMatrix<double>& M_R);

struct GreedyResult {
  Eigen::MatrixXd R_N;  // M_R-orthonormal
  std::vector<Eigen::VectorXd> chosen;
  std::vector<double> deviation_trace;  // max deviation per iteration
};

/// Builds one parameter-independent local space covering all per-parameter
/// optimal spaces of the training set.
GreedyResult spectral_greedy(const TransferSetup& setup, const ParamProblem& problem, const ProblemData& data,
                             const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                             const GreedyConfig& config);

/// sqrt of the theta-wise energy-norm equivalence constants between mu and
/// mu_bar (volume terms only, thetas clipped at 1e-12 from below).
struct NormEquivalence {
  double c1 = 1.0, c2 = 1.0;
};
NormEquivalence energy_norm_equivalence(const ParamProblem& problem, const Eigen::VectorXd& mu,
                                        const Eigen::VectorXd& mu_bar);

}  // namespace lrbms
