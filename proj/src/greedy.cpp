#include "lrbms/greedy.hpp"

#include <Eigen/Dense>

#include "lrbms/errest.hpp"
#include "lrbms/errors.hpp"
#include "lrbms/orthonorm.hpp"

namespace lrbms {

NormEquivalence energy_norm_equivalence(const ParamProblem& problem, const Eigen::VectorXd& mu,
                                        const Eigen::VectorXd& mu_bar) {
  const ThetaBounds b = theta_bounds(problem, mu, mu_bar);
  return {std::sqrt(b.lo), std::sqrt(b.hi)};
}

PerParameterSpace per_parameter_space(const TransferSetup& setup, const ParamProblem& problem,
                                      const ProblemData& data, const FineGrid& grid, const DomainDecomposition& dd,
                                      const BlockSpace& space, const Eigen::VectorXd& mu,
                                      const GreedyConfig& config) {
  PerParameterSpace pps;
  pps.mu = mu;
  const double target = config.eps / (2.0 * config.C1);
  const TransferOperator op = make_transfer_operator(setup, problem, data, grid, dd, space, mu, config.c_pen);

  if (config.builder == SpaceBuilder::ExactEigs) {
    const TransferEig eig = transfer_eigs(setup, op);
    int n = static_cast<int>(eig.lambda.size());
    for (int k = 0; k < eig.lambda.size(); ++k) {
      if (std::sqrt(eig.lambda[k]) <= target) {  // lambda_{n+1} with n = k
        n = k;
        break;
      }
    }
    GramSchmidt gs(setup.M_R, setup.N_R);
    std::vector<double> weights;
    for (int j = 0; j < n; ++j) {
      double w = 0.0;
      if (gs.append(eig.modes.col(j), &w)) weights.push_back(w);
    }
    if (config.with_rhs && op.source_active()) {
      double w = 0.0;
      if (gs.append(op.source_solution_range(), &w)) weights.push_back(w);
    }
    if (setup.subtract_kernel) {
      double w = 0.0;
      if (gs.append(Eigen::VectorXd::Ones(setup.N_R), &w)) weights.push_back(w);
    }
    pps.B = gs.basis();
    pps.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), weights.size());
  } else {
    OperatorPair pair;
    pair.ns = setup.N_S;
    pair.nr = setup.N_R;
    pair.M_S = &setup.M_S;
    pair.M_R = &setup.M_R;
    pair.lambda_min_MS = smallest_eigenvalue_dense(setup.M_S);
    pair.apply = [&op](const Eigen::VectorXd& z) { return op.apply(z); };
    RangefinderConfig rf = config.rangefinder;
    rf.tol = target;
    const RangefinderResult res = adaptive_randomized_range(pair, rf);
    GramSchmidt gs(setup.M_R, setup.N_R);
    gs.set_basis(res.B);
    std::vector<double> weights(res.pre_norms.data(), res.pre_norms.data() + res.pre_norms.size());
    if (config.with_rhs && op.source_active()) {
      double w = 0.0;
      if (gs.append(op.source_solution_range(), &w)) weights.push_back(w);
    }
    if (setup.subtract_kernel) {
      double w = 0.0;
      if (gs.append(Eigen::VectorXd::Ones(setup.N_R), &w)) weights.push_back(w);
    }
    pps.B = gs.basis();
    pps.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), weights.size());
  }
  return pps;
}

Deviation deviation(const PerParameterSpace& pps, const Eigen::MatrixXd& R_N,
                    const Eigen::SparseMatrix<double>& M_R) {
  Deviation dev;
  const int n = static_cast<int>(pps.B.cols());
  if (n == 0) return dev;
  Eigen::MatrixXd P = pps.B;
  if (R_N.cols() > 0) P -= R_N * (R_N.transpose() * (M_R * pps.B));
  Eigen::MatrixXd Z = P.transpose() * (M_R * P);
  Z = pps.weights.asDiagonal() * Z * pps.weights.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Z + Z.transpose()));
  if (es.info() != Eigen::Success) throw numerical_error("deviation eigenproblem failed");
  const int top = n - 1;  // ascending order
  dev.E = std::sqrt(std::max(0.0, es.eigenvalues()[top]));
  dev.worst = pps.B * (pps.weights.asDiagonal() * es.eigenvectors().col(top));
  return dev;
}

GreedyResult spectral_greedy(const TransferSetup& setup, const ParamProblem& problem, const ProblemData& data,
                             const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                             const GreedyConfig& config) {
  if (config.xi.empty()) throw config_error("training set must be non-empty");
  if (config.eps <= 0.0) throw config_error("tolerance must be positive");

  std::vector<PerParameterSpace> spaces;
  spaces.reserve(config.xi.size());
  for (const auto& mu : config.xi)
    spaces.push_back(per_parameter_space(setup, problem, data, grid, dd, space, mu, config));

  std::vector<double> thresholds;
  for (const auto& mu : config.xi) {
    const NormEquivalence c = energy_norm_equivalence(problem, mu, setup.mu_bar);
    thresholds.push_back(config.eps / (config.eps + 2.0 * config.C2 * c.c1 * c.c2));
  }

  GreedyResult result;
  GramSchmidt gs(setup.M_R, setup.N_R);
  if (setup.subtract_kernel) gs.append(Eigen::VectorXd::Ones(setup.N_R));

  while (true) {
    double max_excess = 0.0, max_E = 0.0;
    int star = -1;
    for (std::size_t i = 0; i < spaces.size(); ++i) {
      const Deviation dev = deviation(spaces[i], gs.basis(), setup.M_R);
      max_E = std::max(max_E, dev.E);
      const double excess = dev.E / thresholds[i];
      if (excess > 1.0 && excess > max_excess) {
        max_excess = excess;
        star = static_cast<int>(i);
      }
    }
    result.deviation_trace.push_back(max_E);
    if (star < 0) break;
    const std::size_t k = result.deviation_trace.size();
    if (k >= 4 && result.deviation_trace[k - 1] >= result.deviation_trace[k - 2] &&
        result.deviation_trace[k - 2] >= result.deviation_trace[k - 3] &&
        result.deviation_trace[k - 3] >= result.deviation_trace[k - 4])
      throw numerical_error("greedy stagnated for three consecutive iterations");
    const Deviation dev = deviation(spaces[star], gs.basis(), setup.M_R);
    if (!gs.append(dev.worst)) throw numerical_error("greedy candidate linearly dependent");
    result.chosen.push_back(config.xi[star]);
  }
  result.R_N = gs.basis();
  return result;
}

}  // namespace lrbms
