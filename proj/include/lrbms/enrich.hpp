#pragma once

#include <functional>

#include "lrbms/errest.hpp"

namespace lrbms {

enum class MarkingStrategy { Uniform, Doerfler, Age, Combined };

struct MarkingConfig {
  MarkingStrategy strategy = MarkingStrategy::Combined;
  double theta_doerf = 0.85;
  int n_age = 4;
  double theta_uni = 10.0;  // uniform while eta > theta_uni * delta_online
};

/// Marked subdomains. Doerfler picks the minimal set carrying theta^2 of the
/// squared indicators (ties by ascending index); age marks subdomains idle
/// for n_age consecutive steps; combined is uniform far from the target and
/// Doerfler plus age close to it.
std::vector<int> mark(const Eigen::VectorXd& indicators, const MarkingConfig& config, const std::vector<int>& ages,
                      double eta, double delta_online);

/// Corrector solve on the target subdomain plus its face neighbors with zero
/// boundary values; returns (correction + current approximation)|_m.
Eigen::VectorXd local_correction(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                                 const Eigen::SparseMatrix<double>& A_mu, const Eigen::VectorXd& F,
                                 const Eigen::VectorXd& u_current, int m);

struct EnrichmentStep {
  Eigen::VectorXd mu;
  double eta = 0.0;
  int marked = 0;
  int accepted = 0;
  int rejected = 0;
  int total_basis = 0;
};

struct EnrichmentHistory {
  std::vector<EnrichmentStep> steps;
  bool converged = false;
  double final_eta = 0.0;
};

using Estimator = std::function<ErrorReport(const Eigen::VectorXd& mu, const Eigen::VectorXd& reduced)>;

/// Solve -> estimate -> mark -> refine until the estimate drops below
/// delta_online; ages persist across calls through the caller's vector.
EnrichmentHistory enrich_online(RomState& rom, const FineGrid& grid, const Estimator& estimate,
                                const Eigen::VectorXd& mu, const MarkingConfig& marking, double delta_online,
                                std::vector<int>& ages, int step_cap = 200);

}  // namespace lrbms
