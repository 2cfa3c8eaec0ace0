#include "lrbms/rangefinder.hpp"

#include <cmath>

#include "lrbms/errors.hpp"
#include "lrbms/orthonorm.hpp"
#include "lrbms/random.hpp"

namespace lrbms {

double inv_erf(double y) {
  if (!(y > -1.0 && y < 1.0)) throw config_error("inv_erf argument must lie in (-1, 1)");
  if (y == 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  const double ay = std::abs(y);
  while (std::erf(hi) < ay) hi *= 2.0;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = std::erf(x) - ay;
    if (std::abs(f) <= 1e-15) break;
    (f > 0.0 ? hi : lo) = x;
    const double dfdx = 2.0 / std::sqrt(M_PI) * std::exp(-x * x);
    double xn = x - f / dfdx;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    x = xn;
  }
  return y < 0.0 ? -x : x;
}

double c_est(int n_t, double eps_testfail, double lambda_min_MS) {
  if (n_t < 1 || eps_testfail <= 0.0 || eps_testfail >= 1.0) throw config_error("invalid estimator factors");
  if (lambda_min_MS <= 0.0) throw config_error("source product must be positive definite");
  const double root = std::pow(eps_testfail, 1.0 / n_t);
  return 1.0 / (std::sqrt(2.0 * lambda_min_MS) * inv_erf(root));
}

double smallest_eigenvalue_dense(const Eigen::SparseMatrix<double>& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double norm_estimator(const Eigen::MatrixXd& projected_tests, const Eigen::SparseMatrix<double>& M_R, double cest) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < projected_tests.cols(); ++i) {
    const Eigen::VectorXd t = projected_tests.col(i);
    worst = std::max(worst, std::sqrt(std::max(0.0, t.dot(M_R * t))));
  }
  return cest * worst;
}

RangefinderResult adaptive_randomized_range(const OperatorPair& op, const RangefinderConfig& config) {
  if (config.tol <= 0.0 || config.n_t < 1) throw config_error("invalid rangefinder configuration");
  if (config.eps_algofail <= 0.0 || config.eps_algofail >= 1.0) throw config_error("invalid failure probability");
  const int upper = config.N_T_upper > 0 ? config.N_T_upper : std::min(op.ns, op.nr);

  RangefinderResult res;
  const double eps_testfail = config.eps_algofail / std::max(1, upper);
  res.c_est = c_est(config.n_t, eps_testfail, op.lambda_min_MS);

  NormalStream rng(config.seed);
  Eigen::MatrixXd tests(op.nr, config.n_t);
  for (int i = 0; i < config.n_t; ++i) tests.col(i) = op.apply(rng.normal_vector(op.ns));

  GramSchmidt gs(*op.M_R, op.nr);
  std::vector<double> pre_norms;
  int attempts = 0;
  while (true) {
    const double estimate = norm_estimator(tests, *op.M_R, res.c_est);
    res.estimator_trace.push_back(estimate);
    if (estimate <= config.tol) break;
    if (attempts >= upper + config.n_t)
      throw numerical_error("rangefinder exhausted the rank bound without converging");
    ++attempts;
    double pre = 0.0;
    if (!gs.append(op.apply(rng.normal_vector(op.ns)), &pre)) continue;
    pre_norms.push_back(pre);
    // re-orthogonalize the fixed test vectors against the new basis vector
    const Eigen::VectorXd b = gs.basis().col(gs.size() - 1);
    tests -= b * (b.transpose() * (*op.M_R * tests));
  }
  res.B = gs.basis();
  res.pre_norms = Eigen::Map<Eigen::VectorXd>(pre_norms.data(), pre_norms.size());
  res.iterations = attempts;
  return res;
}

double apriori_mean_bound(const Eigen::VectorXd& lambda, int n, double lmin_MR, double lmax_MR, double lmin_MS,
                          double lmax_MS) {
  if (n < 4) throw config_error("bound needs n >= 4");
  const double C_RS = std::sqrt(lmax_MR / lmin_MR) * std::sqrt(lmax_MS * lmin_MS);
  const auto lam = [&](int j) { return j < lambda.size() ? std::max(0.0, lambda[j]) : 0.0; };  // 0-based
  double best = std::numeric_limits<double>::infinity();
  for (int k = 2; k <= n - 2; ++k) {
    const int p = n - k;
    double tail = 0.0;
    for (int j = k; j < lambda.size(); ++j) tail += lam(j);
    const double value =
        (1.0 + std::sqrt(static_cast<double>(k) / (p - 1))) * std::sqrt(lam(k)) +
        (std::exp(1.0) * std::sqrt(static_cast<double>(n)) / p) * std::sqrt(tail);
    best = std::min(best, value);
  }
  return C_RS * best;
}

}  // namespace lrbms
