#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace lrbms {

/// Incremental Gram-Schmidt in an SPD product, re-iterated whenever the
/// post-projection norm drops below 0.1 of the pre-projection norm; a
/// candidate is rejected once its norm falls below 1e-10 of the original.
class GramSchmidt {
 public:
  explicit GramSchmidt(const Eigen::SparseMatrix<double>& M, int rows) : M_(&M), B_(rows, 0) {}

  const Eigen::MatrixXd& basis() const { return B_; }
  int size() const { return static_cast<int>(B_.cols()); }

  /// Appends the orthonormalized candidate; returns false if rejected.
  /// pre_norm, when given, receives the candidate's original M-norm.
  bool append(Eigen::VectorXd v, double* pre_norm = nullptr) {
    const double orig = norm(v);
    if (pre_norm) *pre_norm = orig;
    if (!(orig > 0.0)) return false;
    double current = orig;
    for (int pass = 0; pass < 8; ++pass) {
      if (B_.cols() > 0) v -= B_ * (B_.transpose() * (*M_ * v));
      const double next = norm(v);
      if (next < 1e-10 * orig) return false;
      const bool converged = next >= 0.1 * current;
      current = next;
      if (converged || B_.cols() == 0) break;
    }
    B_.conservativeResize(Eigen::NoChange, B_.cols() + 1);
    B_.col(B_.cols() - 1) = v / current;
    return true;
  }

  void set_basis(Eigen::MatrixXd B) { B_ = std::move(B); }

 private:
  double norm(const Eigen::VectorXd& v) const { return std::sqrt(std::max(0.0, v.dot(*M_ * v))); }
  const Eigen::SparseMatrix<double>* M_;
  Eigen::MatrixXd B_;
};

}  // namespace lrbms
