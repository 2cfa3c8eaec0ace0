#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <ostream>

#include "lrbms/fom.hpp"

namespace lrbms {

/// Block-sparse reduced model over per-subdomain bases. Bases are
/// orthonormal in the diagonal block of the V_h product; reduced blocks
/// exist for the subdomain diagonal and face-adjacent couplings only.
class RomState {
 public:
  RomState(const AffineOperator& fom, const ParamProblem& problem, const FineGrid& grid,
           const DomainDecomposition& dd, const BlockSpace& space, const Eigen::SparseMatrix<double>& vh_product);

  const AffineOperator& fom() const { return *fom_; }
  const ParamProblem& problem() const { return *problem_; }
  const DomainDecomposition& dd() const { return *dd_; }
  const BlockSpace& space() const { return *space_; }

  int n_subdomains() const { return static_cast<int>(bases_.size()); }
  int basis_size(int m) const { return static_cast<int>(bases_[m].cols()); }
  int total_size() const;
  const Eigen::MatrixXd& basis(int m) const { return bases_[m]; }
  const Eigen::SparseMatrix<double>& local_product(int m) const { return P_[m]; }
  const RieszSolver& local_riesz(int m) const { return *riesz_[m]; }
  int basis_version(int m) const { return version_[m]; }

  /// Orthonormalizes against the local basis; returns false when rejected
  /// as linearly dependent. Only blocks touching m are updated.
  bool extend_basis(int m, const Eigen::VectorXd& local_vector);

  /// Block-local FOM coefficients appended subdomain by subdomain.
  int insert_global_snapshot(const Eigen::VectorXd& u);

  Eigen::VectorXd solve(const Eigen::VectorXd& mu) const;
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& reduced) const;

  /// Reduced system at mu, assembled dense from the stored blocks.
  Eigen::MatrixXd reduced_matrix(const Eigen::VectorXd& mu) const;
  Eigen::VectorXd reduced_rhs() const;
  const Eigen::MatrixXd& block(int q, int m, int n) const;
  bool has_block(int q, int m, int n) const;
  const Eigen::VectorXd& rhs_block(int m) const { return Fhat_[m]; }
  std::vector<int> reduced_offsets() const;

  /// Flat text dump: manifest header plus one CSV section per stored block.
  void dump(std::ostream& os) const;

 private:
  void append_projection(int m);  // extend reduced blocks after a basis growth

  const AffineOperator* fom_;
  const ParamProblem* problem_;
  const FineGrid* grid_;
  const DomainDecomposition* dd_;
  const BlockSpace* space_;
  std::vector<Eigen::MatrixXd> bases_;
  std::vector<Eigen::SparseMatrix<double>> P_;  // local products, Dirichlet-constrained
  std::vector<std::unique_ptr<RieszSolver>> riesz_;
  std::vector<int> version_;
  // per theta term: blocks keyed by (m, n), diagonal and neighbors
  std::vector<std::map<std::pair<int, int>, Eigen::MatrixXd>> Ahat_;
  std::vector<Eigen::VectorXd> Fhat_;
};

/// Sparse block of a global operator matrix.
Eigen::SparseMatrix<double> operator_block(const Eigen::SparseMatrix<double>& A, const BlockSpace& space, int m,
                                           int n);

/// Seeds every subdomain with the bilinear macro shape functions (constant,
/// both linears, and the mixed term over the subdomain), orthonormalized.
void seed_macro_q1(RomState& rom, const FineGrid& grid);

}  // namespace lrbms
