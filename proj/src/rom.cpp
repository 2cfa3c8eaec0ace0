#include "lrbms/rom.hpp"

#include <Eigen/Dense>
#include <cstdio>

#include "lrbms/errors.hpp"
#include "lrbms/orthonorm.hpp"

namespace lrbms {

Eigen::SparseMatrix<double> operator_block(const Eigen::SparseMatrix<double>& A, const BlockSpace& space, int m,
                                           int n) {
  Eigen::SparseMatrix<double> B =
      A.block(space.offsets[m], space.offsets[n], space.locals[m].dim, space.locals[n].dim);
  return B;
}

RomState::RomState(const AffineOperator& fom, const ParamProblem& problem, const FineGrid& grid,
                   const DomainDecomposition& dd, const BlockSpace& space,
                   const Eigen::SparseMatrix<double>& vh_product)
    : fom_(&fom), problem_(&problem), grid_(&grid), dd_(&dd), space_(&space) {
  const int M = dd.n_subdomains();
  bases_.resize(M);
  P_.resize(M);
  riesz_.resize(M);
  version_.assign(M, 0);
  Ahat_.resize(fom.A.size());
  Fhat_.resize(M);
  std::vector<char> fixed(space.dim, 0);
  for (int d : fom.dirichlet_dofs) fixed[d] = 1;
  for (int m = 0; m < M; ++m) {
    bases_[m].resize(space.locals[m].dim, 0);
    Eigen::SparseMatrix<double> Pm = operator_block(vh_product, space, m, m);
    std::vector<int> local_fixed;
    for (int l = 0; l < space.locals[m].dim; ++l)
      if (fixed[space.offsets[m] + l]) local_fixed.push_back(l);
    if (!local_fixed.empty()) Pm = with_dirichlet_rows(Pm, local_fixed);
    P_[m] = Pm;
    riesz_[m] = std::make_unique<RieszSolver>(P_[m]);
    Fhat_[m].resize(0);
  }
  for (std::size_t q = 0; q < fom.A.size(); ++q) {
    for (int m = 0; m < M; ++m) {
      Ahat_[q][{m, m}] = Eigen::MatrixXd::Zero(0, 0);
      for (int n : dd.neighbors[m]) Ahat_[q][{m, n}] = Eigen::MatrixXd::Zero(0, 0);
    }
  }
}

int RomState::total_size() const {
  int n = 0;
  for (const auto& B : bases_) n += static_cast<int>(B.cols());
  return n;
}

std::vector<int> RomState::reduced_offsets() const {
  std::vector<int> off(bases_.size() + 1, 0);
  for (std::size_t m = 0; m < bases_.size(); ++m) off[m + 1] = off[m] + static_cast<int>(bases_[m].cols());
  return off;
}

bool RomState::has_block(int q, int m, int n) const { return Ahat_[q].count({m, n}) > 0; }

const Eigen::MatrixXd& RomState::block(int q, int m, int n) const {
  const auto it = Ahat_[q].find({m, n});
  if (it == Ahat_[q].end()) throw config_error("no coupling block between these subdomains");
  return it->second;
}

void RomState::append_projection(int m) {
  // recompute every stored block touching m at the current basis sizes
  for (std::size_t q = 0; q < fom_->A.size(); ++q) {
    const auto Amm = operator_block(fom_->A[q], *space_, m, m);
    Ahat_[q][{m, m}] = bases_[m].transpose() * (Amm * bases_[m]);
    for (int n : dd_->neighbors[m]) {
      const auto Amn = operator_block(fom_->A[q], *space_, m, n);
      Ahat_[q][{m, n}] = bases_[m].transpose() * (Amn * bases_[n]);
      Ahat_[q][{n, m}] = Ahat_[q][{m, n}].transpose().eval();
    }
  }
  Fhat_[m] = bases_[m].transpose() * fom_->F.segment(space_->offsets[m], space_->locals[m].dim);
}

bool RomState::extend_basis(int m, const Eigen::VectorXd& local_vector) {
  if (local_vector.size() != space_->locals[m].dim) throw config_error("extension vector has wrong length");
  GramSchmidt gs(P_[m], space_->locals[m].dim);
  gs.set_basis(bases_[m]);
  if (!gs.append(local_vector)) return false;
  bases_[m] = gs.basis();
  ++version_[m];
  append_projection(m);
  return true;
}

int RomState::insert_global_snapshot(const Eigen::VectorXd& u) {
  int accepted = 0;
  for (int m = 0; m < n_subdomains(); ++m)
    if (extend_basis(m, u.segment(space_->offsets[m], space_->locals[m].dim))) ++accepted;
  return accepted;
}

Eigen::MatrixXd RomState::reduced_matrix(const Eigen::VectorXd& mu) const {
  const Eigen::VectorXd theta = fom_->theta_values(*problem_, mu);
  const auto off = reduced_offsets();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(off.back(), off.back());
  for (std::size_t q = 0; q < Ahat_.size(); ++q)
    for (const auto& [key, blockq] : Ahat_[q]) {
      if (blockq.size() == 0) continue;
      A.block(off[key.first], off[key.second], blockq.rows(), blockq.cols()) += theta[q] * blockq;
    }
  return A;
}

Eigen::VectorXd RomState::reduced_rhs() const {
  const auto off = reduced_offsets();
  Eigen::VectorXd F = Eigen::VectorXd::Zero(off.back());
  for (int m = 0; m < n_subdomains(); ++m)
    if (Fhat_[m].size() > 0) F.segment(off[m], Fhat_[m].size()) = Fhat_[m];
  return F;
}

Eigen::VectorXd RomState::solve(const Eigen::VectorXd& mu) const {
  const Eigen::MatrixXd A = reduced_matrix(mu);
  if (A.rows() == 0) return Eigen::VectorXd();
  const Eigen::VectorXd F = reduced_rhs();
  // diagonal equilibration keeps the high-contrast blocks well scaled
  const Eigen::VectorXd d = A.diagonal().cwiseMax(1e-300).cwiseSqrt();
  const Eigen::VectorXd di = d.cwiseInverse();
  const Eigen::MatrixXd As = di.asDiagonal() * A * di.asDiagonal();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(As);
  if (ldlt.info() != Eigen::Success) throw numerical_error("reduced factorization failed");
  const Eigen::VectorXd Fs = di.asDiagonal() * F;
  Eigen::VectorXd Us = ldlt.solve(Fs);
  double rel = 1.0;
  for (int pass = 0; pass < 4; ++pass) {
    const Eigen::VectorXd r = Fs - As * Us;
    rel = r.norm() / std::max(1e-300, Fs.norm());
    if (rel <= 1e-15) break;
    Us += ldlt.solve(r);
  }
  if (F.norm() > 0.0 && rel > 1e-9) throw numerical_error("reduced system nearly singular");
  return di.asDiagonal() * Us;
}

Eigen::VectorXd RomState::reconstruct(const Eigen::VectorXd& reduced) const {
  const auto off = reduced_offsets();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(space_->dim);
  for (int m = 0; m < n_subdomains(); ++m) {
    const int nm = static_cast<int>(bases_[m].cols());
    if (nm > 0)
      u.segment(space_->offsets[m], space_->locals[m].dim) = bases_[m] * reduced.segment(off[m], nm);
  }
  return u;
}

namespace {
void csv_matrix(std::ostream& os, const Eigen::MatrixXd& A) {
  char buf[32];
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", A(i, j));
      os << (j ? "," : "") << buf;
    }
    os << "\n";
  }
}
}  // namespace

void RomState::dump(std::ostream& os) const {
  os << "reduced model dump v1\n";
  os << "subdomains," << n_subdomains() << "\n";
  os << "terms," << Ahat_.size() << "\n";
  os << "sizes";
  for (int m = 0; m < n_subdomains(); ++m) os << "," << basis_size(m);
  os << "\n";
  for (std::size_t q = 0; q < Ahat_.size(); ++q)
    for (const auto& [key, blockq] : Ahat_[q]) {
      if (blockq.size() == 0) continue;
      os << "BLOCK,q=" << q << ",m=" << key.first << ",n=" << key.second << ",rows=" << blockq.rows()
         << ",cols=" << blockq.cols() << "\n";
      csv_matrix(os, blockq);
    }
  for (int m = 0; m < n_subdomains(); ++m) {
    if (Fhat_[m].size() == 0) continue;
    os << "RHS,m=" << m << ",rows=" << Fhat_[m].size() << "\n";
    csv_matrix(os, Fhat_[m]);
  }
}

void seed_macro_q1(RomState& rom, const FineGrid& grid) {
  const auto& dd = rom.dd();
  const auto& space = rom.space();
  for (int m = 0; m < rom.n_subdomains(); ++m) {
    const auto [I, J] = dd.sub_ij(m);
    const double x0 = grid.domain.x0 + I * dd.cw * grid.hx;
    const double y0 = grid.domain.y0 + J * dd.ch * grid.hy;
    const double wx = dd.cw * grid.hx, wy = dd.ch * grid.hy;
    const auto shape = [&](int k, double x, double y) {
      const double xh = (x - x0) / wx, yh = (y - y0) / wy;
      return ((k & 1) ? xh : 1.0 - xh) * ((k & 2) ? yh : 1.0 - yh);
    };
    for (int k : {0, 1, 2, 3}) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(space.locals[m].dim);
      for (int c : dd.cells_of(m)) {
        const auto cv = grid.cell_vertices(c);
        const auto cd = space.cell_dofs[c];
        for (int corner = 0; corner < 4; ++corner) {
          const auto [x, y] = grid.vertex_xy(cv[corner]);
          v[cd[corner] - space.offsets[m]] = shape(k, x, y);
        }
      }
      if (k == 0) {  // start from the constant so it always enters the basis
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(space.locals[m].dim);
        rom.extend_basis(m, ones);
      }
      rom.extend_basis(m, v);
    }
  }
}

}  // namespace lrbms
