#pragma once

#include <Eigen/SparseCore>
#include <array>
#include <string>
#include <vector>

#include "lrbms/grid.hpp"

namespace lrbms {

enum class SpaceKind { CG, DG };

/// Per-subdomain bilinear space: CG couples the subdomain's vertices,
/// DG holds four corner values per cell.
struct LocalSpace {
  SpaceKind kind = SpaceKind::DG;
  int m = -1;
  int cx0 = 0, cy0 = 0, cnx = 0, cny = 0;  // owned cell range
  int dim = 0;
};

/// Direct sum of the local spaces with contiguous global offsets.
struct BlockSpace {
  SpaceKind kind = SpaceKind::DG;
  std::vector<LocalSpace> locals;
  std::vector<int> offsets;
  int dim = 0;
  std::vector<std::array<int, 4>> cell_dofs;  // per cell, global ids in corner order

  int block_of(int dof) const;
  int local_dim(int m) const { return locals[m].dim; }
};

BlockSpace build_block_space(const FineGrid& grid, const DomainDecomposition& dd, SpaceKind kind);

/// Contiguous renumbering of a subdomain subset; the whole-space region
/// reproduces the global numbering.
struct Region {
  std::vector<int> subs;       // sorted
  std::vector<int> sub_index;  // size M, position in subs or -1
  std::vector<int> offsets;    // per position
  int dim = 0;

  bool contains(int m) const { return sub_index[m] >= 0; }
  int dof(const BlockSpace& space, int m, int local) const { return offsets[sub_index[m]] + local; }
  int from_global(const BlockSpace& space, int global_dof) const;
};

Region make_region(const BlockSpace& space, std::vector<int> subs);
Region whole_region(const BlockSpace& space);

Eigen::VectorXd restrict_to_region(const BlockSpace& space, const Region& region, const Eigen::VectorXd& global);
void scatter_from_region(const BlockSpace& space, const Region& region, const Eigen::VectorXd& local,
                         Eigen::VectorXd& global);

/// Point evaluation of a coefficient vector; grid-line points resolve to the
/// lower-left cell and its subdomain block.
struct PointValue {
  double value;
  std::array<double, 2> gradient;
};
PointValue evaluate(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                    const Eigen::VectorXd& coefficients, double x, double y);

enum class ProductKind { Vh, L2, Energy };

struct InnerProduct {
  ProductKind kind;
  Eigen::SparseMatrix<double> M;
  std::string kernel_note;
};

class ParamProblem;  // forms module

/// Vh: broken H1 plus jump penalties (interfaces for CG, every face for DG).
/// L2: mass. Energy: kappa(mu_bar)-weighted broken H1, volume only.
InnerProduct assemble_product(const FineGrid& grid, const DomainDecomposition& dd, const BlockSpace& space,
                              ProductKind kind, const ParamProblem* problem = nullptr,
                              const Eigen::VectorXd* mu_bar = nullptr);

/// Same quadratic forms restricted to one subdomain block (its diagonal block).
Eigen::SparseMatrix<double> local_product_block(const Eigen::SparseMatrix<double>& M, const BlockSpace& space, int m);

/// Replace the given rows/columns by identity (Dirichlet convention).
Eigen::SparseMatrix<double> with_dirichlet_rows(const Eigen::SparseMatrix<double>& M, const std::vector<int>& dofs);

}  // namespace lrbms
