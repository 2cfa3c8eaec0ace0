#pragma once

// Internal assembly kernels shared by the space and forms translation units.

#include <Eigen/SparseCore>
#include <vector>

#include "lrbms/grid.hpp"
#include "lrbms/space.hpp"
#include "q1.hpp"

namespace lrbms::detail {

q1::FaceSide face_side(const FineGrid& grid, const Face& face, int cell);

void penalty_triplets(const FineGrid& grid, const BlockSpace& space, const Region& region,
                      const DomainDecomposition& dd, int f, double weight,
                      std::vector<Eigen::Triplet<double>>& out);

void consistency_triplets(const FineGrid& grid, const BlockSpace& space, const Region& region,
                          const DomainDecomposition& dd, int f, const Eigen::VectorXd& kappa,
                          std::vector<Eigen::Triplet<double>>& out);

void volume_triplets(const FineGrid& grid, const BlockSpace& space, const Region& region,
                     const DomainDecomposition& dd, const Eigen::VectorXd* cell_weight, bool stiffness,
                     std::vector<Eigen::Triplet<double>>& out);

}  // namespace lrbms::detail
