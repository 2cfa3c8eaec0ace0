#pragma once

#include <array>
#include <vector>

namespace lrbms {

struct Rect {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

/// Oriented fine-grid face. The unique normal is sign * e_axis and points
/// away from cell_plus; boundary faces have cell_minus == -1.
struct Face {
  int cell_plus = -1;
  int cell_minus = -1;
  int axis = 0;  // 0: normal along x, 1: normal along y
  int sign = 1;
  double h = 0;        // face length
  double px = 0, py = 0;  // lower endpoint
  int vertex_a = -1, vertex_b = -1;  // endpoint vertex ids, a -> b along the face
};

/// Uniform tensor grid on an axis-aligned rectangle, cells and vertices in
/// lexicographic order, faces enumerated vertical-then-horizontal.
struct FineGrid {
  Rect domain;
  int nx = 0, ny = 0;
  double hx = 0, hy = 0;
  std::vector<Face> faces;

  int n_cells() const { return nx * ny; }
  int n_vertices() const { return (nx + 1) * (ny + 1); }
  int n_faces() const { return static_cast<int>(faces.size()); }

  int cell_index(int i, int j) const { return j * nx + i; }
  std::array<int, 2> cell_ij(int c) const { return {c % nx, c / nx}; }
  int vertex_index(int i, int j) const { return j * (nx + 1) + i; }
  std::array<double, 2> vertex_xy(int v) const {
    const int i = v % (nx + 1), j = v / (nx + 1);
    return {domain.x0 + i * hx, domain.y0 + j * hy};
  }
  std::array<double, 2> cell_center(int c) const {
    const auto [i, j] = cell_ij(c);
    return {domain.x0 + (i + 0.5) * hx, domain.y0 + (j + 0.5) * hy};
  }
  std::array<double, 2> cell_origin(int c) const {
    const auto [i, j] = cell_ij(c);
    return {domain.x0 + i * hx, domain.y0 + j * hy};
  }

  // face ids of a cell: left, right, bottom, top
  std::array<int, 4> cell_faces(int c) const {
    const auto [i, j] = cell_ij(c);
    const int nv = (nx + 1) * ny;
    return {j * (nx + 1) + i, j * (nx + 1) + i + 1, nv + j * nx + i, nv + (j + 1) * nx + i};
  }
  std::array<int, 4> cell_vertices(int c) const {  // LL, LR, UL, UR
    const auto [i, j] = cell_ij(c);
    return {vertex_index(i, j), vertex_index(i + 1, j), vertex_index(i, j + 1), vertex_index(i + 1, j + 1)};
  }

  /// Cell containing (x,y); points on grid lines resolve to the lower-left cell.
  int locate_cell(double x, double y) const;
};

FineGrid build_grid(const Rect& domain, int nx, int ny);

struct Interface {
  int m_plus = -1, m_minus = -1;  // fine faces on the interface have t+ in m_plus
  std::vector<int> faces;
};

/// Non-overlapping decomposition into Mx x My congruent subdomains.
struct DomainDecomposition {
  int Mx = 0, My = 0;
  int cw = 0, ch = 0;  // cells per subdomain along x / y
  int nx = 0, ny = 0;
  std::vector<Interface> interfaces;
  std::vector<std::vector<int>> neighbors;       // face-adjacent, sorted
  std::vector<int> color;                        // checkerboard in {0,1}
  std::vector<std::vector<int>> interior_faces;  // both cells inside the subdomain
  std::vector<std::vector<int>> boundary_faces;  // on the domain boundary

  int n_subdomains() const { return Mx * My; }
  int sub_index(int I, int J) const { return J * Mx + I; }
  std::array<int, 2> sub_ij(int m) const { return {m % Mx, m / Mx}; }
  int subdomain_of_cell(int c) const {
    const int i = c % nx, j = c / nx;
    return sub_index(i / cw, j / ch);
  }
  std::vector<int> cells_of(int m) const;
  int interface_between(int m, int n) const;  // -1 if not adjacent
};

DomainDecomposition decompose(const FineGrid& grid, int Mx, int My);

/// Oversampling patch around a subdomain or an interface, grown by whole
/// subdomain layers and clipped at the domain boundary.
struct OversamplingPatch {
  bool target_is_interface = false;
  int target = -1;  // subdomain id or interface id
  int layers = 1;
  std::vector<int> subdomains;       // sorted
  std::vector<int> gamma_out_faces;  // patch outer boundary minus the domain boundary
  bool touches_domain_boundary = false;
  bool contains(int m) const;
};

OversamplingPatch oversampling_patch(const FineGrid& grid, const DomainDecomposition& dd,
                                     bool target_is_interface, int target, int layers);

}  // namespace lrbms
