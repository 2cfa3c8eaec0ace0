#include "lrbms/grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lrbms/errors.hpp"

namespace lrbms {

int FineGrid::locate_cell(double x, double y) const {
  if (x < domain.x0 || x > domain.x1 || y < domain.y0 || y > domain.y1)
    throw config_error("point outside domain");
  const auto clamp = [](int i, int n) { return std::min(std::max(i, 0), n - 1); };
  const int i = clamp(static_cast<int>(std::ceil((x - domain.x0) / hx)) - 1, nx);
  const int j = clamp(static_cast<int>(std::ceil((y - domain.y0) / hy)) - 1, ny);
  return cell_index(i, j);
}

FineGrid build_grid(const Rect& domain, int nx, int ny) {
  if (nx < 1 || ny < 1) throw config_error("cell counts must be positive");
  if (domain.x1 <= domain.x0 || domain.y1 <= domain.y0) throw config_error("degenerate rectangle");

  FineGrid g;
  g.domain = domain;
  g.nx = nx;
  g.ny = ny;
  g.hx = domain.width() / nx;
  g.hy = domain.height() / ny;
  g.faces.reserve((nx + 1) * ny + nx * (ny + 1));

  // vertical faces, normal along x
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      Face f;
      f.axis = 0;
      f.h = g.hy;
      f.px = domain.x0 + i * g.hx;
      f.py = domain.y0 + j * g.hy;
      f.vertex_a = g.vertex_index(i, j);
      f.vertex_b = g.vertex_index(i, j + 1);
      if (i == 0) {
        f.cell_plus = g.cell_index(0, j);
        f.sign = -1;
      } else {
        f.cell_plus = g.cell_index(i - 1, j);
        f.sign = 1;
        if (i < nx) f.cell_minus = g.cell_index(i, j);
      }
      g.faces.push_back(f);
    }
  // horizontal faces, normal along y
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Face f;
      f.axis = 1;
      f.h = g.hx;
      f.px = domain.x0 + i * g.hx;
      f.py = domain.y0 + j * g.hy;
      f.vertex_a = g.vertex_index(i, j);
      f.vertex_b = g.vertex_index(i + 1, j);
      if (j == 0) {
        f.cell_plus = g.cell_index(i, 0);
        f.sign = -1;
      } else {
        f.cell_plus = g.cell_index(i, j - 1);
        f.sign = 1;
        if (j < ny) f.cell_minus = g.cell_index(i, j);
      }
      g.faces.push_back(f);
    }
  return g;
}

std::vector<int> DomainDecomposition::cells_of(int m) const {
  const auto [I, J] = sub_ij(m);
  std::vector<int> cells;
  cells.reserve(cw * ch);
  for (int j = J * ch; j < (J + 1) * ch; ++j)
    for (int i = I * cw; i < (I + 1) * cw; ++i) cells.push_back(j * nx + i);
  return cells;
}

int DomainDecomposition::interface_between(int m, int n) const {
  for (int k = 0; k < static_cast<int>(interfaces.size()); ++k) {
    const auto& g = interfaces[k];
    if ((g.m_plus == m && g.m_minus == n) || (g.m_plus == n && g.m_minus == m)) return k;
  }
  return -1;
}

DomainDecomposition decompose(const FineGrid& grid, int Mx, int My) {
  if (Mx < 1 || My < 1 || grid.nx % Mx != 0 || grid.ny % My != 0)
    throw config_error("subdomain counts must divide the cell counts");

  DomainDecomposition dd;
  dd.Mx = Mx;
  dd.My = My;
  dd.nx = grid.nx;
  dd.ny = grid.ny;
  dd.cw = grid.nx / Mx;
  dd.ch = grid.ny / My;
  const int M = Mx * My;
  dd.neighbors.resize(M);
  dd.color.resize(M);
  dd.interior_faces.resize(M);
  dd.boundary_faces.resize(M);

  for (int J = 0; J < My; ++J)
    for (int I = 0; I < Mx; ++I) {
      const int m = dd.sub_index(I, J);
      dd.color[m] = (I + J) % 2;
      const int nv = (grid.nx + 1) * grid.ny;
      if (I + 1 < Mx) {  // vertical interface to the right neighbor
        Interface gamma;
        gamma.m_plus = m;
        gamma.m_minus = dd.sub_index(I + 1, J);
        const int i = (I + 1) * dd.cw;
        for (int j = J * dd.ch; j < (J + 1) * dd.ch; ++j) gamma.faces.push_back(j * (grid.nx + 1) + i);
        dd.interfaces.push_back(std::move(gamma));
      }
      if (J + 1 < My) {  // horizontal interface to the top neighbor
        Interface gamma;
        gamma.m_plus = m;
        gamma.m_minus = dd.sub_index(I, J + 1);
        const int j = (J + 1) * dd.ch;
        for (int i = I * dd.cw; i < (I + 1) * dd.cw; ++i) gamma.faces.push_back(nv + j * grid.nx + i);
        dd.interfaces.push_back(std::move(gamma));
      }
    }

  for (const auto& gamma : dd.interfaces) {
    dd.neighbors[gamma.m_plus].push_back(gamma.m_minus);
    dd.neighbors[gamma.m_minus].push_back(gamma.m_plus);
  }
  for (auto& nb : dd.neighbors) std::sort(nb.begin(), nb.end());

  for (int f = 0; f < grid.n_faces(); ++f) {
    const Face& face = grid.faces[f];
    const int mp = dd.subdomain_of_cell(face.cell_plus);
    if (face.cell_minus < 0) {
      dd.boundary_faces[mp].push_back(f);
    } else if (dd.subdomain_of_cell(face.cell_minus) == mp) {
      dd.interior_faces[mp].push_back(f);
    }
  }
  return dd;
}

bool OversamplingPatch::contains(int m) const {
  return std::binary_search(subdomains.begin(), subdomains.end(), m);
}

OversamplingPatch oversampling_patch(const FineGrid& grid, const DomainDecomposition& dd,
                                     bool target_is_interface, int target, int layers) {
  if (layers < 1) throw config_error("oversampling needs at least one layer");
  std::vector<std::array<int, 2>> seeds;
  if (target_is_interface) {
    if (target < 0 || target >= static_cast<int>(dd.interfaces.size())) throw config_error("invalid interface");
    seeds.push_back(dd.sub_ij(dd.interfaces[target].m_plus));
    seeds.push_back(dd.sub_ij(dd.interfaces[target].m_minus));
  } else {
    if (target < 0 || target >= dd.n_subdomains()) throw config_error("invalid subdomain");
    seeds.push_back(dd.sub_ij(target));
  }

  OversamplingPatch p;
  p.target_is_interface = target_is_interface;
  p.target = target;
  p.layers = layers;

  std::set<int> subs;
  for (const auto& [I, J] : seeds)
    for (int dj = -layers; dj <= layers; ++dj)
      for (int di = -layers; di <= layers; ++di) {
        const int Ii = I + di, Jj = J + dj;
        if (Ii >= 0 && Ii < dd.Mx && Jj >= 0 && Jj < dd.My) subs.insert(dd.sub_index(Ii, Jj));
      }
  p.subdomains.assign(subs.begin(), subs.end());

  for (int f = 0; f < grid.n_faces(); ++f) {
    const Face& face = grid.faces[f];
    const bool in_p = p.contains(dd.subdomain_of_cell(face.cell_plus));
    if (face.cell_minus < 0) {
      if (in_p) p.touches_domain_boundary = true;
      continue;
    }
    const bool in_m = p.contains(dd.subdomain_of_cell(face.cell_minus));
    if (in_p != in_m) p.gamma_out_faces.push_back(f);
  }
  return p;
}

}  // namespace lrbms
