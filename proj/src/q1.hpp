#pragma once

// Bilinear Q1 shape machinery on rectangles; corner order LL, LR, UL, UR.

#include <Eigen/Dense>
#include <array>
#include <cmath>

namespace lrbms::q1 {

inline double shape(int k, double xh, double yh) {
  const double sx = (k & 1) ? xh : 1.0 - xh;
  const double sy = (k & 2) ? yh : 1.0 - yh;
  return sx * sy;
}

// reference-cell gradient, scaled to physical by (1/hx, 1/hy)
inline std::array<double, 2> shape_grad(int k, double xh, double yh, double hx, double hy) {
  const double dx = ((k & 1) ? 1.0 : -1.0) * ((k & 2) ? yh : 1.0 - yh);
  const double dy = ((k & 2) ? 1.0 : -1.0) * ((k & 1) ? xh : 1.0 - xh);
  return {dx / hx, dy / hy};
}

constexpr double kGauss2[2] = {0.5 - 0.28867513459481287, 0.5 + 0.28867513459481287};

inline Eigen::Matrix4d stiffness(double hx, double hy) {
  Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
  for (double gx : kGauss2)
    for (double gy : kGauss2) {
      const double w = 0.25 * hx * hy;
      for (int a = 0; a < 4; ++a) {
        const auto ga = shape_grad(a, gx, gy, hx, hy);
        for (int b = 0; b < 4; ++b) {
          const auto gb = shape_grad(b, gx, gy, hx, hy);
          K(a, b) += w * (ga[0] * gb[0] + ga[1] * gb[1]);
        }
      }
    }
  return K;
}

inline Eigen::Matrix4d mass(double hx, double hy) {
  Eigen::Matrix4d M;
  const double s = hx * hy / 36.0;
  M << 4, 2, 2, 1, 2, 4, 1, 2, 2, 1, 4, 2, 1, 2, 2, 4;
  return s * M;
}

inline Eigen::Vector4d load(double hx, double hy) {
  return Eigen::Vector4d::Constant(0.25 * hx * hy);
}

// Side of a cell carrying a given face: fixed reference coordinate and the
// mapping of the face parameter t in [0,1] (along vertex_a -> vertex_b).
struct FaceSide {
  bool vertical;
  double fixed;  // xh for vertical faces, yh for horizontal ones
  std::array<double, 2> point(double t) const {
    return vertical ? std::array<double, 2>{fixed, t} : std::array<double, 2>{t, fixed};
  }
};

}  // namespace lrbms::q1
