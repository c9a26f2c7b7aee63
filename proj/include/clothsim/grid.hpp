#pragma once

#include <cstdint>
#include <vector>

#include "clothsim/geometry.hpp"

namespace clothsim {

/// Eulerian background grid: `res` nodes per axis with uniform spacing h,
/// covering a cube that contains the requested domain box. Only nodes
/// touched since the last clear() carry data; clear() is O(active).
struct BackgroundGrid {
  int res = 0;
  double h = 0.0;
  Vec3 origin = Vec3::Zero();

  std::vector<double> mass;
  std::vector<Vec3> vel;  // momentum during scatter, velocity after grid_update
  std::vector<int> active;
  std::vector<uint8_t> touched;

  BackgroundGrid(int res_nodes, const Aabb& domain);

  int index(int ix, int iy, int iz) const { return (ix * res + iy) * res + iz; }
  Vec3 node_pos(int ix, int iy, int iz) const { return origin + h * Vec3(ix, iy, iz); }
  Vec3 domain_lo() const { return origin; }
  Vec3 domain_hi() const { return origin + Vec3::Constant(h * (res - 1)); }

  void touch(int idx) {
    if (!touched[idx]) {
      touched[idx] = 1;
      mass[idx] = 0.0;
      vel[idx].setZero();
      active.push_back(idx);
    }
  }

  void clear() {
    for (int idx : active) touched[idx] = 0;
    active.clear();
  }

  double total_mass() const;
  Vec3 total_momentum() const;  // valid before grid_update converts to velocity
};

/// Quadratic B-spline stencil: 3 weights (and d/dx) per axis over the
/// 3x3x3 node neighborhood of a point.
struct SplineStencil {
  int base[3];
  double w[3][3];   // w[axis][offset]
  double dw[3][3];  // dN/dx, already divided by h

  double weight(int i, int j, int k) const { return w[0][i] * w[1][j] * w[2][k]; }
  Vec3 weight_gradient(int i, int j, int k) const {
    return Vec3(dw[0][i] * w[1][j] * w[2][k], w[0][i] * dw[1][j] * w[2][k],
                w[0][i] * w[1][j] * dw[2][k]);
  }
};

/// Throws SimError when pos is closer than one cell to the grid border.
SplineStencil bspline_weights(const Vec3& pos, const BackgroundGrid& grid);

}  // namespace clothsim
