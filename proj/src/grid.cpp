#include "clothsim/grid.hpp"

#include <cmath>

namespace clothsim {

BackgroundGrid::BackgroundGrid(int res_nodes, const Aabb& domain) {
  if (res_nodes < 8) throw ConfigError("grid resolution must be >= 8 nodes per axis");
  const Vec3 extent = domain.hi - domain.lo;
  if (!(extent.minCoeff() > 0.0)) throw ConfigError("domain box must have positive extent");
  res = res_nodes;
  h = extent.maxCoeff() / (res - 1);
  // cover a cube centered on the requested box
  origin = 0.5 * (domain.lo + domain.hi) - Vec3::Constant(0.5 * h * (res - 1));
  const size_t n = static_cast<size_t>(res) * res * res;
  mass.assign(n, 0.0);
  vel.assign(n, Vec3::Zero());
  touched.assign(n, 0);
}

double BackgroundGrid::total_mass() const {
  double sum = 0.0;
  for (int idx : active) sum += mass[idx];
  return sum;
}

Vec3 BackgroundGrid::total_momentum() const {
  Vec3 sum = Vec3::Zero();
  for (int idx : active) sum += vel[idx];
  return sum;
}

SplineStencil bspline_weights(const Vec3& pos, const BackgroundGrid& grid) {
  SplineStencil st;
  for (int axis = 0; axis < 3; ++axis) {
    const double gx = (pos[axis] - grid.origin[axis]) / grid.h;
    if (!std::isfinite(gx)) {
      throw SimError("non-finite position on axis " + std::to_string(axis));
    }
    const int base = static_cast<int>(std::floor(gx - 0.5));
    if (base < 0 || base + 2 > grid.res - 1) {
      throw SimError("position outside grid interior (axis " + std::to_string(axis) +
                     ", grid coordinate " + std::to_string(gx) + ")");
    }
    st.base[axis] = base;
    const double fx = gx - base;  // in [0.5, 1.5]
    // offsets 0,1,2 at kernel arguments fx, fx-1, fx-2
    const double x0 = fx;
    const double x1 = fx - 1.0;
    const double x2 = fx - 2.0;
    st.w[axis][0] = 0.5 * (1.5 - x0) * (1.5 - x0);
    st.w[axis][1] = 0.75 - x1 * x1;
    st.w[axis][2] = 0.5 * (1.5 + x2) * (1.5 + x2);
    st.dw[axis][0] = (x0 - 1.5) / grid.h;
    st.dw[axis][1] = -2.0 * x1 / grid.h;
    st.dw[axis][2] = (x2 + 1.5) / grid.h;
  }
  return st;
}

}  // namespace clothsim
