#pragma once

#include <vector>

#include "clothsim/geometry.hpp"

namespace clothsim {

/// Gravity compensation factor for rest geometry built from an observed,
/// already gravity-loaded mesh. alpha = 1 keeps the mesh as-is; alpha = 0
/// removes the gravity-aligned component of every edge.
struct RestShapeParam {
  double alpha = 1.0;
  Vec3 gravity_dir = Vec3(0.0, -1.0, 0.0);

  void validate() const;
};

struct EdgeDecomposition {
  Vec3 along_gravity;  // (e . g) g
  Vec3 perpendicular;  // e - along_gravity
};

EdgeDecomposition decompose_edge(const Vec3& e, const Vec3& gravity_dir);

Vec3 apply_rest_alpha(const Vec3& e, double alpha, const Vec3& gravity_dir);

/// Per-face rest frames from alpha-compensated edge vectors. At alpha = 1
/// this reproduces material_frames(canonical) bit for bit.
std::vector<MaterialFrame> build_rest_state(const TriMesh& canonical, const RestShapeParam& param);

}  // namespace clothsim
