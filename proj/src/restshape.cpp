#include "clothsim/restshape.hpp"

#include <cmath>

namespace clothsim {

void RestShapeParam::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("rest shape alpha must be in [0, 1], got " + std::to_string(alpha));
  }
  if (std::abs(gravity_dir.norm() - 1.0) > 1e-12) {
    throw ConfigError("gravity direction must be unit length");
  }
}

EdgeDecomposition decompose_edge(const Vec3& e, const Vec3& gravity_dir) {
  EdgeDecomposition out;
  out.along_gravity = e.dot(gravity_dir) * gravity_dir;
  out.perpendicular = e - out.along_gravity;
  return out;
}

Vec3 apply_rest_alpha(const Vec3& e, double alpha, const Vec3& gravity_dir) {
  // Exact passthrough keeps the alpha = 1 pipeline bit-identical to
  // rest frames taken directly from the canonical mesh.
  if (alpha == 1.0) return e;
  const EdgeDecomposition d = decompose_edge(e, gravity_dir);
  return d.perpendicular + alpha * d.along_gravity;
}

std::vector<MaterialFrame> build_rest_state(const TriMesh& canonical, const RestShapeParam& param) {
  param.validate();
  std::vector<MaterialFrame> out(canonical.faces.size());
  for (int f = 0; f < canonical.face_count(); ++f) {
    const auto& face = canonical.faces[f];
    const Vec3& a = canonical.vertices[face[0]];
    const Vec3 e1 = apply_rest_alpha(canonical.vertices[face[1]] - a, param.alpha, param.gravity_dir);
    const Vec3 e2 = apply_rest_alpha(canonical.vertices[face[2]] - a, param.alpha, param.gravity_dir);
    try {
      out[f] = material_frame_from_edges(e1, e2, f);
    } catch (const MeshError&) {
      throw MeshError("face " + std::to_string(f) + " degenerates under rest alpha " +
                      std::to_string(param.alpha));
    }
  }
  return out;
}

}  // namespace clothsim
