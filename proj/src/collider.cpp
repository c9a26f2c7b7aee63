#include "clothsim/collider.hpp"

#include <cmath>

#include "clothsim/parallel.hpp"

namespace clothsim {

namespace {
constexpr double kNormalCancelEps = 1e-8;
// Inward test epsilon: re-deriving v_rel from a projected velocity leaves
// rounding noise ~1e-16 |v|; without this margin a second projection pass
// would touch bits again.
constexpr double kInwardEps = 1e-13;
}

ColliderGridFields::ColliderGridFields(int res_nodes) : res(res_nodes) {
  const size_t n = static_cast<size_t>(res) * res * res;
  vc.assign(n, Vec3::Zero());
  nc.assign(n, Vec3::Zero());
  wc.assign(n, 0.0);
  sticky.assign(n, 0);
  touched.assign(n, 0);
}

void rasterize_collider(const ColliderFrame& collider, const BackgroundGrid& grid,
                        ColliderGridFields& fields) {
  if (collider.faces.size() != collider.face_velocities.size()) {
    throw SimError("collider faces and velocities disagree in length");
  }
  fields.friction = collider.friction;

  for (size_t f = 0; f < collider.faces.size(); ++f) {
    const SplineStencil st = bspline_weights(collider.faces[f].barycenter, grid);
    const Vec3& vf = collider.face_velocities[f];
    const Vec3& nf = collider.faces[f].normal;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          const double w = st.weight(i, j, k);
          const int idx = grid.index(st.base[0] + i, st.base[1] + j, st.base[2] + k);
          fields.touch(idx);
          fields.wc[idx] += w;
          fields.vc[idx] += w * vf;
          fields.nc[idx] += w * nf;
          ++fields.touch_events;
        }
      }
    }
  }

  for (int idx : fields.active) {
    if (fields.wc[idx] > 0.0) {
      fields.vc[idx] /= fields.wc[idx];
      const double len = fields.nc[idx].norm();
      if (len < kNormalCancelEps) {
        // Opposing faces cancelled the normal; no tangent plane exists,
        // so the node sticks to the collider velocity.
        fields.sticky[idx] = 1;
        fields.nc[idx].setZero();
      } else {
        fields.nc[idx] /= len;
      }
    }
  }
}

ProjectionStats project_grid_velocities(BackgroundGrid& grid, const ColliderGridFields& fields,
                                        int threads) {
  ProjectionStats stats;
  std::vector<double> rel_normal(fields.active.size(), 0.0);

  parallel_for(static_cast<int>(fields.active.size()), threads, [&](int a) {
    const int idx = fields.active[a];
    if (!(fields.wc[idx] > 0.0)) return;
    // nodes no particle scattered to carry no material velocity and are
    // never gathered from
    if (!grid.touched[idx]) return;
    Vec3& v = grid.vel[idx];
    if (fields.sticky[idx]) {
      v = fields.vc[idx];
      return;
    }
    Vec3 v_rel = v - fields.vc[idx];
    const double vn = v_rel.dot(fields.nc[idx]);
    if (vn < -kInwardEps) {
      v_rel -= vn * fields.nc[idx];
      if (fields.friction >= 0.0) {
        const double vt_norm = v_rel.norm();
        if (vt_norm > 0.0) {
          v_rel *= std::max(0.0, 1.0 - fields.friction * (-vn) / vt_norm);
        }
      }
    }
    v = v_rel + fields.vc[idx];
    rel_normal[a] = (v - fields.vc[idx]).dot(fields.nc[idx]);
  });

  for (size_t a = 0; a < fields.active.size(); ++a) {
    const int idx = fields.active[a];
    if (!(fields.wc[idx] > 0.0)) continue;
    ++stats.projected_nodes;
    stats.min_rel_normal = std::min(stats.min_rel_normal, rel_normal[a]);
  }
  return stats;
}

std::vector<ColliderFrame> collider_frames_from_sequence(const MeshSequence& seq) {
  validate_sequence(seq);
  const int n = seq.frame_count();
  if (n == 0) throw MeshError("collider sequence has no frames");

  std::vector<std::vector<FaceFrame>> frames(n);
  for (int t = 0; t < n; ++t) {
    frames[t] = face_frames(seq.mesh_at(t));
  }

  std::vector<ColliderFrame> out(n);
  const size_t nf = seq.topology.size();
  for (int t = 0; t < n; ++t) {
    out[t].faces = frames[t];
    out[t].face_velocities.assign(nf, Vec3::Zero());
    if (n >= 2) {
      const int lead = std::min(t, n - 2);  // last frame reuses the previous velocity
      for (size_t f = 0; f < nf; ++f) {
        out[t].face_velocities[f] =
            (frames[lead + 1][f].barycenter - frames[lead][f].barycenter) / seq.frame_dt;
      }
    }
  }
  return out;
}

ColliderFrame collider_frame_at(const MeshSequence& seq, int frame, double s) {
  const int n = seq.frame_count();
  if (frame < 0 || frame >= n) {
    throw SimError("collider frame " + std::to_string(frame) + " out of range");
  }
  const int next = std::min(frame + 1, n - 1);
  const auto& v0 = seq.frames[frame];
  const auto& v1 = seq.frames[next];

  ColliderFrame out;
  out.faces.resize(seq.topology.size());
  out.face_velocities.resize(seq.topology.size());
  for (size_t f = 0; f < seq.topology.size(); ++f) {
    const auto& tri = seq.topology[f];
    const Vec3 a = v0[tri[0]] + s * (v1[tri[0]] - v0[tri[0]]);
    const Vec3 b = v0[tri[1]] + s * (v1[tri[1]] - v0[tri[1]]);
    const Vec3 c = v0[tri[2]] + s * (v1[tri[2]] - v0[tri[2]]);
    out.faces[f] = face_frame(a, b, c);
    const Vec3 bary0 = (v0[tri[0]] + v0[tri[1]] + v0[tri[2]]) / 3.0;
    const Vec3 bary1 = (v1[tri[0]] + v1[tri[1]] + v1[tri[2]]) / 3.0;
    out.face_velocities[f] = (bary1 - bary0) / seq.frame_dt;
  }
  return out;
}

}  // namespace clothsim
