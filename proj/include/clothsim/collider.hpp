#pragma once

#include <vector>

#include "clothsim/grid.hpp"

namespace clothsim {

/// Collider state at one instant: per-face frames plus face velocities.
/// friction < 0 disables the optional Coulomb clamp.
struct ColliderFrame {
  std::vector<FaceFrame> faces;
  std::vector<Vec3> face_velocities;
  double friction = -1.0;
};

/// Collider quantities extended to grid nodes by B-spline transfer.
/// Nodes where the accumulated normals cancel are marked sticky.
struct ColliderGridFields {
  int res = 0;
  std::vector<Vec3> vc;
  std::vector<Vec3> nc;
  std::vector<double> wc;
  std::vector<uint8_t> sticky;
  std::vector<int> active;
  std::vector<uint8_t> touched;
  double friction = -1.0;
  long long touch_events = 0;  // (face, node) scatter writes, <= 27 * face count

  explicit ColliderGridFields(int res_nodes);

  void touch(int idx) {
    if (!touched[idx]) {
      touched[idx] = 1;
      wc[idx] = 0.0;
      vc[idx].setZero();
      nc[idx].setZero();
      sticky[idx] = 0;
      active.push_back(idx);
    }
  }

  void clear() {
    for (int idx : active) touched[idx] = 0;
    active.clear();
    touch_events = 0;
  }
};

/// Transfers face velocities and normals to nearby grid nodes and
/// normalizes per node. Work is proportional to the face count.
void rasterize_collider(const ColliderFrame& collider, const BackgroundGrid& grid,
                        ColliderGridFields& fields);

struct ProjectionStats {
  double min_rel_normal = 0.0;  // min (v - v^c) . n^c over colliding nodes
  int projected_nodes = 0;
};

/// Removes the inward normal component of the grid velocity relative to
/// the collider at every colliding node. Nodes with w^c = 0 are untouched.
ProjectionStats project_grid_velocities(BackgroundGrid& grid, const ColliderGridFields& fields,
                                        int threads = 1);

/// Per-frame collider frames with face velocities from forward differences
/// of barycenters; the last frame reuses the previous velocity and a
/// single-frame sequence gets zero velocities.
std::vector<ColliderFrame> collider_frames_from_sequence(const MeshSequence& seq);

/// Collider state partway through frame `frame` (fraction s in [0, 1]),
/// with vertex positions interpolated linearly toward frame + 1 and face
/// velocities constant across the frame.
ColliderFrame collider_frame_at(const MeshSequence& seq, int frame, double s);

}  // namespace clothsim
