#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "clothsim/common.hpp"

namespace clothsim {

// Area below this (scene units^2) counts as degenerate.
inline constexpr double kDegenerateAreaEps = 1e-12;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
};

/// Validates index bounds, repeated indices and face areas.
/// Throws MeshError naming the first offending face.
void validate_mesh(const TriMesh& mesh, double area_eps = kDegenerateAreaEps);

/// Time-indexed vertex arrays over a fixed topology.
struct MeshSequence {
  std::vector<std::array<int, 3>> topology;
  std::vector<std::vector<Vec3>> frames;
  double frame_dt = 0.04;

  int frame_count() const { return static_cast<int>(frames.size()); }
  TriMesh mesh_at(int frame) const;
};

void validate_sequence(const MeshSequence& seq);

struct FaceFrame {
  Vec3 barycenter = Vec3::Zero();
  Vec3 normal = Vec3::Zero();  // zero when the face is degenerate
  double area = 0.0;
};

/// Columns of D are the two rest edge vectors and the rest unit normal.
struct MaterialFrame {
  Mat3 D = Mat3::Identity();
  Mat3 D_inv = Mat3::Identity();
};

FaceFrame face_frame(const Vec3& a, const Vec3& b, const Vec3& c);
std::vector<FaceFrame> face_frames(const TriMesh& mesh);

/// Builds D = [b-a, c-a, n] per face. Throws MeshError on singular D.
MaterialFrame material_frame_from_edges(const Vec3& e1, const Vec3& e2, int face_index);
std::vector<MaterialFrame> material_frames(const TriMesh& mesh);

struct Edge {
  int a = 0;  // a < b; vector points a -> b
  int b = 0;
  Vec3 vector = Vec3::Zero();
};

/// Unique undirected edges, sorted by (a, b).
std::vector<Edge> edge_vectors(const TriMesh& mesh);

/// True when every edge is shared by exactly two faces with opposite winding.
bool is_closed_manifold(const TriMesh& mesh);

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = Vec3::Constant(std::numeric_limits<double>::lowest());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void extend(const Aabb& other) {
    lo = lo.cwiseMin(other.lo);
    hi = hi.cwiseMax(other.hi);
  }
};

Aabb bounding_box(const TriMesh& mesh);
Aabb bounding_box(const MeshSequence& seq);

}  // namespace clothsim
