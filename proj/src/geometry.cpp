#include "clothsim/geometry.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace clothsim {

void validate_mesh(const TriMesh& mesh, double area_eps) {
  const int nv = mesh.vertex_count();
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& face = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      if (face[k] < 0 || face[k] >= nv) {
        throw MeshError("face " + std::to_string(f) + " references vertex " +
                        std::to_string(face[k]) + " out of range [0, " + std::to_string(nv) + ")");
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw MeshError("face " + std::to_string(f) + " has repeated vertex indices");
    }
    const Vec3& a = mesh.vertices[face[0]];
    const Vec3& b = mesh.vertices[face[1]];
    const Vec3& c = mesh.vertices[face[2]];
    const double area = 0.5 * (b - a).cross(c - a).norm();
    if (!(area > area_eps)) {
      throw MeshError("face " + std::to_string(f) + " is degenerate (area " +
                      std::to_string(area) + ")");
    }
  }
}

TriMesh MeshSequence::mesh_at(int frame) const {
  if (frame < 0 || frame >= frame_count()) {
    throw MeshError("sequence frame " + std::to_string(frame) + " out of range");
  }
  return TriMesh{frames[frame], topology};
}

void validate_sequence(const MeshSequence& seq) {
  if (!(seq.frame_dt > 0.0)) {
    throw MeshError("sequence frame_dt must be > 0");
  }
  size_t expected = seq.frames.empty() ? 0 : seq.frames.front().size();
  for (size_t i = 0; i < seq.frames.size(); ++i) {
    if (seq.frames[i].size() != expected) {
      throw MeshError("sequence frame " + std::to_string(i) + " has " +
                      std::to_string(seq.frames[i].size()) + " vertices, expected " +
                      std::to_string(expected));
    }
  }
  if (!seq.frames.empty()) {
    validate_mesh(seq.mesh_at(0));
  }
}

FaceFrame face_frame(const Vec3& a, const Vec3& b, const Vec3& c) {
  FaceFrame out;
  out.barycenter = (a + b + c) / 3.0;
  const Vec3 cross = (b - a).cross(c - a);
  const double len = cross.norm();
  out.area = 0.5 * len;
  out.normal = len > 0.0 ? Vec3(cross / len) : Vec3::Zero();
  return out;
}

std::vector<FaceFrame> face_frames(const TriMesh& mesh) {
  std::vector<FaceFrame> out(mesh.faces.size());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& face = mesh.faces[f];
    out[f] = face_frame(mesh.vertices[face[0]], mesh.vertices[face[1]], mesh.vertices[face[2]]);
  }
  return out;
}

MaterialFrame material_frame_from_edges(const Vec3& e1, const Vec3& e2, int face_index) {
  const Vec3 cross = e1.cross(e2);
  const double len = cross.norm();
  if (!(0.5 * len > kDegenerateAreaEps)) {
    throw MeshError("face " + std::to_string(face_index) +
                    " has collinear edges; material frame is singular");
  }
  MaterialFrame frame;
  frame.D.col(0) = e1;
  frame.D.col(1) = e2;
  frame.D.col(2) = cross / len;
  frame.D_inv = frame.D.inverse();
  return frame;
}

std::vector<MaterialFrame> material_frames(const TriMesh& mesh) {
  std::vector<MaterialFrame> out(mesh.faces.size());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& face = mesh.faces[f];
    const Vec3& a = mesh.vertices[face[0]];
    out[f] = material_frame_from_edges(mesh.vertices[face[1]] - a, mesh.vertices[face[2]] - a, f);
  }
  return out;
}

std::vector<Edge> edge_vectors(const TriMesh& mesh) {
  std::map<std::pair<int, int>, bool> seen;
  for (const auto& face : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      int a = face[k];
      int b = face[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      seen.emplace(std::make_pair(a, b), true);
    }
  }
  std::vector<Edge> out;
  out.reserve(seen.size());
  for (const auto& [key, _] : seen) {
    out.push_back(Edge{key.first, key.second, mesh.vertices[key.second] - mesh.vertices[key.first]});
  }
  return out;
}

bool is_closed_manifold(const TriMesh& mesh) {
  // Count directed edges; closed + consistently oriented means every
  // undirected edge appears once in each direction.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& face : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = face[k];
      const int b = face[(k + 1) % 3];
      if (++directed[{a, b}] > 1) return false;
    }
  }
  for (const auto& [key, count] : directed) {
    auto it = directed.find({key.second, key.first});
    if (it == directed.end() || it->second != 1) return false;
  }
  return true;
}

Aabb bounding_box(const TriMesh& mesh) {
  Aabb box;
  for (const Vec3& v : mesh.vertices) box.extend(v);
  return box;
}

Aabb bounding_box(const MeshSequence& seq) {
  Aabb box;
  for (const auto& frame : seq.frames) {
    for (const Vec3& v : frame) box.extend(v);
  }
  return box;
}

}  // namespace clothsim
