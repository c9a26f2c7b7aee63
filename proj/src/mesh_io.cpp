#include "clothsim/mesh_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace clothsim {

namespace {

// %.17g round-trips doubles exactly through parse.
void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

int parse_obj_index(const std::string& token, int line_no) {
  // Faces may carry v/vt/vn; only the vertex index is used.
  size_t slash = token.find('/');
  const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
  try {
    size_t pos = 0;
    int idx = std::stoi(head, &pos);
    if (pos != head.size()) throw std::invalid_argument(head);
    return idx;
  } catch (const std::exception&) {
    throw MeshError("line " + std::to_string(line_no) + ": bad face index '" + token + "'");
  }
}

}  // namespace

TriMesh load_mesh(const std::filesystem::path& path, DegenerateFacePolicy policy) {
  std::ifstream in(path);
  if (!in) {
    throw MeshError("cannot open mesh file: " + path.string());
  }
  TriMesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x() >> v.y() >> v.z())) {
        throw MeshError(path.string() + " line " + std::to_string(line_no) +
                        ": malformed vertex record");
      }
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> indices;
      std::string token;
      while (ss >> token) {
        indices.push_back(parse_obj_index(token, line_no));
      }
      if (indices.size() != 3) {
        throw MeshError(path.string() + " line " + std::to_string(line_no) + ": face has " +
                        std::to_string(indices.size()) + " vertices; only triangles are supported");
      }
      std::array<int, 3> face;
      for (int k = 0; k < 3; ++k) {
        int idx = indices[k];
        // Negative OBJ indices are relative to the current vertex count.
        face[k] = idx < 0 ? static_cast<int>(mesh.vertices.size()) + idx : idx - 1;
      }
      mesh.faces.push_back(face);
    }
    // all other record types ignored
  }

  try {
    validate_mesh(mesh);
  } catch (const MeshError& err) {
    if (policy == DegenerateFacePolicy::Reject ||
        std::string(err.what()).find("degenerate") == std::string::npos) {
      throw MeshError(path.string() + ": " + err.what());
    }
    std::cerr << "warning: " << path.string() << ": " << err.what() << "\n";
  }
  return mesh;
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::string out;
  out.reserve(mesh.vertices.size() * 48 + mesh.faces.size() * 24);
  for (const Vec3& v : mesh.vertices) {
    out += "v ";
    append_double(out, v.x());
    out += ' ';
    append_double(out, v.y());
    out += ' ';
    append_double(out, v.z());
    out += '\n';
  }
  for (const auto& f : mesh.faces) {
    out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' +
           std::to_string(f[2] + 1) + '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw MeshError("cannot write mesh file: " + path.string());
  file << out;
}

void save_ply(const TriMesh& mesh, const std::filesystem::path& path) {
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  out += "element face " + std::to_string(mesh.faces.size()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : mesh.vertices) {
    append_double(out, v.x());
    out += ' ';
    append_double(out, v.y());
    out += ' ';
    append_double(out, v.z());
    out += '\n';
  }
  for (const auto& f : mesh.faces) {
    out += "3 " + std::to_string(f[0]) + ' ' + std::to_string(f[1]) + ' ' +
           std::to_string(f[2]) + '\n';
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw MeshError("cannot write mesh file: " + path.string());
  file << out;
}

MeshSequence load_sequence(const std::filesystem::path& path, double frame_dt) {
  namespace fs = std::filesystem;
  std::vector<fs::path> frame_paths;

  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".obj") {
        frame_paths.push_back(entry.path());
      }
    }
    std::sort(frame_paths.begin(), frame_paths.end());
    if (frame_paths.empty()) {
      throw MeshError("no .obj frames in directory: " + path.string());
    }
  } else if (path.extension() == ".obj") {
    frame_paths.push_back(path);
  } else {
    // manifest: one mesh path per line, relative to the manifest
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open sequence manifest: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      const auto start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos || line[start] == '#') continue;
      const auto end = line.find_last_not_of(" \t\r");
      fs::path p = line.substr(start, end - start + 1);
      frame_paths.push_back(p.is_absolute() ? p : path.parent_path() / p);
    }
    if (frame_paths.empty()) {
      throw MeshError("sequence manifest lists no frames: " + path.string());
    }
  }

  MeshSequence seq;
  seq.frame_dt = frame_dt;
  for (size_t i = 0; i < frame_paths.size(); ++i) {
    TriMesh mesh = load_mesh(frame_paths[i]);
    if (i == 0) {
      seq.topology = mesh.faces;
    } else if (mesh.faces != seq.topology) {
      throw MeshError("sequence frame " + frame_paths[i].string() +
                      " does not match the topology of the first frame");
    }
    seq.frames.push_back(std::move(mesh.vertices));
  }
  validate_sequence(seq);
  return seq;
}

}  // namespace clothsim
