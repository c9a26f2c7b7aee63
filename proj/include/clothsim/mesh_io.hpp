#pragma once

#include <filesystem>
#include <string>

#include "clothsim/geometry.hpp"

namespace clothsim {

enum class DegenerateFacePolicy { Reject, Warn };

/// Wavefront OBJ, ASCII: `v x y z` and `f i j k` (1-based) records only;
/// other record types are ignored. Quads are rejected.
TriMesh load_mesh(const std::filesystem::path& path,
                  DegenerateFacePolicy policy = DegenerateFacePolicy::Reject);

void save_obj(const TriMesh& mesh, const std::filesystem::path& path);
void save_ply(const TriMesh& mesh, const std::filesystem::path& path);

/// Loads a mesh sequence from one of:
///  - a single .obj file (one-frame sequence),
///  - a directory of .obj files (lexicographic frame order),
///  - a manifest: a text file listing one mesh path per line,
///    resolved relative to the manifest's directory.
/// All frames must share the first frame's topology.
MeshSequence load_sequence(const std::filesystem::path& path, double frame_dt);

}  // namespace clothsim
