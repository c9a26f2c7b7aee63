#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "clothsim/collider.hpp"
#include "clothsim/grid.hpp"
#include "clothsim/params.hpp"
#include "clothsim/restshape.hpp"

namespace clothsim {

struct SimConfig {
  double frame_dt = 0.04;
  int substeps = 400;
  int grid_resolution = 200;  // nodes per axis
  std::optional<Aabb> domain;  // default: scene bounds inflated by 10%
  Vec3 gravity = Vec3(0.0, -9.8, 0.0);
  bool deterministic = true;
  int frames = 0;  // output frames beyond the initial one

  double friction = -1.0;  // Coulomb coefficient, < 0 disables
  bool strict_cfl = false;
  bool strict_domain = false;
  int threads = 0;  // 0: CLOTHSIM_THREADS / hardware; deterministic forces 1

  void validate() const;
  double substep_dt() const { return frame_dt / substeps; }
  int effective_threads() const;
};

/// Per-run diagnostics; conservation sums are gathered only when
/// collect_conservation is set (costs one pass per substep).
struct SimStats {
  bool collect_conservation = false;

  long long substeps = 0;
  long long cfl_violations = 0;
  long long domain_clamps = 0;
  long long degenerate_faces = 0;
  double max_mass_error_rel = 0.0;
  double max_momentum_error_rel = 0.0;
  double min_rel_normal_after_projection = 0.0;
  long long collider_touch_events = 0;
  long long collider_faces_rasterized = 0;
};

/// Simulation state: vertex particles (mesh vertices, first) followed by
/// one quadrature particle per face carrying the material frames.
struct ParticleSystem {
  std::vector<std::array<int, 3>> faces;
  int num_vertices = 0;
  int num_faces = 0;

  // all particles, vertices first
  std::vector<Vec3> x;
  std::vector<Vec3> v;
  std::vector<double> mass;
  std::vector<Mat3> C;  // APIC affine velocity state, doubles as grad v

  // face particles only, indexed by face
  std::vector<Mat3> d;      // deformed material directions
  std::vector<Mat3> D_inv;  // rest frame inverses
  std::vector<double> rest_area;

  int particle_count() const { return num_vertices + num_faces; }
  int face_particle(int f) const { return num_vertices + f; }

  double total_mass() const;
  Vec3 total_momentum() const;
  TriMesh current_mesh() const;
};

/// Builds the particle system from the cloth mesh and its rest frames.
/// Face particles get rho * rest area; vertices get a lumped third of
/// every incident face's rest mass.
ParticleSystem make_particles(const TriMesh& cloth, const std::vector<MaterialFrame>& rest,
                              double rho);

/// Scene domain: union of cloth and collider bounds inflated by 10%.
Aabb default_domain(const TriMesh& cloth, const MeshSequence& colliders);

/// Unit gravity direction; falls back to -y when gravity is zero.
Vec3 gravity_direction(const SimConfig& config);

void particle_to_grid(const ParticleSystem& ps, BackgroundGrid& grid, const ElasticParams& params,
                      double dt, SimStats* stats = nullptr, bool strict_cfl = false);

void grid_update(BackgroundGrid& grid, const Vec3& gravity, double dt, int threads = 1);

void grid_to_particle(const BackgroundGrid& grid, ParticleSystem& ps, double dt,
                      bool strict_domain = false, SimStats* stats = nullptr, int threads = 1);

void update_material_frames(ParticleSystem& ps, double dt, bool strict = false,
                            SimStats* stats = nullptr);

/// One symplectic step: scatter, grid momentum update, collider
/// projection, gather, material frame update.
void substep(ParticleSystem& ps, BackgroundGrid& grid, ColliderGridFields& fields,
             const ColliderFrame* collider, const SimConfig& config, const ElasticParams& params,
             SimStats* stats = nullptr);

/// Called after each completed frame (1-based) with the new vertex array.
using FrameCallback = std::function<void(int frame, const std::vector<Vec3>& vertices)>;

/// Rolls the cloth forward config.frames frames against the collider
/// sequence. Output frame 0 is the initial mesh. Collider positions are
/// interpolated linearly across the substeps of each frame.
MeshSequence simulate_sequence(const TriMesh& cloth0, const std::vector<MaterialFrame>& rest,
                               const MeshSequence& colliders, const PhysParams& params,
                               const SimConfig& config, SimStats* stats = nullptr,
                               const FrameCallback& on_frame = nullptr);

}  // namespace clothsim
