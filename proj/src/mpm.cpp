#include "clothsim/mpm.hpp"

#include <cmath>

#include "clothsim/parallel.hpp"

namespace clothsim {

void SimConfig::validate() const {
  if (!(frame_dt > 0.0)) throw ConfigError("frame_dt must be > 0");
  if (substeps < 1) throw ConfigError("substeps must be >= 1");
  if (grid_resolution < 8) throw ConfigError("grid_resolution must be >= 8");
  if (frames < 0) throw ConfigError("frames must be >= 0");
  if (domain && !((domain->hi - domain->lo).minCoeff() > 0.0)) {
    throw ConfigError("domain box must have positive extent on all axes");
  }
}

int SimConfig::effective_threads() const {
  if (deterministic) return 1;
  return threads > 0 ? threads : worker_count_from_env();
}

double ParticleSystem::total_mass() const {
  double sum = 0.0;
  for (double m : mass) sum += m;
  return sum;
}

Vec3 ParticleSystem::total_momentum() const {
  Vec3 sum = Vec3::Zero();
  for (int p = 0; p < particle_count(); ++p) sum += mass[p] * v[p];
  return sum;
}

TriMesh ParticleSystem::current_mesh() const {
  TriMesh mesh;
  mesh.vertices.assign(x.begin(), x.begin() + num_vertices);
  mesh.faces = faces;
  return mesh;
}

ParticleSystem make_particles(const TriMesh& cloth, const std::vector<MaterialFrame>& rest,
                              double rho) {
  validate_mesh(cloth);
  if (rest.size() != cloth.faces.size()) {
    throw SimError("rest frame count does not match cloth face count");
  }
  if (!(rho > 0.0)) throw ConfigError("density must be > 0");

  ParticleSystem ps;
  ps.faces = cloth.faces;
  ps.num_vertices = cloth.vertex_count();
  ps.num_faces = cloth.face_count();
  const int n = ps.particle_count();
  ps.x.resize(n);
  ps.v.assign(n, Vec3::Zero());
  ps.mass.assign(n, 0.0);
  ps.C.assign(n, Mat3::Zero());
  ps.d.resize(ps.num_faces);
  ps.D_inv.resize(ps.num_faces);
  ps.rest_area.resize(ps.num_faces);

  for (int i = 0; i < ps.num_vertices; ++i) ps.x[i] = cloth.vertices[i];

  for (int f = 0; f < ps.num_faces; ++f) {
    const auto& tri = cloth.faces[f];
    const Vec3& a = cloth.vertices[tri[0]];
    const Vec3& b = cloth.vertices[tri[1]];
    const Vec3& c = cloth.vertices[tri[2]];
    const int p = ps.face_particle(f);
    ps.x[p] = (a + b + c) / 3.0;

    const double area = 0.5 * rest[f].D.col(0).cross(rest[f].D.col(1)).norm();
    const double face_mass = rho * area;  // unit thickness
    ps.rest_area[f] = area;
    ps.mass[p] = face_mass;
    for (int k = 0; k < 3; ++k) ps.mass[tri[k]] += face_mass / 3.0;

    ps.D_inv[f] = rest[f].D_inv;
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 cross = e1.cross(e2);
    ps.d[f].col(0) = e1;
    ps.d[f].col(1) = e2;
    ps.d[f].col(2) = cross / cross.norm();
  }

  for (int i = 0; i < ps.num_vertices; ++i) {
    if (!(ps.mass[i] > 0.0)) {
      throw MeshError("vertex " + std::to_string(i) + " belongs to no face; zero mass");
    }
  }
  return ps;
}

Vec3 gravity_direction(const SimConfig& config) {
  const double len = config.gravity.norm();
  return len > 0.0 ? Vec3(config.gravity / len) : Vec3(0.0, -1.0, 0.0);
}

Aabb default_domain(const TriMesh& cloth, const MeshSequence& colliders) {
  Aabb box = bounding_box(cloth);
  if (!colliders.frames.empty()) box.extend(bounding_box(colliders));
  const Vec3 pad = 0.1 * (box.hi - box.lo).cwiseMax(Vec3::Constant(1e-3));
  box.lo -= pad;
  box.hi += pad;
  return box;
}

namespace {

// Per-face elastic forces. d1, d2 respond through the vertices; d3 has no
// vertex footprint and couples to the grid through the face stencil.
struct FaceForce {
  Vec3 vertex[3];     // forces on vertices a, b, c
  Vec3 grid_dir;      // rest_area * g3, paired with (grad w . d3)
  bool active = false;
};

// Stress is dropped for elements outside this stretch range: the energy
// derivative divides by R11 and R22, so a crushed element produces
// unbounded forces under explicit integration.
constexpr double kStretchFloor = 0.05;
constexpr double kStretchCeil = 100.0;

FaceForce face_elastic_force(const ParticleSystem& ps, int f, const ElasticParams& params,
                             SimStats* stats) {
  FaceForce out;
  const Mat3 F = deformation_gradient(ps.d[f], ps.D_inv[f]);
  if (!(F.determinant() > 1e-12) || !F.allFinite()) {
    // Collapsed or inverted element this substep: drop its stress
    // instead of aborting the rollout.
    if (stats) ++stats->degenerate_faces;
    return out;
  }
  Mat3 P;
  try {
    const DeformationState state = qr_decompose(F);
    const double smallest = state.R.diagonal().minCoeff();
    const double largest = state.R.cwiseAbs().maxCoeff();
    if (smallest < kStretchFloor || largest > kStretchCeil) {
      if (stats) ++stats->degenerate_faces;
      return out;
    }
    P = first_piola(state, params);
  } catch (const SimError&) {
    if (stats) ++stats->degenerate_faces;
    return out;
  }
  const Mat3 G = ps.rest_area[f] * P * ps.D_inv[f].transpose();

  out.vertex[1] = -G.col(0);
  out.vertex[2] = -G.col(1);
  out.vertex[0] = G.col(0) + G.col(1);
  out.grid_dir = G.col(2);
  out.active = true;
  return out;
}

}  // namespace

void particle_to_grid(const ParticleSystem& ps, BackgroundGrid& grid, const ElasticParams& params,
                      double dt, SimStats* stats, bool strict_cfl) {
  grid.clear();

  // CFL guard: no particle may cross more than one cell per substep.
  double vmax2 = 0.0;
  for (int p = 0; p < ps.particle_count(); ++p) vmax2 = std::max(vmax2, ps.v[p].squaredNorm());
  if (std::sqrt(vmax2) * dt >= grid.h) {
    if (stats) ++stats->cfl_violations;
    if (strict_cfl) {
      throw SimError("CFL violation: max particle speed " + std::to_string(std::sqrt(vmax2)) +
                     " crosses a cell in dt " + std::to_string(dt));
    }
  }

  std::vector<Vec3> vertex_force(ps.num_vertices, Vec3::Zero());
  std::vector<FaceForce> face_forces(ps.num_faces);
  if (dt > 0.0) {
    for (int f = 0; f < ps.num_faces; ++f) {
      face_forces[f] = face_elastic_force(ps, f, params, stats);
      if (face_forces[f].active) {
        const auto& tri = ps.faces[f];
        for (int k = 0; k < 3; ++k) vertex_force[tri[k]] += face_forces[f].vertex[k];
      }
    }
  }

  for (int p = 0; p < ps.particle_count(); ++p) {
    const SplineStencil st = bspline_weights(ps.x[p], grid);
    const double m = ps.mass[p];
    const Mat3 affine = m * ps.C[p];
    const bool is_face = p >= ps.num_vertices;
    const int f = p - ps.num_vertices;
    const Vec3* impulse_dir = nullptr;
    if (is_face && face_forces[f].active) impulse_dir = &face_forces[f].grid_dir;

    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          const double w = st.weight(i, j, k);
          const int ix = st.base[0] + i;
          const int iy = st.base[1] + j;
          const int iz = st.base[2] + k;
          const int idx = grid.index(ix, iy, iz);
          grid.touch(idx);
          const Vec3 dx = grid.node_pos(ix, iy, iz) - ps.x[p];
          grid.mass[idx] += w * m;
          grid.vel[idx] += w * (m * ps.v[p] + affine * dx);
          if (!is_face) {
            grid.vel[idx] += dt * w * vertex_force[p];
          } else if (impulse_dir) {
            const Vec3 grad_w = st.weight_gradient(i, j, k);
            grid.vel[idx] -= dt * grad_w.dot(ps.d[f].col(2)) * (*impulse_dir);
          }
        }
      }
    }
  }

  if (stats && stats->collect_conservation) {
    const double pm = ps.total_mass();
    const double gm = grid.total_mass();
    stats->max_mass_error_rel =
        std::max(stats->max_mass_error_rel, std::abs(gm - pm) / std::max(pm, 1e-300));
  }
}

void grid_update(BackgroundGrid& grid, const Vec3& gravity, double dt, int threads) {
  const int res = grid.res;
  // Transfer validity bound: no node may advect material further than half
  // a cell per substep. Ordinary scenes stay far below this cap.
  const double speed_cap = dt > 0.0 ? 0.5 * grid.h / dt : 0.0;
  parallel_for(static_cast<int>(grid.active.size()), threads, [&](int a) {
    const int idx = grid.active[a];
    if (grid.mass[idx] > 0.0) {
      grid.vel[idx] /= grid.mass[idx];
      grid.vel[idx] += dt * gravity;
      if (dt > 0.0) {
        const double speed = grid.vel[idx].norm();
        if (speed > speed_cap) grid.vel[idx] *= speed_cap / speed;
      }
    } else {
      grid.vel[idx].setZero();
    }

    // Domain walls: zero the outward velocity component on the two-node
    // border band so the kernel support never reaches outside.
    const int iz = idx % res;
    const int iy = (idx / res) % res;
    const int ix = idx / (res * res);
    const int coords[3] = {ix, iy, iz};
    for (int axis = 0; axis < 3; ++axis) {
      if (coords[axis] <= 1 && grid.vel[idx][axis] < 0.0) grid.vel[idx][axis] = 0.0;
      if (coords[axis] >= res - 2 && grid.vel[idx][axis] > 0.0) grid.vel[idx][axis] = 0.0;
    }
  });
}

void grid_to_particle(const BackgroundGrid& grid, ParticleSystem& ps, double dt,
                      bool strict_domain, SimStats* stats, int threads) {
  const double inv_d = 4.0 / (grid.h * grid.h);
  // stencil validity needs grid coordinates in [0.5, res - 1.5]
  const Vec3 lo = grid.domain_lo() + Vec3::Constant(0.6 * grid.h);
  const Vec3 hi = grid.domain_hi() - Vec3::Constant(1.6 * grid.h);
  std::vector<uint8_t> clamped(ps.particle_count(), 0);

  parallel_for(ps.particle_count(), threads, [&](int p) {
    const SplineStencil st = bspline_weights(ps.x[p], grid);
    Vec3 v_new = Vec3::Zero();
    Mat3 b_mat = Mat3::Zero();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
          const double w = st.weight(i, j, k);
          const int idx = grid.index(st.base[0] + i, st.base[1] + j, st.base[2] + k);
          const Vec3& vn = grid.vel[idx];
          const Vec3 dx = grid.node_pos(st.base[0] + i, st.base[1] + j, st.base[2] + k) - ps.x[p];
          v_new += w * vn;
          b_mat += w * vn * dx.transpose();
        }
      }
    }
    ps.v[p] = v_new;
    ps.C[p] = inv_d * b_mat;
    ps.x[p] += dt * v_new;
    for (int axis = 0; axis < 3; ++axis) {
      if (ps.x[p][axis] < lo[axis]) {
        ps.x[p][axis] = lo[axis];
        clamped[p] = 1;
      } else if (ps.x[p][axis] > hi[axis]) {
        ps.x[p][axis] = hi[axis];
        clamped[p] = 1;
      }
    }
  });

  long long clamp_count = 0;
  for (uint8_t c : clamped) clamp_count += c;
  if (clamp_count > 0) {
    if (strict_domain) throw SimError("particle left the simulation domain");
    if (stats) stats->domain_clamps += clamp_count;
  }
}

void update_material_frames(ParticleSystem& ps, double dt, bool strict, SimStats* stats) {
  for (int f = 0; f < ps.num_faces; ++f) {
    const auto& tri = ps.faces[f];
    const Vec3& a = ps.x[tri[0]];
    const Vec3& b = ps.x[tri[1]];
    const Vec3& c = ps.x[tri[2]];
    const int p = ps.face_particle(f);

    ps.d[f].col(0) = b - a;
    ps.d[f].col(1) = c - a;
    const Vec3 face_cross = ps.d[f].col(0).cross(ps.d[f].col(1));
    const double area = 0.5 * face_cross.norm();
    if (!(area > kDegenerateAreaEps)) {
      if (strict) throw SimError("face " + std::to_string(f) + " collapsed to zero area");
      if (stats) ++stats->degenerate_faces;
    }

    Vec3 normal_dir = (Mat3::Identity() + dt * ps.C[p]) * ps.d[f].col(2);
    // The normal column only matters near unit length: expansion carries no
    // stress and compression is penalized. Clamping its magnitude stops the
    // velocity-gradient update from running away at sharp folds.
    const double len = normal_dir.norm();
    if (len > 2.0) {
      normal_dir *= 2.0 / len;
    } else if (len > 0.0 && len < 0.25) {
      normal_dir *= 0.25 / len;
    } else if (len == 0.0 && area > kDegenerateAreaEps) {
      normal_dir = face_cross / (2.0 * area);  // reseed from the face normal
    }
    ps.d[f].col(2) = normal_dir;
    ps.x[p] = (a + b + c) / 3.0;
  }
}

void substep(ParticleSystem& ps, BackgroundGrid& grid, ColliderGridFields& fields,
             const ColliderFrame* collider, const SimConfig& config, const ElasticParams& params,
             SimStats* stats) {
  const double dt = config.substep_dt();
  const int threads = config.effective_threads();

  particle_to_grid(ps, grid, params, dt, stats, config.strict_cfl);

  if (stats && stats->collect_conservation) {
    const Vec3 pm = ps.total_momentum();
    const Vec3 gm = grid.total_momentum();
    stats->max_momentum_error_rel = std::max(
        stats->max_momentum_error_rel, (gm - pm).norm() / std::max(pm.norm(), 1e-300));
  }

  grid_update(grid, config.gravity, dt, threads);

  if (collider) {
    fields.clear();
    rasterize_collider(*collider, grid, fields);
    const ProjectionStats proj = project_grid_velocities(grid, fields, threads);
    if (stats) {
      stats->min_rel_normal_after_projection =
          std::min(stats->min_rel_normal_after_projection, proj.min_rel_normal);
      stats->collider_touch_events += fields.touch_events;
      stats->collider_faces_rasterized += static_cast<long long>(collider->faces.size());
    }
  }

  grid_to_particle(grid, ps, dt, config.strict_domain, stats, threads);
  update_material_frames(ps, dt, false, stats);
  if (stats) ++stats->substeps;
}

MeshSequence simulate_sequence(const TriMesh& cloth0, const std::vector<MaterialFrame>& rest,
                               const MeshSequence& colliders, const PhysParams& params,
                               const SimConfig& config, SimStats* stats,
                               const FrameCallback& on_frame) {
  config.validate();
  params.validate();

  const bool has_collider = !colliders.frames.empty();
  if (has_collider) {
    validate_sequence(colliders);
    if (colliders.frame_count() > 1 && colliders.frame_count() < config.frames + 1) {
      throw SimError("collider sequence too short: " + std::to_string(colliders.frame_count()) +
                     " frames for " + std::to_string(config.frames) + " requested");
    }
  }

  ParticleSystem ps = make_particles(cloth0, rest, params.rho);
  const Aabb domain = config.domain ? *config.domain : default_domain(cloth0, colliders);
  BackgroundGrid grid(config.grid_resolution, domain);
  ColliderGridFields fields(has_collider ? config.grid_resolution : 8);

  MeshSequence out;
  out.topology = cloth0.faces;
  out.frame_dt = config.frame_dt;
  out.frames.push_back(cloth0.vertices);

  const bool static_collider = has_collider && colliders.frame_count() == 1;
  ColliderFrame static_frame;
  if (static_collider) {
    static_frame = collider_frame_at(colliders, 0, 0.0);
    static_frame.friction = config.friction;
  }
  for (int frame = 0; frame < config.frames; ++frame) {
    for (int s = 0; s < config.substeps; ++s) {
      ColliderFrame cf;
      const ColliderFrame* active = nullptr;
      if (static_collider) {
        active = &static_frame;
      } else if (has_collider) {
        cf = collider_frame_at(colliders, frame, static_cast<double>(s) / config.substeps);
        cf.friction = config.friction;
        active = &cf;
      }
      substep(ps, grid, fields, active, config, params.elastic, stats);
    }
    out.frames.emplace_back(ps.x.begin(), ps.x.begin() + ps.num_vertices);
    if (on_frame) on_frame(frame + 1, out.frames.back());
  }
  return out;
}

}  // namespace clothsim
