// Acceptance suite: one scenario per criterion, one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "clothsim/config.hpp"
#include "clothsim/mesh_io.hpp"
#include "clothsim/metrics.hpp"
#include "meshgen.hpp"

using namespace clothsim;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw Failure(message);
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Aabb box_of(const Vec3& lo, const Vec3& hi) {
  Aabb out;
  out.lo = lo;
  out.hi = hi;
  return out;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

const ElasticParams kDefaults{100.0, 0.3, 500.0, 500.0};

// ---------------------------------------------------------------- criterion 1

void criterion_gradient_check(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  const int samples = 1000;
  for (int trial = 0; trial < samples; ++trial) {
    const Mat3 F = testing::random_admissible_F(rng);
    const Mat3 analytic = first_piola(qr_decompose(F), kDefaults);
    Mat3 numeric;
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        Mat3 fp = F, fm = F;
        fp(i, j) += h;
        fm(i, j) -= h;
        numeric(i, j) =
            (psi_total(qr_decompose(fp), kDefaults) - psi_total(qr_decompose(fm), kDefaults)) /
            (2.0 * h);
      }
    }
    worst = std::max(worst, (analytic - numeric).norm() / std::max(1.0, numeric.norm()));
  }
  const double elapsed = seconds_since(t0);
  require(worst < 1e-4, "relative Frobenius error " + fmt(worst) + " >= 1e-4");
  require(elapsed < 10.0, "runtime " + fmt(elapsed) + "s >= 10s");
  detail = std::to_string(samples) + " samples, max rel error " + fmt(worst) + ", " +
           fmt(elapsed) + "s";
}

// ---------------------------------------------------------------- criterion 2

void criterion_rotation_invariance(std::string& detail) {
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Mat3 F = testing::random_admissible_F(rng);
    const Mat3 omega = testing::random_rotation(rng);
    const double base = psi_total(qr_decompose(F), kDefaults);
    const double rotated = psi_total(qr_decompose(omega * F), kDefaults);
    const double err = std::abs(rotated - base) / std::max(1.0, base);
    worst = std::max(worst, err);
    require(err < 1e-8, "invariance violated: " + fmt(err));
  }
  detail = "1000 samples, max normalized deviation " + fmt(worst);
}

// ---------------------------------------------------------------- criterion 3

void criterion_conservation(std::string& detail) {
  // mass, under gravity and full stress
  {
    const TriMesh patch = testing::make_patch(6, 6, 0.5, 0.5, 0.3);
    ParticleSystem ps = make_particles(patch, material_frames(patch), 1.0);
    SimConfig config;
    config.frame_dt = 0.04;
    config.substeps = 100;
    config.grid_resolution = 48;
    BackgroundGrid grid(48, box_of(Vec3(-1, -1, -1), Vec3(1, 1, 1)));
    ColliderGridFields fields(48);
    SimStats stats;
    stats.collect_conservation = true;
    for (int s = 0; s < 100; ++s) {
      substep(ps, grid, fields, nullptr, config, kDefaults, &stats);
    }
    require(stats.max_mass_error_rel < 1e-10,
            "mass error " + fmt(stats.max_mass_error_rel) + " >= 1e-10");
  }

  // momentum, with zero stress, zero gravity, no collider
  ElasticParams no_stress{1e-30, 0.0, 0.0, 0.0};
  const TriMesh patch = testing::make_patch(6, 6, 0.5, 0.5, 0.0);
  ParticleSystem ps = make_particles(patch, material_frames(patch), 1.0);
  std::mt19937_64 rng(1003);
  for (auto& v : ps.v) {
    v = Vec3(testing::uniform(rng, -0.2, 0.2), testing::uniform(rng, -0.2, 0.2),
             testing::uniform(rng, -0.2, 0.2));
  }
  SimConfig config;
  config.frame_dt = 0.04;
  config.substeps = 100;
  config.grid_resolution = 48;
  config.gravity = Vec3::Zero();
  BackgroundGrid grid(48, box_of(Vec3(-1, -1, -1), Vec3(1, 1, 1)));
  ColliderGridFields fields(48);
  SimStats stats;
  stats.collect_conservation = true;
  for (int s = 0; s < 100; ++s) {
    substep(ps, grid, fields, nullptr, config, no_stress, &stats);
  }
  require(stats.max_mass_error_rel < 1e-10,
          "mass error " + fmt(stats.max_mass_error_rel) + " >= 1e-10");
  require(stats.max_momentum_error_rel < 1e-10,
          "momentum error " + fmt(stats.max_momentum_error_rel) + " >= 1e-10");
  detail = "100 substeps; mass err " + fmt(stats.max_mass_error_rel) + ", momentum err " +
           fmt(stats.max_momentum_error_rel);
}

// ---------------------------------------------------------------- criterion 4

void criterion_free_fall(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const TriMesh patch = testing::make_patch(10, 10, 1.0, 1.0, 0.0);
  SimConfig config;
  config.frame_dt = 0.04;
  config.substeps = 400;
  config.grid_resolution = 64;
  config.frames = 25;  // one simulated second
  config.domain = box_of(Vec3(-1.2, -5.8, -1.2), Vec3(1.2, 0.4, 1.2));
  PhysParams params;

  const MeshSequence out =
      simulate_sequence(patch, material_frames(patch), MeshSequence{}, params, config);
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& v : out.frames.back()) centroid += v;
  centroid /= static_cast<double>(out.frames.back().size());
  const double expected = -0.5 * 9.8;  // t = 1
  const double rel_err = std::abs(centroid.y() - expected) / std::abs(expected);
  const double elapsed = seconds_since(t0);
  require(rel_err < 0.01, "centroid error " + fmt(100.0 * rel_err) + "% >= 1%");
  require(elapsed < 120.0, "runtime " + fmt(elapsed) + "s >= 2min");
  detail = "centroid y " + fmt(centroid.y()) + " vs " + fmt(expected) + " (" +
           fmt(100.0 * rel_err) + "% err), " + fmt(elapsed) + "s";
}

// ---------------------------------------------------------------- criterion 5

struct DropResult {
  MeshSequence frames;
  SimStats stats;
  double cell_size = 0.0;
};

DropResult run_drop(const TriMesh& collider_mesh, int frames) {
  const TriMesh cloth = testing::make_patch(20, 20, 1.6, 1.6, 0.6);
  MeshSequence colliders;
  colliders.topology = collider_mesh.faces;
  colliders.frames = {collider_mesh.vertices};
  colliders.frame_dt = 0.04;

  SimConfig config;
  config.frame_dt = 0.04;
  config.substeps = 100;
  config.grid_resolution = 64;
  config.frames = frames;
  PhysParams params;

  DropResult result;
  SimStats stats;
  result.frames =
      simulate_sequence(cloth, material_frames(cloth), colliders, params, config, &stats);
  result.stats = stats;
  const Aabb domain = default_domain(cloth, colliders);
  result.cell_size = (domain.hi - domain.lo).maxCoeff() / (config.grid_resolution - 1);
  return result;
}

void criterion_collision(std::string& detail) {
  const TriMesh sphere = testing::make_icosphere(0.35, 2);  // 320 faces
  const DropResult result = run_drop(sphere, 50);

  double max_pen = 0.0;
  for (int t = 0; t < result.frames.frame_count(); ++t) {
    max_pen = std::max(max_pen, penetration_depth(result.frames.mesh_at(t), sphere));
  }
  require(max_pen <= result.cell_size,
          "penetration " + fmt(max_pen) + " > cell size " + fmt(result.cell_size));
  require(result.stats.min_rel_normal_after_projection >= -1e-12,
          "inward relative velocity after projection: " +
              fmt(result.stats.min_rel_normal_after_projection));
  detail = "50 frames; max penetration " + fmt(max_pen) + " <= h " + fmt(result.cell_size) +
           "; min rel normal " + fmt(result.stats.min_rel_normal_after_projection);
}

// ---------------------------------------------------------------- criterion 6

void criterion_robustness(std::string& detail) {
  const TriMesh twin = testing::merge_meshes(
      testing::make_icosphere(0.3, 2, Vec3(-0.12, 0.0, 0.0)),
      testing::make_icosphere(0.3, 2, Vec3(0.12, 0.05, 0.0)));
  const DropResult result = run_drop(twin, 50);
  require(result.frames.frame_count() == 51, "rollout did not complete all frames");
  for (const auto& frame : result.frames.frames) {
    for (const Vec3& v : frame) {
      require(v.allFinite(), "non-finite vertex in output");
    }
  }
  detail = "self-intersecting collider, 50 frames completed, all outputs finite";
}

// ---------------------------------------------------------------- criterion 7

void criterion_rasterization_complexity(std::string& detail) {
  const TriMesh sphere = testing::make_icosphere(0.3, 2, Vec3(0.5, 0.5, 0.5));
  ColliderFrame frame;
  frame.faces = face_frames(sphere);
  frame.face_velocities.assign(sphere.face_count(), Vec3::Zero());

  const long long bound = 27LL * sphere.face_count();
  std::vector<long long> counts;
  for (int res : {32, 64, 128}) {
    BackgroundGrid grid(res, box_of(Vec3(0, 0, 0), Vec3(1, 1, 1)));
    ColliderGridFields fields(res);
    rasterize_collider(frame, grid, fields);
    require(fields.touch_events <= bound,
            "touched " + std::to_string(fields.touch_events) + " > 27*Nf at res " +
                std::to_string(res));
    counts.push_back(fields.touch_events);
  }
  require(counts[0] == counts[1] && counts[1] == counts[2],
          "touch count varies with grid resolution");
  detail = std::to_string(counts[0]) + " touches at res 32/64/128 (bound " +
           std::to_string(bound) + ")";
}

// ---------------------------------------------------------------- criterion 8

void criterion_inverse_self_consistency(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();

  const TriMesh bar = testing::make_box(Vec3(-0.2, -0.02, -0.04), Vec3(0.2, 0.04, 0.04));
  MeshSequence colliders;
  colliders.topology = bar.faces;
  colliders.frames = {bar.vertices};
  colliders.frame_dt = 0.04;

  SimConfig sim;
  sim.frame_dt = 0.04;
  sim.substeps = 40;
  sim.grid_resolution = 48;
  sim.domain = box_of(Vec3(-0.7, -0.7, -0.7), Vec3(0.7, 0.7, 0.7));

  PhysParams truth;
  truth.elastic = kDefaults;
  truth.elastic.E = 150.0;
  truth.rho = 1.5;
  truth.alpha = 0.9;

  // The canonical mesh is a gravity-loaded hanging state: drape a patch
  // over the bar and let it settle. A flat canonical mesh would leave the
  // rest-shape factor with nothing to compensate.
  const TriMesh flat = testing::make_patch(4, 12, 0.3, 1.1, 0.12);
  SimConfig settle = sim;
  settle.frames = 50;
  const MeshSequence settled =
      simulate_sequence(flat, material_frames(flat), colliders, truth, settle);
  const TriMesh cloth{settled.frames.back(), flat.faces};

  SimConfig rollout = sim;
  rollout.frames = 12;
  const auto rest = build_rest_state(cloth, RestShapeParam{truth.alpha, Vec3(0, -1, 0)});
  const MeshSequence target = simulate_sequence(cloth, rest, colliders, truth, rollout);

  OptimConfig cfg;  // stock perturbations, learning rates, initialization
  cfg.iterations = 200;
  const FitResult result = fit_parameters(cloth, colliders, target, cfg, sim);

  const double elapsed = seconds_since(t0);
  const double initial = result.loss_history.front();
  require(result.rollouts == 4LL * cfg.iterations,
          "rollout budget: " + std::to_string(result.rollouts) + " != 4 * iterations");
  require(result.best_loss <= 0.1 * initial,
          "final loss " + fmt(result.best_loss) + " > 10% of initial " + fmt(initial));
  require(elapsed < 1800.0, "runtime " + fmt(elapsed) + "s >= 30min");
  detail = "loss " + fmt(initial) + " -> " + fmt(result.best_loss) + " (" +
           fmt(100.0 * result.best_loss / initial) + "%), fitted E " +
           fmt(result.params.elastic.E) + " rho " + fmt(result.params.rho) + " alpha " +
           fmt(result.params.alpha) + ", " + fmt(elapsed) + "s";
}

// ---------------------------------------------------------------- criterion 9

void criterion_rest_shape_identity(std::string& detail) {
  const TriMesh strip = testing::make_vertical_strip(4, 8, 0.3, 0.7, 0.35);
  const TriMesh bar = testing::make_box(Vec3(-0.2, 0.36, -0.05), Vec3(0.2, 0.42, 0.05));
  MeshSequence colliders;
  colliders.topology = bar.faces;
  colliders.frames = {bar.vertices};
  colliders.frame_dt = 0.04;

  SimConfig config;
  config.frame_dt = 0.04;
  config.substeps = 30;
  config.grid_resolution = 32;
  config.frames = 4;
  config.deterministic = true;
  config.domain = box_of(Vec3(-0.8, -0.8, -0.8), Vec3(0.8, 0.8, 0.8));
  PhysParams params;
  params.alpha = 1.0;

  const auto rest_alpha = build_rest_state(strip, RestShapeParam{1.0, Vec3(0, -1, 0)});
  const auto rest_canonical = material_frames(strip);
  const MeshSequence a = simulate_sequence(strip, rest_alpha, colliders, params, config);
  const MeshSequence b = simulate_sequence(strip, rest_canonical, colliders, params, config);
  require(a.frame_count() == b.frame_count(), "frame counts differ");
  for (int t = 0; t < a.frame_count(); ++t) {
    for (size_t i = 0; i < a.frames[t].size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        require(a.frames[t][i][k] == b.frames[t][i][k],
                "bit mismatch at frame " + std::to_string(t) + " vertex " + std::to_string(i));
      }
    }
  }
  detail = "alpha=1 rollout bit-identical over " + std::to_string(a.frame_count()) + " frames";
}

// --------------------------------------------------------------- criterion 10

void criterion_metrics_oracle(std::string& detail) {
  std::mt19937_64 rng(1010);
  const TriMesh ico = testing::make_icosphere(0.6, 1);  // 80 faces <= 200

  // chamfer and f-score against brute force
  PointSampleSet a = sample_surface(ico, 500, 3);
  PointSampleSet b = sample_surface(ico, 400, 4);
  for (Vec3& p : b.points) p += Vec3(0.01, -0.005, 0.002);

  auto brute_nn2 = [](const Vec3& q, const std::vector<Vec3>& pts) {
    double best = std::numeric_limits<double>::max();
    for (const Vec3& p : pts) best = std::min(best, (p - q).squaredNorm());
    return best;
  };
  double sum_ab = 0.0;
  for (const Vec3& p : a.points) sum_ab += brute_nn2(p, b.points);
  double sum_ba = 0.0;
  for (const Vec3& p : b.points) sum_ba += brute_nn2(p, a.points);
  const double brute_cd = 0.5 * sum_ab / a.points.size() + 0.5 * sum_ba / b.points.size();
  require(std::abs(chamfer_distance(a, b) - brute_cd) < 1e-9, "chamfer disagrees with oracle");

  const double tau = 0.02;
  int hits_a = 0, hits_b = 0;
  for (const Vec3& p : a.points) hits_a += brute_nn2(p, b.points) <= tau * tau ? 1 : 0;
  for (const Vec3& p : b.points) hits_b += brute_nn2(p, a.points) <= tau * tau ? 1 : 0;
  const double precision = static_cast<double>(hits_a) / a.points.size();
  const double recall = static_cast<double>(hits_b) / b.points.size();
  const double brute_f =
      precision + recall == 0.0 ? 0.0 : 200.0 * precision * recall / (precision + recall);
  require(f_score(a, b, tau) == brute_f, "f-score disagrees with oracle");

  // signed distance: magnitude against per-triangle oracle, sign against ray parity
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 p(testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1),
                 testing::uniform(rng, -1, 1));
    double best = std::numeric_limits<double>::max();
    for (const auto& tri : ico.faces) {
      best = std::min(best, point_triangle_distance(p, ico.vertices[tri[0]],
                                                    ico.vertices[tri[1]], ico.vertices[tri[2]]));
    }
    const double sd = signed_distance(p, ico);
    require(std::abs(std::abs(sd) - best) < 1e-9, "distance magnitude disagrees with oracle");
    if (std::abs(sd) > 1e-9) {
      const bool inside = sd < 0.0;
      int crossings = 0;
      const Vec3 dir(1, 0, 0);
      for (const auto& tri : ico.faces) {
        const Vec3& va = ico.vertices[tri[0]];
        const Vec3 e1 = ico.vertices[tri[1]] - va;
        const Vec3 e2 = ico.vertices[tri[2]] - va;
        const Vec3 h = dir.cross(e2);
        const double det = e1.dot(h);
        if (std::abs(det) < 1e-14) continue;
        const Vec3 s = p - va;
        const double u = s.dot(h) / det;
        if (u < 0.0 || u > 1.0) continue;
        const Vec3 q = s.cross(e1);
        const double v = dir.dot(q) / det;
        if (v < 0.0 || u + v > 1.0) continue;
        if (e2.dot(q) / det > 0.0) ++crossings;
      }
      require(inside == (crossings % 2 == 1), "sign disagrees with ray parity");
    }
  }

  // identical inputs
  require(chamfer_distance(a, a) == 0.0, "self chamfer nonzero");
  require(f_score(a, a, 0.001) == 100.0, "self f-score not 100");
  require(penetration_depth(testing::make_icosphere(1.0, 1), ico) == 0.0,
          "outside cloth has nonzero penetration");
  detail = "chamfer/f-score/signed-distance match brute-force oracles on an 80-face mesh";
}

// --------------------------------------------------------------- criterion 11

void criterion_cli_determinism(std::string& detail) {
  const fs::path dir = fs::temp_directory_path() / "clothsim_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  save_obj(testing::make_patch(6, 6, 0.5, 0.5, 0.4), dir / "cloth.obj");
  save_obj(testing::make_icosphere(0.2, 1), dir / "sphere.obj");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "[inputs]\ncloth = cloth.obj\ncollider = sphere.obj\n"
        << "[sim]\nframes = 3\nsubsteps = 50\ngrid_resolution = 32\ndeterministic = true\n"
        << "[metrics]\nseed = 42\n";
  }

  auto run = [&](const std::string& out_dir) {
    const std::string cmd = std::string(CLOTHSIM_CLI_PATH) + " simulate " +
                            (dir / "run.cfg").string() + " --set output.dir=" + out_dir +
                            " > /dev/null";
    require(std::system(cmd.c_str()) == 0, "simulate exited nonzero");
  };
  run((dir / "out1").string());
  run((dir / "out2").string());

  int compared = 0;
  for (int frame = 0; frame <= 3; ++frame) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%05d.obj", frame);
    std::ifstream f1(dir / "out1" / name, std::ios::binary);
    std::ifstream f2(dir / "out2" / name, std::ios::binary);
    require(f1.good() && f2.good(), std::string("missing frame file ") + name);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    require(s1.str() == s2.str(), std::string("frame files differ: ") + name);
    ++compared;
  }
  detail = std::to_string(compared) + " frame files byte-identical across two runs";
}

// --------------------------------------------------------------- criterion 12

void criterion_efficiency(std::string& detail) {
  const TriMesh cloth = testing::make_patch(58, 58, 1.6, 1.6, 0.55);  // 9862 particles
  const TriMesh sphere = testing::make_icosphere(0.35, 2);
  MeshSequence colliders;
  colliders.topology = sphere.faces;
  colliders.frames = {sphere.vertices};
  colliders.frame_dt = 0.04;

  SimConfig config;
  config.frame_dt = 0.04;
  config.substeps = 400;
  config.grid_resolution = 64;
  config.frames = 2;
  config.deterministic = true;  // single-threaded
  PhysParams params;

  const ParticleSystem ps = make_particles(cloth, material_frames(cloth), params.rho);
  require(ps.particle_count() <= 10000,
          "scene has " + std::to_string(ps.particle_count()) + " particles");

  std::vector<double> frame_seconds;
  auto t_prev = std::chrono::steady_clock::now();
  const FrameCallback on_frame = [&](int, const std::vector<Vec3>&) {
    frame_seconds.push_back(seconds_since(t_prev));
    t_prev = std::chrono::steady_clock::now();
  };
  simulate_sequence(cloth, material_frames(cloth), colliders, params, config, nullptr, on_frame);

  double slowest = 0.0;
  for (double s : frame_seconds) slowest = std::max(slowest, s);
  require(slowest <= 10.0, "slowest frame " + fmt(slowest) + "s > 10s");
  detail = std::to_string(ps.particle_count()) + " particles, 400 substeps/frame, slowest frame " +
           fmt(slowest) + "s";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "constitutive gradient check", criterion_gradient_check},
      {2, "rotation invariance", criterion_rotation_invariance},
      {3, "mass and momentum conservation", criterion_conservation},
      {4, "free fall", criterion_free_fall},
      {5, "collision scenario", criterion_collision},
      {6, "robustness with self-intersecting collider", criterion_robustness},
      {7, "rasterization complexity", criterion_rasterization_complexity},
      {8, "inverse self-consistency", criterion_inverse_self_consistency},
      {9, "rest-shape identity", criterion_rest_shape_identity},
      {10, "metrics oracle", criterion_metrics_oracle},
      {11, "determinism", criterion_cli_determinism},
      {12, "efficiency sanity", criterion_efficiency},
  };

  int failed = 0;
  for (const auto& criterion : criteria) {
    std::string detail;
    try {
      criterion.run(detail);
      std::cout << "[PASS] criterion " << criterion.id << " (" << criterion.name << "): " << detail
                << std::endl;
    } catch (const std::exception& err) {
      ++failed;
      std::cout << "[FAIL] criterion " << criterion.id << " (" << criterion.name
                << "): " << err.what() << std::endl;
    }
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed;
}
