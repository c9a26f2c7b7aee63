#include <doctest.h>

#include <cmath>

#include "clothsim/inverse.hpp"
#include "meshgen.hpp"

using namespace clothsim;

namespace {

MeshSequence sequence_of(const TriMesh& mesh, int frames) {
  MeshSequence seq;
  seq.topology = mesh.faces;
  seq.frame_dt = 0.04;
  for (int t = 0; t < frames; ++t) seq.frames.push_back(mesh.vertices);
  return seq;
}

PhysParams default_params() {
  PhysParams p;
  return p;
}

}  // namespace

TEST_CASE("phys_loss") {
  const TriMesh patch = testing::make_patch(3, 3, 0.5, 0.5, 0.0);
  const MeshSequence base = sequence_of(patch, 4);

  SUBCASE("identical sequences give zero") {
    CHECK(phys_loss(base, base) == 0.0);
  }

  SUBCASE("one offset vertex in one frame") {
    MeshSequence moved = base;
    moved.frames[2][4] += Vec3(0.1, 0, 0);
    CHECK(phys_loss(moved, base) == doctest::Approx(0.01).epsilon(1e-12));
  }

  SUBCASE("initial frame is excluded") {
    MeshSequence moved = base;
    moved.frames[0][4] += Vec3(10, 0, 0);
    CHECK(phys_loss(moved, base) == 0.0);
  }

  SUBCASE("doubling offsets quadruples the loss") {
    MeshSequence once = base, twice = base;
    for (size_t i = 0; i < once.frames[1].size(); ++i) {
      once.frames[1][i] += Vec3(0.01 * i, -0.02, 0.005);
      twice.frames[1][i] += 2.0 * Vec3(0.01 * i, -0.02, 0.005);
    }
    CHECK(phys_loss(twice, base) == doctest::Approx(4.0 * phys_loss(once, base)).epsilon(1e-12));
  }

  SUBCASE("shape mismatch rejected") {
    MeshSequence shorter = base;
    shorter.frames.pop_back();
    CHECK_THROWS_AS(phys_loss(shorter, base), SimError);
  }
}

TEST_CASE("finite_diff_grad: analytic loss functions") {
  OptimConfig cfg;

  SUBCASE("quadratic in rho") {
    int evals = 0;
    const LossFn fn = [&](const PhysParams& p) {
      ++evals;
      return p.rho * p.rho;
    };
    const ParamGradient grad = finite_diff_grad(fn, default_params(), cfg);
    CHECK(grad.rho == doctest::Approx(2.05).epsilon(1e-12));  // (1.1025 - 1) / 0.05
    CHECK(evals == 4);
  }

  SUBCASE("constant loss gives zero gradient") {
    const LossFn fn = [](const PhysParams&) { return 7.5; };
    const ParamGradient grad = finite_diff_grad(fn, default_params(), cfg);
    CHECK(grad.rho == 0.0);
    CHECK(grad.E == 0.0);
    CHECK(grad.alpha == 0.0);
  }

  SUBCASE("linear loss is differentiated exactly") {
    const LossFn fn = [](const PhysParams& p) { return 3.0 * p.elastic.E; };
    const ParamGradient grad = finite_diff_grad(fn, default_params(), cfg);
    CHECK(grad.E == doctest::Approx(3.0).epsilon(1e-12));
  }

  SUBCASE("alpha at the bound switches to a backward difference") {
    std::vector<double> alphas_seen;
    const LossFn fn = [&](const PhysParams& p) {
      alphas_seen.push_back(p.alpha);
      return p.alpha * p.alpha;
    };
    PhysParams at_bound = default_params();
    at_bound.alpha = 1.0;
    const ParamGradient grad = finite_diff_grad(fn, at_bound, cfg);
    // backward: (1 - 0.995^2) / 0.005 = 1.995
    CHECK(grad.alpha == doctest::Approx(1.995).epsilon(1e-12));
    CHECK(alphas_seen.size() == 4);
    for (double a : alphas_seen) CHECK(a <= 1.0);
  }
}

TEST_CASE("adam_step") {
  OptimConfig cfg;
  AdamState moments;

  SUBCASE("zero gradient leaves parameters fixed") {
    const PhysParams p0 = default_params();
    const PhysParams p1 = adam_step(p0, ParamGradient{}, moments, 1, cfg);
    CHECK(p1.rho == p0.rho);
    CHECK(p1.elastic.E == p0.elastic.E);
    CHECK(p1.alpha == p0.alpha);
  }

  SUBCASE("first step moves by about the learning rate") {
    PhysParams p0 = default_params();
    p0.alpha = 0.5;
    ParamGradient grad;
    grad.rho = 2.05;
    grad.E = -40.0;
    grad.alpha = 0.3;
    const PhysParams p1 = adam_step(p0, grad, moments, 1, cfg);
    CHECK(std::abs(p0.rho - p1.rho) == doctest::Approx(cfg.lr_rho).epsilon(1e-6));
    CHECK(std::abs(p1.elastic.E - p0.elastic.E) == doctest::Approx(cfg.lr_E).epsilon(1e-6));
    CHECK(p1.elastic.E > p0.elastic.E);  // descent against a negative gradient
    CHECK(std::abs(p0.alpha - p1.alpha) == doctest::Approx(cfg.lr_alpha).epsilon(1e-6));
  }

  SUBCASE("alpha clamps at the upper bound") {
    PhysParams p0 = default_params();
    p0.alpha = 1.0;
    ParamGradient grad;
    grad.alpha = -5.0;  // pushes alpha above 1
    const PhysParams p1 = adam_step(p0, grad, moments, 1, cfg);
    CHECK(p1.alpha == 1.0);
  }

  SUBCASE("non-finite gradient rejected without mutation") {
    ParamGradient grad;
    grad.E = std::numeric_limits<double>::quiet_NaN();
    AdamState before = moments;
    CHECK_THROWS_AS(adam_step(default_params(), grad, moments, 1, cfg), SimError);
    CHECK(moments.m_E == before.m_E);
  }
}

TEST_CASE("fit_parameters: self-fit stays at the optimum") {
  const TriMesh patch = testing::make_patch(3, 3, 0.3, 0.3, 0.2);
  SimConfig sim;
  sim.frame_dt = 0.04;
  sim.substeps = 10;
  sim.grid_resolution = 16;
  sim.gravity = Vec3(0, -9.8, 0);
  Aabb domain;
  domain.lo = Vec3(-0.6, -0.6, -0.6);
  domain.hi = Vec3(0.6, 0.6, 0.6);
  sim.domain = domain;

  OptimConfig cfg;
  cfg.iterations = 2;

  // target generated at the initial parameters: loss starts at zero
  PhysParams init;
  init.elastic.E = cfg.init_E;
  init.rho = cfg.init_rho;
  init.alpha = cfg.init_alpha;
  SimConfig rollout = sim;
  rollout.frames = 3;
  const auto rest = build_rest_state(patch, RestShapeParam{init.alpha, Vec3(0, -1, 0)});
  const MeshSequence target = simulate_sequence(patch, rest, MeshSequence{}, init, rollout);

  const FitResult result = fit_parameters(patch, MeshSequence{}, target, cfg, sim);
  CHECK(result.loss_history[0] == 0.0);
  CHECK(result.best_loss == 0.0);
  CHECK(result.params.elastic.E == cfg.init_E);
  CHECK(result.params.rho == cfg.init_rho);
  CHECK(result.params.alpha == cfg.init_alpha);
  CHECK(result.rollouts == 2 * 4);  // exactly 4 per iteration
}

TEST_CASE("fit_parameters: invalid iteration count rejected") {
  const TriMesh patch = testing::make_patch(3, 3, 0.3, 0.3, 0.2);
  OptimConfig cfg;
  cfg.iterations = 0;
  SimConfig sim;
  sim.grid_resolution = 16;
  MeshSequence target;
  target.topology = patch.faces;
  target.frames = {patch.vertices, patch.vertices};
  target.frame_dt = 0.04;
  CHECK_THROWS_AS(fit_parameters(patch, MeshSequence{}, target, cfg, sim), ConfigError);
}

TEST_CASE("fit_parameters: running minimum is nonincreasing, bounds hold") {
  const TriMesh patch = testing::make_patch(3, 3, 0.3, 0.3, 0.25);
  SimConfig sim;
  sim.frame_dt = 0.04;
  sim.substeps = 10;
  sim.grid_resolution = 16;
  Aabb domain;
  domain.lo = Vec3(-0.6, -0.6, -0.6);
  domain.hi = Vec3(0.6, 0.6, 0.6);
  sim.domain = domain;

  // synthetic target at shifted parameters
  PhysParams truth;
  truth.elastic.E = 120.0;
  truth.rho = 1.2;
  truth.alpha = 0.95;
  SimConfig rollout = sim;
  rollout.frames = 3;
  const auto rest = build_rest_state(patch, RestShapeParam{truth.alpha, Vec3(0, -1, 0)});
  const MeshSequence target = simulate_sequence(patch, rest, MeshSequence{}, truth, rollout);

  OptimConfig cfg;
  cfg.iterations = 6;
  const FitResult result = fit_parameters(patch, MeshSequence{}, target, cfg, sim);
  CHECK(result.rollouts == 6 * 4);
  CHECK(result.loss_history.size() == 6);
  double running = std::numeric_limits<double>::max();
  for (double loss : result.loss_history) {
    running = std::min(running, loss);
    CHECK(running <= loss);
  }
  CHECK(result.best_loss == running);
  CHECK(result.params.rho > 0.0);
  CHECK(result.params.elastic.E > 0.0);
  CHECK(result.params.alpha >= 0.0);
  CHECK(result.params.alpha <= 1.0);
}

TEST_CASE("fit_parameters: rollout failure surfaces the iteration and parameters") {
  const TriMesh patch = testing::make_patch(3, 3, 0.3, 0.3, 0.25);
  SimConfig sim;
  sim.substeps = 5;
  sim.grid_resolution = 16;
  Aabb domain;  // does not contain the cloth: the first transfer fails
  domain.lo = Vec3(-0.4, 2.0, -0.4);
  domain.hi = Vec3(0.4, 2.8, 0.4);
  sim.domain = domain;

  MeshSequence target;
  target.topology = patch.faces;
  target.frames.assign(3, patch.vertices);
  target.frame_dt = 0.04;

  OptimConfig cfg;
  cfg.iterations = 3;
  CHECK_THROWS_WITH_AS(fit_parameters(patch, MeshSequence{}, target, cfg, sim),
                       doctest::Contains("fit iteration 1"), SimError);
}

TEST_CASE("fit_parameters: deterministic trajectories") {
  const TriMesh patch = testing::make_patch(3, 3, 0.3, 0.3, 0.25);
  SimConfig sim;
  sim.substeps = 10;
  sim.grid_resolution = 16;
  sim.deterministic = true;
  Aabb domain;
  domain.lo = Vec3(-0.6, -0.6, -0.6);
  domain.hi = Vec3(0.6, 0.6, 0.6);
  sim.domain = domain;

  PhysParams truth;
  truth.elastic.E = 130.0;
  SimConfig rollout = sim;
  rollout.frames = 2;
  const auto rest = build_rest_state(patch, RestShapeParam{truth.alpha, Vec3(0, -1, 0)});
  const MeshSequence target = simulate_sequence(patch, rest, MeshSequence{}, truth, rollout);

  OptimConfig cfg;
  cfg.iterations = 3;
  const FitResult a = fit_parameters(patch, MeshSequence{}, target, cfg, sim);
  const FitResult b = fit_parameters(patch, MeshSequence{}, target, cfg, sim);
  REQUIRE(a.loss_history.size() == b.loss_history.size());
  for (size_t i = 0; i < a.loss_history.size(); ++i) {
    CHECK(a.loss_history[i] == b.loss_history[i]);
  }
  CHECK(a.params.elastic.E == b.params.elastic.E);
  CHECK(a.params.rho == b.params.rho);
  CHECK(a.params.alpha == b.params.alpha);
}
