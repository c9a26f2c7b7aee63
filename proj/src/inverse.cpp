#include "clothsim/inverse.hpp"

#include <chrono>
#include <cmath>

namespace clothsim {

void OptimConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!(d_rho > 0.0 && d_E > 0.0 && d_alpha > 0.0)) {
    throw ConfigError("perturbation sizes must be > 0");
  }
  if (!(lr_rho > 0.0 && lr_E > 0.0 && lr_alpha > 0.0)) {
    throw ConfigError("learning rates must be > 0");
  }
  if (horizon < 0) throw ConfigError("horizon must be >= 0");
}

double phys_loss(const MeshSequence& simulated, const MeshSequence& target) {
  if (simulated.topology != target.topology) {
    throw SimError("loss: simulated and target topology differ");
  }
  if (simulated.frame_count() != target.frame_count()) {
    throw SimError("loss: frame counts differ (" + std::to_string(simulated.frame_count()) +
                   " vs " + std::to_string(target.frame_count()) + ")");
  }
  double loss = 0.0;
  for (int t = 1; t < simulated.frame_count(); ++t) {
    const auto& sim = simulated.frames[t];
    const auto& ref = target.frames[t];
    if (sim.size() != ref.size()) throw SimError("loss: vertex counts differ");
    for (size_t i = 0; i < sim.size(); ++i) {
      loss += (sim[i] - ref[i]).squaredNorm();
    }
  }
  return loss;
}

ParamGradient finite_diff_grad(const LossFn& loss_fn, const PhysParams& params,
                               const OptimConfig& cfg, double* base_loss) {
  const double base = loss_fn(params);
  if (base_loss) *base_loss = base;

  PhysParams probe = params;
  probe.rho = params.rho + cfg.d_rho;
  const double loss_rho = loss_fn(probe);

  probe = params;
  probe.elastic.E = params.elastic.E + cfg.d_E;
  const double loss_E = loss_fn(probe);

  ParamGradient grad;
  grad.rho = (loss_rho - base) / cfg.d_rho;
  grad.E = (loss_E - base) / cfg.d_E;

  probe = params;
  if (params.alpha + cfg.d_alpha <= 1.0) {
    probe.alpha = params.alpha + cfg.d_alpha;
    grad.alpha = (loss_fn(probe) - base) / cfg.d_alpha;
  } else {
    // backward difference at the upper bound
    probe.alpha = params.alpha - cfg.d_alpha;
    grad.alpha = (base - loss_fn(probe)) / cfg.d_alpha;
  }
  return grad;
}

namespace {

double adam_update(double value, double grad, double& m, double& v, int iter, double lr,
                   const OptimConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
  const double m_hat = m / (1.0 - std::pow(cfg.beta1, iter));
  const double v_hat = v / (1.0 - std::pow(cfg.beta2, iter));
  return value - lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
}

constexpr double kPositiveFloor = 1e-6;

}  // namespace

PhysParams adam_step(const PhysParams& params, const ParamGradient& grad, AdamState& moments,
                     int iter, const OptimConfig& cfg) {
  if (iter < 1) throw ConfigError("adam iteration index starts at 1");
  if (!std::isfinite(grad.rho) || !std::isfinite(grad.E) || !std::isfinite(grad.alpha)) {
    throw SimError("non-finite gradient in parameter update");
  }
  PhysParams out = params;
  out.rho = std::max(kPositiveFloor,
                     adam_update(params.rho, grad.rho, moments.m_rho, moments.v_rho, iter,
                                 cfg.lr_rho, cfg));
  out.elastic.E = std::max(kPositiveFloor,
                           adam_update(params.elastic.E, grad.E, moments.m_E, moments.v_E, iter,
                                       cfg.lr_E, cfg));
  out.alpha = std::clamp(adam_update(params.alpha, grad.alpha, moments.m_alpha, moments.v_alpha,
                                     iter, cfg.lr_alpha, cfg),
                         0.0, 1.0);
  return out;
}

FitResult fit_parameters(const TriMesh& cloth0, const MeshSequence& colliders,
                         const MeshSequence& target, const OptimConfig& cfg,
                         const SimConfig& sim_cfg) {
  cfg.validate();
  validate_sequence(target);
  if (target.topology != cloth0.faces) {
    throw ConfigError("fit target topology does not match the cloth mesh");
  }
  const int horizon = cfg.horizon > 0 ? cfg.horizon : target.frame_count() - 1;
  if (horizon < 1) throw ConfigError("fit needs at least one target frame beyond the initial");
  if (target.frame_count() < horizon + 1) {
    throw ConfigError("target sequence shorter than the fit horizon");
  }

  SimConfig rollout_cfg = sim_cfg;
  rollout_cfg.frames = horizon;

  MeshSequence truncated_target;
  truncated_target.topology = target.topology;
  truncated_target.frame_dt = target.frame_dt;
  truncated_target.frames.assign(target.frames.begin(), target.frames.begin() + horizon + 1);

  FitResult result;
  const auto t_start = std::chrono::steady_clock::now();

  const LossFn loss_fn = [&](const PhysParams& p) -> double {
    p.validate();
    ++result.rollouts;
    const auto rest = build_rest_state(cloth0, RestShapeParam{p.alpha, gravity_direction(rollout_cfg)});
    const MeshSequence rolled = simulate_sequence(cloth0, rest, colliders, p, rollout_cfg);
    return phys_loss(rolled, truncated_target);
  };

  PhysParams params;
  params.elastic.E = cfg.init_E;
  params.elastic.nu = cfg.fixed_nu;
  params.elastic.gamma = cfg.fixed_gamma;
  params.elastic.kappa = cfg.fixed_kappa;
  params.rho = cfg.init_rho;
  params.alpha = cfg.init_alpha;
  params.validate();

  AdamState moments;
  result.params = params;
  result.best_loss = std::numeric_limits<double>::max();
  result.loss_history.reserve(cfg.iterations);

  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    double base_loss = 0.0;
    ParamGradient grad;
    try {
      grad = finite_diff_grad(loss_fn, params, cfg, &base_loss);
    } catch (const Error& err) {
      throw SimError("fit iteration " + std::to_string(iter) + " failed at rho=" +
                     std::to_string(params.rho) + " E=" + std::to_string(params.elastic.E) +
                     " alpha=" + std::to_string(params.alpha) + ": " + err.what());
    }
    result.loss_history.push_back(base_loss);
    if (base_loss < result.best_loss) {
      result.best_loss = base_loss;
      result.params = params;
    }
    params = adam_step(params, grad, moments, iter, cfg);
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace clothsim
