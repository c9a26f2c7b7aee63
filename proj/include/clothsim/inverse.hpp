#pragma once

#include <functional>
#include <vector>

#include "clothsim/mpm.hpp"

namespace clothsim {

struct OptimConfig {
  int iterations = 200;

  // forward-difference perturbations
  double d_rho = 0.05;
  double d_E = 5.0;
  double d_alpha = 0.005;

  // per-parameter Adam learning rates
  double lr_rho = 0.01;
  double lr_E = 0.3;
  double lr_alpha = 0.01;

  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  // initial values; nu, gamma, kappa stay fixed during the fit
  double init_rho = 1.0;
  double init_E = 100.0;
  double init_alpha = 1.0;
  double fixed_nu = 0.3;
  double fixed_gamma = 500.0;
  double fixed_kappa = 500.0;

  int horizon = 0;  // frames to simulate; 0 means the full target length

  void validate() const;
};

/// Sum over frames 2..T of the squared vertex-coordinate differences.
/// Frame 0 is the shared initial state and is skipped.
double phys_loss(const MeshSequence& simulated, const MeshSequence& target);

/// Gradient over (rho, E, alpha) packed in that order.
struct ParamGradient {
  double rho = 0.0;
  double E = 0.0;
  double alpha = 0.0;
};

using LossFn = std::function<double(const PhysParams&)>;

/// One-sided forward differences, 4 loss evaluations total (base + one
/// per parameter). At alpha = 1 the alpha probe flips to a backward
/// difference so the perturbed point stays admissible.
ParamGradient finite_diff_grad(const LossFn& loss_fn, const PhysParams& params,
                               const OptimConfig& cfg, double* base_loss = nullptr);

struct AdamState {
  double m_rho = 0.0, v_rho = 0.0;
  double m_E = 0.0, v_E = 0.0;
  double m_alpha = 0.0, v_alpha = 0.0;
};

/// Standard Adam with bias correction and per-parameter learning rates.
/// alpha is clamped to [0, 1]; rho and E stay positive. iter starts at 1.
PhysParams adam_step(const PhysParams& params, const ParamGradient& grad, AdamState& moments,
                     int iter, const OptimConfig& cfg);

struct FitResult {
  PhysParams params;       // best-loss parameters
  double best_loss = 0.0;
  std::vector<double> loss_history;  // base loss per iteration
  long long rollouts = 0;
  double wall_seconds = 0.0;
};

/// Fits (rho, E, alpha) to the target sequence by repeated rollout:
/// exactly 4 rollouts per iteration (base + three perturbed).
FitResult fit_parameters(const TriMesh& cloth0, const MeshSequence& colliders,
                         const MeshSequence& target, const OptimConfig& cfg,
                         const SimConfig& sim_cfg);

}  // namespace clothsim
