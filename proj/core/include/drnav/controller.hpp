#pragma once

#include <limits>
#include <vector>

#include "drnav/drcbf.hpp"
#include "drnav/dynamics.hpp"
#include "drnav/geometry.hpp"
#include "drnav/stabilizer.hpp"

namespace drnav {

enum class ControlStatus {
  kOk,
  // No control satisfies the safety rows within bounds; the safe action is
  // to stop (zero input) for this tick.
  kInfeasibleStop,
};

struct ControlOutput {
  Control control{0.0, 0.0};
  double delta = 0.0;  // stabilization slack at the optimum
  ControlStatus status = ControlStatus::kOk;
  double solve_time = 0.0;  // seconds, wall clock
  // min over the active safety samples of CBC at the returned control;
  // +inf when no obstacle constraint was active.
  double cbc_margin = std::numeric_limits<double>::infinity();
};

struct ControllerConfig {
  ClfParams clf{};
  AmbiguityConfig ambiguity{};
  double lambda = 50.0;       // weight on the stabilization slack
  double alpha_h_gain = 1.5;  // linear class-K gain on the barrier
  Control nominal_control{1.2, 0.0};
  double v_min = -1.2, v_max = 1.2;
  double omega_min = -1.0, omega_max = 1.0;
  Shape robot_shape{Circle{{0.0, 0.0}, 0.267}};
  double goal_tolerance = 1e-9;  // on-reference branch returns zero input
  double qp_tol = 1e-7;
  int qp_max_iter = 2000;
};

// One control step of the distributionally robust safety filter: minimizes
// |u - nominal|^2 + lambda delta^2 subject to the CLF decrease row
// (LfV + LgV.u + alpha_V(V) <= delta, alpha_V linear), the DR safety rows
// built from the pose samples x obstacle points, and the input box. With no
// obstacle points the safety rows are omitted and the step reduces to CLF
// tracking of the nominal control.
ControlOutput clf_dr_cbf_step(const ControllerConfig& config,
                              const Pose2& estimate,
                              const std::vector<Pose2>& pose_samples,
                              const std::vector<ObstaclePoint>& points,
                              const Vec2& reference);

// Baseline: a single barrier row built from the mean pose estimate and the
// closest obstacle point only, enforced in expectation (CBC >= 0).
ControlOutput nominal_clf_cbf_step(const ControllerConfig& config,
                                   const Pose2& estimate,
                                   const std::vector<ObstaclePoint>& points,
                                   const Vec2& reference);

}  // namespace drnav
