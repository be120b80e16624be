#pragma once

#include <Eigen/Core>
#include <functional>

#include "drnav/geometry.hpp"

namespace drnav {

// Unicycle input (forward speed, turn rate).
struct Control {
  double v = 0.0;
  double omega = 0.0;

  Eigen::Vector2d vec() const { return {v, omega}; }
};

// x_dot = drift(x) + actuation(x) * u.
struct ControlAffineModel {
  int state_dim = 0;
  int input_dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> drift;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> actuation;
  // Optional post-step state fixup (angle wrapping); identity when empty.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> normalize;
};

// Classic fourth-order Runge-Kutta step under zero-order-hold control.
// Throws std::invalid_argument on dimension mismatch or dt <= 0 and
// std::domain_error when the state or control is non-finite.
Eigen::VectorXd step_rk4(const ControlAffineModel& model,
                         const Eigen::VectorXd& state,
                         const Eigen::VectorXd& control, double dt);

// State (x, y, theta), input (v, omega); driftless, theta wrapped to
// (-pi, pi] after each step.
ControlAffineModel unicycle_model();

Pose2 to_pose(const Eigen::VectorXd& unicycle_state);
Eigen::VectorXd to_state(const Pose2& pose);

Pose2 step_unicycle(const Pose2& pose, const Control& u, double dt);

}  // namespace drnav
