#include "drnav/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace drnav {

namespace {

Eigen::VectorXd field(const ControlAffineModel& m, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& u) {
  return m.drift(x) + m.actuation(x) * u;
}

}  // namespace

Eigen::VectorXd step_rk4(const ControlAffineModel& model,
                         const Eigen::VectorXd& state,
                         const Eigen::VectorXd& control, double dt) {
  if (state.size() != model.state_dim || control.size() != model.input_dim) {
    throw std::invalid_argument("step_rk4: dimension mismatch");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("step_rk4: dt must be positive and finite");
  }
  if (!state.allFinite() || !control.allFinite()) {
    throw std::domain_error("step_rk4: non-finite state or control");
  }
  const Eigen::VectorXd k1 = field(model, state, control);
  const Eigen::VectorXd k2 = field(model, state + 0.5 * dt * k1, control);
  const Eigen::VectorXd k3 = field(model, state + 0.5 * dt * k2, control);
  const Eigen::VectorXd k4 = field(model, state + dt * k3, control);
  Eigen::VectorXd next = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (model.normalize) next = model.normalize(next);
  if (!next.allFinite()) {
    throw std::domain_error("step_rk4: non-finite result");
  }
  return next;
}

ControlAffineModel unicycle_model() {
  ControlAffineModel m;
  m.state_dim = 3;
  m.input_dim = 2;
  m.drift = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Zero(x.size());
  };
  m.actuation = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd g(3, 2);
    g << std::cos(x[2]), 0.0, std::sin(x[2]), 0.0, 0.0, 1.0;
    return g;
  };
  m.normalize = [](Eigen::VectorXd x) {
    x[2] = wrap_angle(x[2]);
    return x;
  };
  return m;
}

Pose2 to_pose(const Eigen::VectorXd& s) {
  return Pose2{{s[0], s[1]}, s[2]};
}

Eigen::VectorXd to_state(const Pose2& pose) {
  Eigen::VectorXd s(3);
  s << pose.position.x(), pose.position.y(), pose.heading;
  return s;
}

Pose2 step_unicycle(const Pose2& pose, const Control& u, double dt) {
  static const ControlAffineModel model = unicycle_model();
  Eigen::VectorXd uc(2);
  uc << u.v, u.omega;
  return to_pose(step_rk4(model, to_state(pose), uc, dt));
}

}  // namespace drnav
