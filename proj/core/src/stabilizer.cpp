#include "drnav/stabilizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drnav {

namespace {

constexpr double kGoalEps = 1e-12;

struct BodyError {
  double e_par;   // along the heading
  double e_perp;  // left of the heading
  double dist2;
  double psi;     // bearing error atan2(e_perp, e_par)
};

BodyError body_error(const Pose2& state, const Vec2& reference) {
  const Vec2 d = reference - state.position;
  const double c = std::cos(state.heading);
  const double s = std::sin(state.heading);
  BodyError e;
  e.e_par = c * d.x() + s * d.y();
  e.e_perp = -s * d.x() + c * d.y();
  e.dist2 = d.squaredNorm();
  e.psi = std::atan2(e.e_perp, e.e_par);
  return e;
}

}  // namespace

double clf_value(const ClfParams& params, const Pose2& state, const Vec2& reference) {
  const Vec2 d = reference - state.position;
  if (d.norm() <= kGoalEps) return 0.0;
  const BodyError e = body_error(state, reference);
  return 0.5 * (params.k_v * e.dist2 + params.k_omega * e.psi * e.psi);
}

ClfLieTerms clf_lie_terms(const ClfParams& params, const Pose2& state,
                          const Vec2& reference) {
  const BodyError e = body_error(state, reference);
  if (std::sqrt(e.dist2) <= kGoalEps) {
    throw std::domain_error("clf_lie_terms: undefined at the reference");
  }
  ClfLieTerms t;
  t.lf = 0.0;
  t.lg[0] = -params.k_v * e.e_par + params.k_omega * e.psi * e.e_perp / e.dist2;
  t.lg[1] = -params.k_omega * e.psi;
  return t;
}

Control min_norm_control(const ClfParams& params, const Pose2& state,
                         const Vec2& reference) {
  if ((reference - state.position).norm() <= kGoalEps) return Control{0.0, 0.0};
  const double v = clf_value(params, state, reference);
  const ClfLieTerms t = clf_lie_terms(params, state, reference);
  const double lg2 = t.lg.squaredNorm();
  if (lg2 <= kGoalEps) return Control{0.0, 0.0};
  const double alpha = params.alpha_v_gain * v;
  const Eigen::Vector2d u = -(t.lf + alpha) / lg2 * t.lg;
  return Control{u[0], u[1]};
}

Path::Path(std::vector<Vec2> waypoints) : pts_(std::move(waypoints)) {
  if (pts_.empty()) throw std::invalid_argument("path needs at least one waypoint");
  cum_.resize(pts_.size(), 0.0);
  for (std::size_t i = 1; i < pts_.size(); ++i) {
    cum_[i] = cum_[i - 1] + (pts_[i] - pts_[i - 1]).norm();
  }
}

Vec2 Path::eval(double s) const {
  if (pts_.empty()) throw std::logic_error("eval on an empty path");
  if (pts_.size() == 1 || length() <= 0.0) return pts_.front();
  const double target = std::clamp(s, 0.0, 1.0) * length();
  auto it = std::lower_bound(cum_.begin(), cum_.end(), target);
  if (it == cum_.begin()) return pts_.front();
  const std::size_t hi = static_cast<std::size_t>(it - cum_.begin());
  const std::size_t lo = hi - 1;
  const double seg = cum_[hi] - cum_[lo];
  const double t = seg > 0.0 ? (target - cum_[lo]) / seg : 0.0;
  return pts_[lo] + t * (pts_[hi] - pts_[lo]);
}

double Path::project(const Vec2& p) const {
  if (pts_.empty()) throw std::logic_error("project on an empty path");
  if (pts_.size() == 1 || length() <= 0.0) return 0.0;
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
    const Vec2 e = pts_[i + 1] - pts_[i];
    const double e2 = e.squaredNorm();
    const double t = e2 > 0.0 ? std::clamp(e.dot(p - pts_[i]) / e2, 0.0, 1.0) : 0.0;
    const Vec2 q = pts_[i] + t * e;
    const double d2 = (p - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = (cum_[i] + t * std::sqrt(e2)) / length();
    }
  }
  return best_s;
}

double governor_rate(const GovernorState& gov, const Vec2& robot_position,
                     const Path& path) {
  const double g = std::clamp(gov.g, 0.0, 1.0);
  const double lag = (robot_position - path.eval(g)).norm();
  return gov.k_gov * (1.0 - std::pow(g, gov.zeta)) / (1.0 + lag);
}

GovernorState governor_step(const GovernorState& gov, const Vec2& robot_position,
                            const Path& path, double dt) {
  GovernorState next = gov;
  next.g = std::clamp(gov.g + dt * governor_rate(gov, robot_position, path), 0.0, 1.0);
  return next;
}

double governor_energy(const GovernorState& gov) {
  const double e = 1.0 - gov.g;
  return 0.5 * e * e;
}

}  // namespace drnav
