#pragma once

#include <Eigen/Core>
#include <vector>

#include "drnav/dynamics.hpp"
#include "drnav/geometry.hpp"

namespace drnav {

struct ClfParams {
  double k_v = 0.05;
  double k_omega = 0.4;
  double alpha_v_gain = 1.0;
};

// V = 0.5 * (k_v |q - p|^2 + k_omega * atan2(e_perp, e_par)^2) where
// (e_par, e_perp) are the body-frame coordinates of q - p. Exactly 0 when
// the reference coincides with the position (within 1e-12).
double clf_value(const ClfParams& params, const Pose2& state, const Vec2& reference);

struct ClfLieTerms {
  double lf = 0.0;          // drift term; zero for the driftless unicycle
  Eigen::Vector2d lg{0, 0}; // d/du of V_dot, inputs (v, omega)
};

// Throws std::domain_error when the reference coincides with the position;
// callers take the on-goal branch before calling.
ClfLieTerms clf_lie_terms(const ClfParams& params, const Pose2& state,
                          const Vec2& reference);

// Pointwise min-norm stabilizer u = -alpha_V(V) LgV^T / |LgV|^2 with linear
// alpha_V(r) = alpha_v_gain * r; returns zero input at the reference.
Control min_norm_control(const ClfParams& params, const Pose2& state,
                         const Vec2& reference);

// Piecewise-linear curve parametrized by normalized arc length s in [0, 1].
class Path {
 public:
  Path() = default;
  explicit Path(std::vector<Vec2> waypoints);

  bool empty() const { return pts_.empty(); }
  double length() const { return cum_.empty() ? 0.0 : cum_.back(); }
  // Position at normalized arc length s (clamped into [0, 1]). Degenerate
  // single-point paths evaluate to that point for every s.
  Vec2 eval(double s) const;
  // Normalized arc length of the closest path point to p.
  double project(const Vec2& p) const;
  const std::vector<Vec2>& waypoints() const { return pts_; }

 private:
  std::vector<Vec2> pts_;
  std::vector<double> cum_;
};

// Reference governor state: g in [0, 1] tracks progress along the path,
// g_dot = k_gov * (1 - g^zeta) / (1 + |p - path(g)|).
struct GovernorState {
  double g = 0.0;
  double k_gov = 1.0;
  double zeta = 2.0;
};

double governor_rate(const GovernorState& gov, const Vec2& robot_position,
                     const Path& path);

// Forward Euler update of g; the result stays in [0, 1].
GovernorState governor_step(const GovernorState& gov, const Vec2& robot_position,
                            const Path& path, double dt);

// Governor energy 0.5 * (1 - g)^2.
double governor_energy(const GovernorState& gov);

}  // namespace drnav
