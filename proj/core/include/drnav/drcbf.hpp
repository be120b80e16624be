#pragma once

#include <Eigen/Core>
#include <vector>

#include "drnav/dynamics.hpp"
#include "drnav/geometry.hpp"

namespace drnav {

struct ObstaclePoint {
  Vec2 position{0.0, 0.0};
  Vec2 velocity{0.0, 0.0};
};

// One realization of the barrier uncertainty vector: the coefficients of the
// control barrier condition CBC(u) = lie_coeffs . [1; u] + alpha_h_of_h +
// dh_dt for h(x) the body-frame distance to one obstacle point.
struct UncertaintySample {
  Eigen::Vector3d lie_coeffs{0, 0, 0};  // [Lf h, Lg_v h, Lg_omega h]
  double alpha_h_of_h = 0.0;
  double dh_dt = 0.0;
};

// Builds the sample for one (pose hypothesis, obstacle point) pair via the
// chain rule through the body-frame signed distance. Unicycle inputs
// (v, omega); alpha_h is the linear class-K gain on h.
UncertaintySample build_sample(const Shape& body, const Pose2& pose_sample,
                               const ObstaclePoint& point, double alpha_h_gain);

double cbc_eval(const UncertaintySample& sample, const Control& u);

struct SampleSelection {
  std::vector<UncertaintySample> samples;
  // Fewer candidates than requested; all of them are returned.
  bool short_of_candidates = false;
};

// Scores every (pose sample, point) pair by dh_dt + alpha_h(h) and keeps the
// `count` most critical (lowest score; ties by lower h, then candidate
// order). With a single pose sample and static points this reduces to the
// `count` closest points.
SampleSelection select_samples(const std::vector<ObstaclePoint>& points,
                               const Shape& body,
                               const std::vector<Pose2>& pose_samples,
                               double alpha_h_gain, int count);

// Wasserstein ball radius for N samples at confidence 1 - epsilon_bar under
// the light-tail concentration constants (c1, c2), tail exponent rho, and
// uncertainty dimension dim_k:
//   (log(c1/epsilon_bar) / (c2 N))^(1/max(dim_k, 2))  when N >= log(c1/eb)/c2
//   (log(c1/epsilon_bar) / (c2 N))^(1/rho)            otherwise.
double wasserstein_radius(int sample_count, double epsilon_bar, double c1,
                          double c2, int dim_k, double rho);

// Empirical CVaR at level 1 - epsilon:
// inf_s [ mean((values + s)_+) / epsilon - s ], attained at s = -value_i.
double cvar_empirical(const std::vector<double>& values, double epsilon);

struct AmbiguityConfig {
  double radius_r = 0.05;
  double epsilon = 0.1;
  int sample_count = 5;
  // Concentration constants for wasserstein_radius.
  double c1 = 1.0;
  double c2 = 1.0;
  double rho = 2.0;
};

// Linear inequality rows enforcing the distributionally robust safety
// constraint over the decision vector [u(2), delta, s, beta(N), t]:
//   t >= 1, t >= +-u_j                          (epigraph of max(1, |u|_inf))
//   r t <= s epsilon - mean(beta)               (ambiguity budget)
//   beta_i >= s - CBC_i(u), beta_i >= 0.
struct DrConstraintRows {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  int input_dim = 2;
  int sample_count = 0;
  int dim() const { return input_dim + 3 + sample_count; }
};

DrConstraintRows dr_constraint_rows(const std::vector<UncertaintySample>& samples,
                                    const AmbiguityConfig& config);

}  // namespace drnav
