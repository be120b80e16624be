#include "drnav/drcbf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace drnav {

UncertaintySample build_sample(const Shape& body, const Pose2& pose_sample,
                               const ObstaclePoint& point, double alpha_h_gain) {
  const Vec2 offset = point.position - pose_sample.position;
  const Vec2 p_body = pose_sample.rotation().transpose() * offset;
  const double h = sdf_eval(body, p_body);
  const Vec2 grad_body = sdf_gradient(body, p_body).grad;

  // h(x) = d(R(theta)^T (q - p)); world-frame partials follow by chain rule.
  const Vec2 grad_world = pose_sample.rotation() * grad_body;
  const double c = std::cos(pose_sample.heading);
  const double s = std::sin(pose_sample.heading);
  // d(R^T)/dtheta applied to (q - p).
  const Vec2 drt(-s * offset.x() + c * offset.y(),
                 -c * offset.x() - s * offset.y());
  const double dh_dtheta = grad_body.dot(drt);

  UncertaintySample out;
  out.lie_coeffs[0] = 0.0;  // driftless
  out.lie_coeffs[1] = -grad_world.x() * c - grad_world.y() * s;
  out.lie_coeffs[2] = dh_dtheta;
  out.alpha_h_of_h = alpha_h_gain * h;
  out.dh_dt = grad_world.dot(point.velocity);
  return out;
}

double cbc_eval(const UncertaintySample& sample, const Control& u) {
  return sample.lie_coeffs[0] + sample.lie_coeffs[1] * u.v +
         sample.lie_coeffs[2] * u.omega + sample.alpha_h_of_h + sample.dh_dt;
}

SampleSelection select_samples(const std::vector<ObstaclePoint>& points,
                               const Shape& body,
                               const std::vector<Pose2>& pose_samples,
                               double alpha_h_gain, int count) {
  if (count < 1) throw std::invalid_argument("select_samples: count must be >= 1");
  if (!(alpha_h_gain > 0.0)) {
    throw std::invalid_argument("select_samples: alpha_h_gain must be positive");
  }
  struct Scored {
    UncertaintySample sample;
    double score;
    std::size_t order;
  };
  std::vector<Scored> scored;
  scored.reserve(points.size() * pose_samples.size());
  std::size_t order = 0;
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    for (std::size_t si = 0; si < pose_samples.size(); ++si) {
      UncertaintySample s =
          build_sample(body, pose_samples[si], points[pi], alpha_h_gain);
      scored.push_back({s, s.dh_dt + s.alpha_h_of_h, order++});
    }
  }
  SampleSelection out;
  out.short_of_candidates = scored.size() < static_cast<std::size_t>(count);
  const std::size_t take =
      std::min(scored.size(), static_cast<std::size_t>(count));
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), [](const Scored& a, const Scored& b) {
                      if (a.score != b.score) return a.score < b.score;
                      // alpha_h_of_h is monotone in h, so this orders by h.
                      if (a.sample.alpha_h_of_h != b.sample.alpha_h_of_h) {
                        return a.sample.alpha_h_of_h < b.sample.alpha_h_of_h;
                      }
                      return a.order < b.order;
                    });
  out.samples.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.samples.push_back(scored[i].sample);
  return out;
}

double wasserstein_radius(int sample_count, double epsilon_bar, double c1,
                          double c2, int dim_k, double rho) {
  if (sample_count < 1) throw std::invalid_argument("wasserstein_radius: N >= 1");
  if (!(epsilon_bar > 0.0) || !(epsilon_bar < 1.0)) {
    throw std::invalid_argument("wasserstein_radius: epsilon_bar in (0, 1)");
  }
  if (!(c1 >= 1.0) || !(c2 > 0.0) || dim_k < 1 || !(rho > 0.0)) {
    throw std::invalid_argument("wasserstein_radius: bad constants");
  }
  const double log_term = std::log(c1 / epsilon_bar);
  const double base = log_term / (c2 * sample_count);
  const double exponent = sample_count >= log_term / c2
                              ? 1.0 / std::max(dim_k, 2)
                              : 1.0 / rho;
  return std::pow(base, exponent);
}

double cvar_empirical(const std::vector<double>& values, double epsilon) {
  if (values.empty()) throw std::invalid_argument("cvar_empirical: empty sample");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("cvar_empirical: epsilon in (0, 1]");
  }
  // The objective is piecewise linear and convex in s with kinks at
  // s = -value_i, so scanning the kinks is exact.
  const double inv_n = 1.0 / static_cast<double>(values.size());
  double best = std::numeric_limits<double>::infinity();
  for (const double cand : values) {
    const double s = -cand;
    double acc = 0.0;
    for (const double v : values) acc += std::max(v + s, 0.0);
    best = std::min(best, acc * inv_n / epsilon - s);
  }
  return best;
}

DrConstraintRows dr_constraint_rows(const std::vector<UncertaintySample>& samples,
                                    const AmbiguityConfig& config) {
  if (samples.empty()) {
    throw std::invalid_argument("dr_constraint_rows: need at least one sample");
  }
  if (!(config.radius_r >= 0.0)) {
    throw std::invalid_argument("dr_constraint_rows: radius must be >= 0");
  }
  if (!(config.epsilon > 0.0) || !(config.epsilon < 1.0)) {
    throw std::invalid_argument("dr_constraint_rows: epsilon in (0, 1)");
  }
  const int n_samples = static_cast<int>(samples.size());
  DrConstraintRows rows;
  rows.sample_count = n_samples;
  const int m = rows.input_dim;
  const int dim = rows.dim();
  const int i_delta = m;          // unused by these rows; kept in the layout
  const int i_s = m + 1;
  const int i_beta = m + 2;
  const int i_t = m + 2 + n_samples;
  (void)i_delta;
  const int row_count = 2 * m + 2 + 2 * n_samples;
  rows.A = Eigen::MatrixXd::Zero(row_count, dim);
  rows.b = Eigen::VectorXd::Zero(row_count);

  int row = 0;
  // t >= 1 and t >= +-u_j: epigraph of max(1, |u|_inf).
  rows.A(row, i_t) = -1.0;
  rows.b(row) = -1.0;
  ++row;
  for (int j = 0; j < m; ++j) {
    rows.A(row, j) = 1.0;
    rows.A(row, i_t) = -1.0;
    ++row;
    rows.A(row, j) = -1.0;
    rows.A(row, i_t) = -1.0;
    ++row;
  }
  // r t - epsilon s + mean(beta) <= 0.
  rows.A(row, i_t) = config.radius_r;
  rows.A(row, i_s) = -config.epsilon;
  for (int i = 0; i < n_samples; ++i) {
    rows.A(row, i_beta + i) = 1.0 / n_samples;
  }
  ++row;
  // beta_i >= s - CBC_i(u)  <=>  s - beta_i - Lg h . u <= const_i.
  for (int i = 0; i < n_samples; ++i) {
    const UncertaintySample& smp = samples[static_cast<std::size_t>(i)];
    rows.A(row, 0) = -smp.lie_coeffs[1];
    rows.A(row, 1) = -smp.lie_coeffs[2];
    rows.A(row, i_s) = 1.0;
    rows.A(row, i_beta + i) = -1.0;
    rows.b(row) = smp.lie_coeffs[0] + smp.alpha_h_of_h + smp.dh_dt;
    ++row;
  }
  for (int i = 0; i < n_samples; ++i) {
    rows.A(row, i_beta + i) = -1.0;
    ++row;
  }
  return rows;
}

}  // namespace drnav
