#include "drnav/controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "drnav/qp.hpp"

namespace drnav {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Rows bounding u inside the input box, over a `dim`-wide decision vector
// with u in the first two slots.
void append_box_rows(const ControllerConfig& cfg, int dim, Eigen::MatrixXd* a,
                     Eigen::VectorXd* b) {
  const int base = static_cast<int>(a->rows());
  a->conservativeResize(base + 4, dim);
  b->conservativeResize(base + 4);
  a->bottomRows(4).setZero();
  (*a)(base + 0, 0) = 1.0;
  (*b)(base + 0) = cfg.v_max;
  (*a)(base + 1, 0) = -1.0;
  (*b)(base + 1) = -cfg.v_min;
  (*a)(base + 2, 1) = 1.0;
  (*b)(base + 2) = cfg.omega_max;
  (*a)(base + 3, 1) = -1.0;
  (*b)(base + 3) = -cfg.omega_min;
}

struct ClcRow {
  Eigen::RowVectorXd coeffs;
  double rhs;
};

// LgV . u - delta <= -LfV - alpha_V(V), alpha_V(r) = alpha_v_gain * r.
ClcRow clc_row(const ControllerConfig& cfg, const Pose2& estimate,
               const Vec2& reference, int dim) {
  const double v = clf_value(cfg.clf, estimate, reference);
  const ClfLieTerms lie = clf_lie_terms(cfg.clf, estimate, reference);
  ClcRow row;
  row.coeffs = Eigen::RowVectorXd::Zero(dim);
  row.coeffs(0) = lie.lg[0];
  row.coeffs(1) = lie.lg[1];
  row.coeffs(2) = -1.0;
  row.rhs = -lie.lf - cfg.clf.alpha_v_gain * v;
  return row;
}

ControlOutput run_qp(const ControllerConfig& cfg, const QuadraticProgram& qp,
                     const std::vector<UncertaintySample>& samples,
                     Clock::time_point t0) {
  ControlOutput out;
  const QpSolution sol = solve(qp, cfg.qp_tol, cfg.qp_max_iter);
  if (sol.status != QpStatus::kOptimal) {
    out.status = ControlStatus::kInfeasibleStop;
    out.control = Control{0.0, 0.0};
  } else {
    out.control.v = std::clamp(sol.z[0], cfg.v_min, cfg.v_max);
    out.control.omega = std::clamp(sol.z[1], cfg.omega_min, cfg.omega_max);
    out.delta = sol.z[2];
  }
  for (const UncertaintySample& s : samples) {
    out.cbc_margin = std::min(out.cbc_margin, cbc_eval(s, out.control));
  }
  out.solve_time = seconds_since(t0);
  return out;
}

}  // namespace

ControlOutput clf_dr_cbf_step(const ControllerConfig& cfg, const Pose2& estimate,
                              const std::vector<Pose2>& pose_samples,
                              const std::vector<ObstaclePoint>& points,
                              const Vec2& reference) {
  const auto t0 = Clock::now();

  SampleSelection sel;
  if (!points.empty() && !pose_samples.empty()) {
    sel = select_samples(points, cfg.robot_shape, pose_samples, cfg.alpha_h_gain,
                         cfg.ambiguity.sample_count);
  }

  if ((reference - estimate.position).norm() <= cfg.goal_tolerance) {
    ControlOutput out;
    for (const UncertaintySample& s : sel.samples) {
      out.cbc_margin = std::min(out.cbc_margin, cbc_eval(s, out.control));
    }
    out.solve_time = seconds_since(t0);
    return out;
  }

  const int n_samples = static_cast<int>(sel.samples.size());
  // Decision vector [v, omega, delta] extended by [s, beta.., t] when safety
  // samples are active.
  const int dim = n_samples > 0 ? 2 + 3 + n_samples : 3;

  QuadraticProgram qp;
  qp.P = Eigen::MatrixXd::Zero(dim, dim);
  qp.P(0, 0) = 2.0;
  qp.P(1, 1) = 2.0;
  qp.P(2, 2) = 2.0 * cfg.lambda;
  qp.q = Eigen::VectorXd::Zero(dim);
  qp.q[0] = -2.0 * cfg.nominal_control.v;
  qp.q[1] = -2.0 * cfg.nominal_control.omega;

  const ClcRow clc = clc_row(cfg, estimate, reference, dim);
  if (n_samples > 0) {
    const DrConstraintRows dr = dr_constraint_rows(sel.samples, cfg.ambiguity);
    const int dr_rows = static_cast<int>(dr.A.rows());
    qp.A = Eigen::MatrixXd::Zero(1 + dr_rows, dim);
    qp.b = Eigen::VectorXd::Zero(1 + dr_rows);
    qp.A.row(0) = clc.coeffs;
    qp.b[0] = clc.rhs;
    qp.A.bottomRows(dr_rows) = dr.A;
    qp.b.tail(dr_rows) = dr.b;
  } else {
    qp.A = clc.coeffs;
    qp.b = Eigen::VectorXd::Constant(1, clc.rhs);
  }
  append_box_rows(cfg, dim, &qp.A, &qp.b);

  return run_qp(cfg, qp, sel.samples, t0);
}

ControlOutput nominal_clf_cbf_step(const ControllerConfig& cfg,
                                   const Pose2& estimate,
                                   const std::vector<ObstaclePoint>& points,
                                   const Vec2& reference) {
  const auto t0 = Clock::now();

  std::vector<UncertaintySample> samples;
  if (!points.empty()) {
    const ObstaclePoint* closest = &points.front();
    double best = std::numeric_limits<double>::infinity();
    for (const ObstaclePoint& p : points) {
      const double h = robot_sdf(cfg.robot_shape, estimate, p.position);
      if (h < best) {
        best = h;
        closest = &p;
      }
    }
    samples.push_back(
        build_sample(cfg.robot_shape, estimate, *closest, cfg.alpha_h_gain));
  }

  if ((reference - estimate.position).norm() <= cfg.goal_tolerance) {
    ControlOutput out;
    for (const UncertaintySample& s : samples) {
      out.cbc_margin = std::min(out.cbc_margin, cbc_eval(s, out.control));
    }
    out.solve_time = seconds_since(t0);
    return out;
  }

  const int dim = 3;
  QuadraticProgram qp;
  qp.P = Eigen::MatrixXd::Zero(dim, dim);
  qp.P(0, 0) = 2.0;
  qp.P(1, 1) = 2.0;
  qp.P(2, 2) = 2.0 * cfg.lambda;
  qp.q = Eigen::VectorXd::Zero(dim);
  qp.q[0] = -2.0 * cfg.nominal_control.v;
  qp.q[1] = -2.0 * cfg.nominal_control.omega;

  const ClcRow clc = clc_row(cfg, estimate, reference, dim);
  const int cbc_rows = samples.empty() ? 0 : 1;
  qp.A = Eigen::MatrixXd::Zero(1 + cbc_rows, dim);
  qp.b = Eigen::VectorXd::Zero(1 + cbc_rows);
  qp.A.row(0) = clc.coeffs;
  qp.b[0] = clc.rhs;
  if (cbc_rows > 0) {
    // CBC(u) >= 0.
    const UncertaintySample& s = samples.front();
    qp.A(1, 0) = -s.lie_coeffs[1];
    qp.A(1, 1) = -s.lie_coeffs[2];
    qp.b[1] = s.lie_coeffs[0] + s.alpha_h_of_h + s.dh_dt;
  }
  append_box_rows(cfg, dim, &qp.A, &qp.b);

  return run_qp(cfg, qp, samples, t0);
}

}  // namespace drnav
