// Quantitative acceptance campaign for the navigation stack. Each criterion
// prints exactly one PASS/FAIL line; the process exits nonzero when any
// criterion fails. Criteria 1-3 run the full closed-loop simulator on the
// shipped scenario configs; the rest exercise the controller, solver, and
// supporting modules directly against independent references.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "drnav/controller.hpp"
#include "drnav/drcbf.hpp"
#include "drnav/dynamics.hpp"
#include "drnav/geometry.hpp"
#include "drnav/harness.hpp"
#include "drnav/planner.hpp"
#include "drnav/qp.hpp"
#include "drnav/random.hpp"
#include "drnav/stabilizer.hpp"

namespace {

using namespace drnav;

int g_failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", index, name,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void note(const std::string& text) {
  std::printf("      %s\n", text.c_str());
  std::fflush(stdout);
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

std::string config_path(const char* file) {
  return std::string(DRNAV_CONFIG_DIR) + "/" + file;
}

struct OutcomeCounts {
  int success = 0;
  int stuck = 0;
  int collision = 0;
};

OutcomeCounts count_outcomes(const MetricsTable& table) {
  OutcomeCounts c;
  for (const TrialRecord& t : table.trials) {
    switch (t.outcome) {
      case TrialOutcome::kSuccess: ++c.success; break;
      case TrialOutcome::kStuck: ++c.stuck; break;
      case TrialOutcome::kCollision: ++c.collision; break;
    }
  }
  return c;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Criterion 1: cluttered static scenario at low sensing noise. The robust
// controller must finish every trial without contact: zero collisions, at
// most 2 stuck trials out of 100.
void criterion1() {
  ExperimentConfig cfg = load_config(config_path("static_cluttered.json"));
  cfg.lidar.noise_sigma = 0.001;
  cfg.localization.sigma_xy = 0.01;
  cfg.controller = ControllerKind::kDrCbf;
  cfg.trial_count = 100;
  Timer timer;
  MetricsTable m = run_experiment(cfg);
  const double elapsed = timer.seconds();
  OutcomeCounts c = count_outcomes(m);
  const bool pass = c.collision == 0 && c.stuck <= 2 && elapsed < 300.0;
  report(1, "static clutter, low noise", pass,
         fmt("collisions %d/100, stuck %d/100, success %d/100, %.1f s (budget 300)",
             c.collision, c.stuck, c.success, elapsed));
}

// ---------------------------------------------------------------------------
// Criterion 2: same scenario at high sensing noise (lidar sigma 0.1 m,
// localization sigma 0.05 m). The robust controller must collide in fewer
// than a third of the baseline's trials and in at most 10% overall.
void criterion2() {
  ExperimentConfig cfg = load_config(config_path("static_cluttered.json"));
  cfg.lidar.noise_sigma = 0.1;
  cfg.localization.sigma_xy = 0.05;
  cfg.trial_count = 100;

  cfg.controller = ControllerKind::kDrCbf;
  MetricsTable dr = run_experiment(cfg);
  cfg.controller = ControllerKind::kNominal;
  MetricsTable nom = run_experiment(cfg);

  OutcomeCounts cd = count_outcomes(dr);
  OutcomeCounts cn = count_outcomes(nom);
  const bool pass = 3 * cd.collision < cn.collision && cd.collision <= 10;
  report(2, "static clutter, high noise", pass,
         fmt("robust collisions %d/100 vs baseline %d/100 (need robust*3 < baseline "
             "and robust <= 10)",
             cd.collision, cn.collision));
}

// ---------------------------------------------------------------------------
// Criterion 3: pedestrian scenario. The robust controller must beat the
// baseline success rate by at least 10 points and collide in at most 5% of
// trials.
void criterion3() {
  ExperimentConfig cfg = load_config(config_path("dynamic_pedestrians.json"));
  cfg.trial_count = 100;

  cfg.controller = ControllerKind::kDrCbf;
  MetricsTable dr = run_experiment(cfg);
  cfg.controller = ControllerKind::kNominal;
  MetricsTable nom = run_experiment(cfg);

  OutcomeCounts cd = count_outcomes(dr);
  OutcomeCounts cn = count_outcomes(nom);
  const bool pass = cd.success >= cn.success + 10 && cd.collision <= 5;
  report(3, "pedestrians", pass,
         fmt("robust success %d/100 vs baseline %d/100 (need +10), robust "
             "collisions %d/100 (need <= 5)",
             cd.success, cn.success, cd.collision));
}

// ---------------------------------------------------------------------------
// Criterion 4: chance-constraint coverage. Fit the robust constraint to 5
// samples of the barrier uncertainty vector drawn from a truncated Gaussian,
// solve for the control, then estimate the satisfaction probability under
// 1e5 fresh draws. With epsilon = epsilon_bar = 0.1 the target probability
// (1 - eps)(1 - eps_bar) = 0.81 must be met in at least 95% of 200 repeats,
// in under two minutes. The concentration-rule radius for 5 samples demands
// a barrier margin of r * max(1,|u|) / eps ~ 10, so the barrier mean is
// scaled to keep the program feasible under the +-2 sigma truncation.
namespace lemma_mc {

constexpr double kMu[5] = {0.0, -1.0, 0.0, 14.0, 0.0};
constexpr double kSigma[5] = {0.05, 0.15, 0.1, 0.3, 0.1};

UncertaintySample draw_sample(Rng& rng) {
  double z[5];
  for (int j = 0; j < 5; ++j) {
    double t;
    do {
      t = rng.normal();
    } while (std::abs(t) > 2.0);
    z[j] = kMu[j] + kSigma[j] * t;
  }
  UncertaintySample s;
  s.lie_coeffs = Eigen::Vector3d(z[0], z[1], z[2]);
  s.alpha_h_of_h = z[3];
  s.dh_dt = z[4];
  return s;
}

}  // namespace lemma_mc

void criterion4() {
  constexpr int kTrials = 200;
  constexpr int kFresh = 100000;
  constexpr double kVMax = 1.2, kWMax = 1.0, kLambda = 50.0;

  AmbiguityConfig amb;
  amb.sample_count = 5;
  amb.epsilon = 0.1;
  amb.radius_r = wasserstein_radius(5, 0.1, 1.0, 1.0, 5, 2.0);

  Timer timer;
  int covered = 0;
  int solver_failures = 0;
  double worst_p = 1.0;
  for (int trial = 0; trial < kTrials; ++trial) {
    Rng fit_rng(900000 + static_cast<std::uint64_t>(trial));
    std::vector<UncertaintySample> samples;
    for (int i = 0; i < amb.sample_count; ++i)
      samples.push_back(lemma_mc::draw_sample(fit_rng));

    DrConstraintRows rows = dr_constraint_rows(samples, amb);
    const int dim = rows.dim();
    const int base = rows.A.rows();
    QuadraticProgram qp;
    qp.P = Eigen::MatrixXd::Zero(dim, dim);
    qp.P(0, 0) = 2.0;
    qp.P(1, 1) = 2.0;
    qp.P(2, 2) = 2.0 * kLambda;
    qp.q = Eigen::VectorXd::Zero(dim);
    qp.q(0) = -2.0 * 1.2;  // nominal control (1.2, 0): drive into the rows
    qp.A = Eigen::MatrixXd::Zero(base + 4, dim);
    qp.b = Eigen::VectorXd::Zero(base + 4);
    qp.A.topRows(base) = rows.A;
    qp.b.head(base) = rows.b;
    qp.A(base + 0, 0) = 1.0;  qp.b(base + 0) = kVMax;
    qp.A(base + 1, 0) = -1.0; qp.b(base + 1) = kVMax;
    qp.A(base + 2, 1) = 1.0;  qp.b(base + 2) = kWMax;
    qp.A(base + 3, 1) = -1.0; qp.b(base + 3) = kWMax;

    QpSolution sol = solve(qp, 1e-7, 2000);
    if (sol.status != QpStatus::kOptimal) {
      ++solver_failures;
      continue;  // counted against coverage below
    }
    Control u{std::clamp(sol.z(0), -kVMax, kVMax),
              std::clamp(sol.z(1), -kWMax, kWMax)};

    Rng eval_rng(700000 + static_cast<std::uint64_t>(trial));
    int satisfied = 0;
    for (int k = 0; k < kFresh; ++k) {
      UncertaintySample xi = lemma_mc::draw_sample(eval_rng);
      if (cbc_eval(xi, u) >= 0.0) ++satisfied;
    }
    const double p_hat = static_cast<double>(satisfied) / kFresh;
    worst_p = std::min(worst_p, p_hat);
    if (p_hat >= 0.81) ++covered;
  }
  const double elapsed = timer.seconds();
  const bool pass = covered >= 190 && elapsed < 120.0;
  report(4, "chance-constraint coverage", pass,
         fmt("%d/200 trials with satisfaction prob >= 0.81 (need 190), worst "
             "%.4f, solver failures %d, %.1f s (budget 120)",
             covered, worst_p, solver_failures, elapsed));
}

// ---------------------------------------------------------------------------
// Criterion 5: the robust QP against an exhaustive 2-D grid search over the
// input box. The grid oracle decides feasibility of a candidate input from
// the scalar reduction r * max(1, |u|_inf) + CVaR(-CBC(u)) <= 0 and scores
// it with |u - nominal|^2 + lambda * max(0, CLC(u))^2, which eliminates the
// auxiliary variables analytically. 200 random instances with up to 3
// samples must agree within 2e-3 on the control and 1e-4 relative on the
// objective.
namespace qp_oracle {

struct Instance {
  std::vector<UncertaintySample> samples;
  double radius = 0.0;
  double epsilon = 0.1;
  Eigen::Vector2d clc_grad{0.0, 0.0};  // CLC(u) = clc_grad . u + clc_const
  double clc_const = 0.0;
  Control nominal{1.2, 0.0};
  double lambda = 50.0;
  double v_max = 1.2;
  double omega_max = 1.0;
};

// Exact scalar feasibility test
//   r * max(1, |u|_inf) + inf_s [ mean((-CBC_i + s)_+) - s * eps ] <= 0,
// where the inner infimum equals eps times the empirical CVaR of -CBC.
double reduction(const Instance& inst, double v, double w) {
  std::vector<double> neg_cbc;
  neg_cbc.reserve(inst.samples.size());
  for (const UncertaintySample& s : inst.samples)
    neg_cbc.push_back(-cbc_eval(s, Control{v, w}));
  const double scale = std::max(1.0, std::max(std::abs(v), std::abs(w)));
  return inst.radius * scale +
         inst.epsilon * cvar_empirical(neg_cbc, inst.epsilon);
}

double objective(const Instance& inst, double v, double w) {
  const double dv = v - inst.nominal.v;
  const double dw = w - inst.nominal.omega;
  const double clc = inst.clc_grad(0) * v + inst.clc_grad(1) * w + inst.clc_const;
  const double delta = std::max(0.0, clc);
  return dv * dv + dw * dw + inst.lambda * delta * delta;
}

struct GridBest {
  bool feasible = false;
  double v = 0.0, w = 0.0;
  double obj = std::numeric_limits<double>::infinity();
};

void scan(const Instance& inst, double v_lo, double v_hi, double w_lo,
          double w_hi, double step_v, double step_w, GridBest* best) {
  v_lo = std::max(v_lo, -inst.v_max);
  v_hi = std::min(v_hi, inst.v_max);
  w_lo = std::max(w_lo, -inst.omega_max);
  w_hi = std::min(w_hi, inst.omega_max);
  const int nv = static_cast<int>(std::floor((v_hi - v_lo) / step_v + 1e-9)) + 1;
  const int nw = static_cast<int>(std::floor((w_hi - w_lo) / step_w + 1e-9)) + 1;
  for (int i = 0; i < nv; ++i) {
    const double v = std::min(v_lo + i * step_v, v_hi);
    for (int j = 0; j < nw; ++j) {
      const double w = std::min(w_lo + j * step_w, w_hi);
      if (reduction(inst, v, w) > 0.0) continue;
      const double obj = objective(inst, v, w);
      if (obj < best->obj) {
        best->feasible = true;
        best->v = v;
        best->w = w;
        best->obj = obj;
      }
    }
  }
}

GridBest search(const Instance& inst) {
  GridBest best;
  scan(inst, -inst.v_max, inst.v_max, -inst.omega_max, inst.omega_max, 0.02,
       0.025, &best);
  if (!best.feasible) return best;
  for (double step : {2e-3, 2e-4}) {
    GridBest refined = best;
    scan(inst, best.v - 15.0 * step, best.v + 15.0 * step, best.w - 15.0 * step,
         best.w + 15.0 * step, step, step, &refined);
    best = refined;
  }
  return best;
}

}  // namespace qp_oracle

void criterion5() {
  constexpr int kInstances = 200;
  int agree_tol = 0, agree_dominance = 0, agree_infeasible = 0, disagree = 0;
  std::string first_failure;

  for (int k = 0; k < kInstances; ++k) {
    Rng rng(7000 + static_cast<std::uint64_t>(k));
    qp_oracle::Instance inst;
    const int n = 1 + k % 3;
    for (int i = 0; i < n; ++i) {
      UncertaintySample s;
      s.lie_coeffs = Eigen::Vector3d(rng.uniform(-0.5, 0.5),
                                     rng.uniform(-1.5, 1.5),
                                     rng.uniform(-0.8, 0.8));
      // Every seventh instance pulls the barrier terms down hard so the
      // infeasible branch is exercised as well.
      s.alpha_h_of_h = (k % 7 == 6) ? rng.uniform(-2.0, -0.5)
                                    : rng.uniform(-0.3, 2.0);
      s.dh_dt = rng.uniform(-0.8, 0.8);
      inst.samples.push_back(s);
    }
    inst.radius = rng.uniform(0.0, 0.25);
    inst.epsilon = rng.uniform(0.1, 0.5);
    inst.clc_grad = Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    inst.clc_const = rng.uniform(0.0, 2.0);
    inst.nominal = Control{rng.uniform(-1.2, 1.2), rng.uniform(-1.0, 1.0)};

    // Full epigraph QP over [v, omega, delta, s, beta..., t].
    AmbiguityConfig amb;
    amb.sample_count = n;
    amb.epsilon = inst.epsilon;
    amb.radius_r = inst.radius;
    DrConstraintRows rows = dr_constraint_rows(inst.samples, amb);
    const int dim = rows.dim();
    const int nr = rows.A.rows();
    QuadraticProgram qp;
    qp.P = Eigen::MatrixXd::Zero(dim, dim);
    qp.P(0, 0) = 2.0;
    qp.P(1, 1) = 2.0;
    qp.P(2, 2) = 2.0 * inst.lambda;
    qp.q = Eigen::VectorXd::Zero(dim);
    qp.q(0) = -2.0 * inst.nominal.v;
    qp.q(1) = -2.0 * inst.nominal.omega;
    qp.A = Eigen::MatrixXd::Zero(nr + 5, dim);
    qp.b = Eigen::VectorXd::Zero(nr + 5);
    qp.A.topRows(nr) = rows.A;
    qp.b.head(nr) = rows.b;
    qp.A(nr + 0, 0) = inst.clc_grad(0);
    qp.A(nr + 0, 1) = inst.clc_grad(1);
    qp.A(nr + 0, 2) = -1.0;
    qp.b(nr + 0) = -inst.clc_const;
    qp.A(nr + 1, 0) = 1.0;  qp.b(nr + 1) = inst.v_max;
    qp.A(nr + 2, 0) = -1.0; qp.b(nr + 2) = inst.v_max;
    qp.A(nr + 3, 1) = 1.0;  qp.b(nr + 3) = inst.omega_max;
    qp.A(nr + 4, 1) = -1.0; qp.b(nr + 4) = inst.omega_max;

    QpSolution sol = solve(qp, 1e-7, 2000);
    qp_oracle::GridBest grid = qp_oracle::search(inst);

    std::string failure;
    if (sol.status == QpStatus::kOptimal) {
      const double v = std::clamp(sol.z(0), -inst.v_max, inst.v_max);
      const double w = std::clamp(sol.z(1), -inst.omega_max, inst.omega_max);
      const double obj_qp = qp_oracle::objective(inst, v, w);
      if (!grid.feasible) {
        // The oracle grid can miss a feasible sliver thinner than its coarse
        // step; accept when the solver's point verifiably satisfies the
        // reduction.
        if (qp_oracle::reduction(inst, v, w) <= 1e-6) {
          ++agree_dominance;
        } else {
          failure = fmt("instance %d: solver optimal but its point violates "
                        "the reduction and the grid found nothing", k);
        }
      } else {
        const double du = std::max(std::abs(v - grid.v), std::abs(w - grid.w));
        const double dobj =
            std::abs(obj_qp - grid.obj) / std::max(1.0, std::abs(grid.obj));
        if (du <= 2e-3 && dobj <= 1e-4) {
          ++agree_tol;
        } else if (obj_qp <= grid.obj + 1e-6 &&
                   qp_oracle::reduction(inst, v, w) <= 1e-9) {
          // Solver found a feasible point at least as good as the oracle's:
          // the oracle grid landed in a different corner of a flat region.
          ++agree_dominance;
        } else {
          failure = fmt("instance %d: |du|=%.2e rel dobj=%.2e (qp %.6f grid %.6f)",
                        k, du, dobj, obj_qp, grid.obj);
        }
      }
    } else {  // solver says infeasible
      if (!grid.feasible) {
        ++agree_infeasible;
      } else if (qp_oracle::reduction(inst, grid.v, grid.w) > -1e-6) {
        ++agree_infeasible;  // grid point sits on the boundary within tolerance
      } else {
        failure = fmt("instance %d: solver infeasible but grid found interior "
                      "point (%.3f, %.3f) with margin %.2e",
                      k, grid.v, grid.w,
                      qp_oracle::reduction(inst, grid.v, grid.w));
      }
    }
    if (!failure.empty()) {
      ++disagree;
      if (first_failure.empty()) first_failure = failure;
    }
  }

  const bool pass = disagree == 0;
  std::string detail =
      fmt("%d/200 agree (%d within tolerance, %d by feasible dominance, %d "
          "infeasible on both sides)",
          kInstances - disagree, agree_tol, agree_dominance, agree_infeasible);
  if (!first_failure.empty()) detail += "; first failure: " + first_failure;
  report(5, "robust QP vs grid oracle", pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 6: controller step latency with 5 ambiguity samples, 3 pose
// hypotheses, and a 100-point scan. Mean wall time at most 10 ms; between 10
// and 15 ms is reported as above target but does not fail the campaign.
void criterion6() {
  ControllerConfig cfg;  // defaults: 5 samples, radius 0.05, epsilon 0.1
  Rng rng(606);
  std::vector<ObstaclePoint> points;
  for (int i = 0; i < 100; ++i) {
    const double angle = rng.uniform(-M_PI, M_PI);
    const double range = rng.uniform(1.5, 8.0);
    ObstaclePoint p;
    p.position = Vec2(range * std::cos(angle), range * std::sin(angle));
    p.velocity = Vec2(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    points.push_back(p);
  }
  const Vec2 reference(2.0, 0.5);

  constexpr int kReps = 500;
  double total = 0.0;
  for (int rep = 0; rep < kReps; ++rep) {
    Pose2 estimate{{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)},
                   0.3 + rng.uniform(-0.02, 0.02)};
    std::vector<Pose2> pose_samples;
    for (int s = 0; s < 3; ++s)
      pose_samples.push_back(Pose2{{estimate.position.x() + rng.normal(0.0, 0.01),
                                    estimate.position.y() + rng.normal(0.0, 0.01)},
                                   estimate.heading + rng.normal(0.0, 0.005)});
    Timer t;
    ControlOutput out = clf_dr_cbf_step(cfg, estimate, pose_samples, points,
                                        reference);
    total += t.seconds();
    (void)out;
  }
  const double mean_ms = total / kReps * 1e3;
  const bool under_target = mean_ms <= 10.0;
  const bool pass = mean_ms <= 15.0;
  report(6, "controller step latency", pass,
         under_target
             ? fmt("mean %.2f ms over %d steps (target 10 ms)", mean_ms, kReps)
             : fmt("mean %.2f ms over %d steps: above the 10 ms target but "
                   "within the 15 ms bound",
                   mean_ms, kReps));
}

// ---------------------------------------------------------------------------
// Criterion 7: stabilizer convergence. (a) From 100 random poses in a 10 m
// obstacle-free box the min-norm law must bring the robot within 0.1 m of
// the goal. (b) Tracking an S-curve through the reference governor must
// drive the progress variable past 0.99 and the robot within 0.1 m of the
// curve's endpoint.
void criterion7() {
  ClfParams params;
  constexpr double kDt = 0.02;

  Rng rng(7707);
  int reached = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Pose2 pose{{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)},
               rng.uniform(-M_PI, M_PI)};
    Vec2 goal(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
    while ((goal - pose.position).norm() < 1.0)
      goal = Vec2(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
    bool ok = false;
    for (int step = 0; step < 6000; ++step) {
      if ((pose.position - goal).norm() <= 0.1) {
        ok = true;
        break;
      }
      pose = step_unicycle(pose, min_norm_control(params, pose, goal), kDt);
    }
    if (ok) ++reached;
  }

  std::vector<Vec2> waypoints;
  for (int i = 0; i <= 40; ++i) {
    const double x = 0.25 * i;
    waypoints.emplace_back(x, 2.0 * std::sin(0.6 * x));
  }
  Path path(waypoints);
  GovernorState gov;
  gov.g = 0.0;
  gov.k_gov = 1.0;
  gov.zeta = 2.0;
  Pose2 pose{path.eval(0.0), 0.0};
  for (int step = 0; step < 12000; ++step) {
    const Vec2 ref = path.eval(gov.g);
    pose = step_unicycle(pose, min_norm_control(params, pose, ref), kDt);
    gov = governor_step(gov, pose.position, path, kDt);
  }
  const double end_dist = (pose.position - path.eval(1.0)).norm();
  const bool scurve_ok = gov.g >= 0.99 && end_dist <= 0.1;

  const bool pass = reached == 100 && scurve_ok;
  report(7, "stabilizer convergence", pass,
         fmt("point goals reached %d/100 within 0.1 m; S-curve progress %.4f "
             "(need 0.99), end distance %.3f m (need 0.1)",
             reached, gov.g, end_dist));
}

// ---------------------------------------------------------------------------
// Criterion 8: condensed property suite. Re-runs the core invariants that
// the per-module unit binaries check at full size: signed-distance
// Lipschitz/eikonal/finite-difference consistency, empirical CVaR against
// brute force, ambiguity monotonicity, the barrier-condition identity,
// A* against Dijkstra, the RK4 convergence order, and per-seed determinism
// of a full trial.
namespace props {

std::vector<Shape> sdf_shapes() {
  std::vector<Shape> shapes;
  shapes.push_back(Shape{Circle{{0.3, -0.2}, 0.8}});
  shapes.push_back(Shape{ConvexPolygon{{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0},
                                        {-1.0, 1.0}}}});
  shapes.push_back(Shape{ShapeUnion{{Shape{Circle{{-1.2, 0.0}, 0.5}},
                                     Shape{Circle{{1.2, 0.3}, 0.7}},
                                     Shape{ConvexPolygon{{{-0.4, -1.5},
                                                          {0.6, -1.5},
                                                          {0.6, -0.5},
                                                          {-0.4, -0.5}}}}}}});
  return shapes;
}

bool sdf_properties(std::string* why) {
  Rng rng(8801);
  for (const Shape& shape : sdf_shapes()) {
    for (int i = 0; i < 300; ++i) {
      const Vec2 p(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
      const Vec2 q(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
      if (std::abs(sdf_eval(shape, p) - sdf_eval(shape, q)) >
          (p - q).norm() + 1e-9) {
        *why = "Lipschitz bound violated";
        return false;
      }
    }
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
      const Vec2 p(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
      SdfGradient g = sdf_gradient(shape, p);
      if (g.degenerate) continue;
      if (std::abs(g.grad.norm() - 1.0) > 1e-9) {
        *why = "gradient not unit length";
        return false;
      }
      auto fd_at = [&](double h) {
        return Vec2((sdf_eval(shape, p + Vec2(h, 0)) -
                     sdf_eval(shape, p - Vec2(h, 0))) / (2 * h),
                    (sdf_eval(shape, p + Vec2(0, h)) -
                     sdf_eval(shape, p - Vec2(0, h))) / (2 * h));
      };
      const Vec2 fd6 = fd_at(1e-6);
      const Vec2 fd5 = fd_at(1e-5);
      if ((fd6 - fd5).lpNorm<Eigen::Infinity>() > 1e-3) continue;  // near a kink
      if ((fd6 - g.grad).lpNorm<Eigen::Infinity>() > 5e-5) {
        *why = "finite-difference gradient mismatch";
        return false;
      }
      ++checked;
    }
    if (checked < 120) {
      *why = "too few clean gradient samples";
      return false;
    }
  }
  return true;
}

bool cvar_brute_force(std::string* why) {
  Rng rng(8802);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + rng.uniform_int(0, 7);
    std::vector<double> values;
    for (int i = 0; i < n; ++i) values.push_back(rng.uniform(-3.0, 3.0));
    const double eps =
        (trial % 10 == 0) ? 1.0 : rng.uniform(0.05, 1.0);
    const double got = cvar_empirical(values, eps);
    auto eval_at = [&](double s) {
      double acc = 0.0;
      for (double v : values) acc += std::max(0.0, v + s);
      return acc / (n * eps) - s;
    };
    // The infimum is attained at s = -v_i for some i.
    double cand = std::numeric_limits<double>::infinity();
    for (double v : values) cand = std::min(cand, eval_at(-v));
    if (std::abs(got - cand) > 1e-9) {
      *why = fmt("candidate minimum %.9f vs cvar %.9f", cand, got);
      return false;
    }
    const double lo = -(*std::max_element(values.begin(), values.end())) - 1.0;
    const double hi = -(*std::min_element(values.begin(), values.end())) + 1.0;
    for (int k = 0; k <= 2000; ++k) {
      if (eval_at(lo + (hi - lo) * k / 2000.0) < got - 1e-9) {
        *why = "dense scan found a lower objective";
        return false;
      }
    }
  }
  return true;
}

bool ambiguity_monotonicity(std::string* why) {
  Rng rng(8803);
  const double eps_grid[] = {0.05, 0.1, 0.2, 0.4, 0.8, 1.0};
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + rng.uniform_int(0, 6);
    std::vector<double> values;
    for (int i = 0; i < n; ++i) values.push_back(rng.uniform(-2.0, 2.0));
    for (std::size_t i = 0; i + 1 < std::size(eps_grid); ++i) {
      if (cvar_empirical(values, eps_grid[i]) <
          cvar_empirical(values, eps_grid[i + 1]) - 1e-12) {
        *why = "CVaR not monotone in the tail level";
        return false;
      }
    }
  }
  double prev = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= 30; ++n) {
    const double r = wasserstein_radius(n, 0.1, 1.0, 1.0, 5, 2.0);
    if (r >= prev) {
      *why = "radius not decreasing in the sample count";
      return false;
    }
    prev = r;
  }
  double prev_eps = 0.0;
  for (double eb : {0.2, 0.1, 0.05, 0.01}) {
    const double r = wasserstein_radius(5, eb, 1.0, 1.0, 5, 2.0);
    if (r <= prev_eps) {
      *why = "radius not increasing as the confidence tightens";
      return false;
    }
    prev_eps = r;
  }
  if (std::abs(wasserstein_radius(5, 0.1, 1.0, 1.0, 5, 2.0) -
               std::pow(std::log(10.0) / 5.0, 0.2)) > 1e-12) {
    *why = "closed-form radius value mismatch";
    return false;
  }
  return true;
}

bool cbc_identity(std::string* why) {
  Rng rng(8804);
  for (int trial = 0; trial < 50; ++trial) {
    const Shape body{Circle{{0.0, 0.0}, rng.uniform(0.1, 0.5)}};
    Pose2 pose{{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)},
               rng.uniform(-M_PI, M_PI)};
    ObstaclePoint pt;
    do {
      pt.position = Vec2(rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0));
    } while (robot_sdf(body, pose, pt.position) < 0.05);
    const bool moving = trial % 2 == 0;
    if (moving)
      pt.velocity = Vec2(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const double gain = rng.uniform(0.5, 3.0);
    UncertaintySample s = build_sample(body, pose, pt, gain);

    const Control u{rng.uniform(-1.2, 1.2), rng.uniform(-1.0, 1.0)};
    const double expect = s.lie_coeffs(0) + s.lie_coeffs(1) * u.v +
                          s.lie_coeffs(2) * u.omega + s.alpha_h_of_h + s.dh_dt;
    if (std::abs(cbc_eval(s, u) - expect) > 1e-12) {
      *why = "affine evaluation mismatch";
      return false;
    }
    if (std::abs(s.alpha_h_of_h - gain * robot_sdf(body, pose, pt.position)) >
        1e-9) {
      *why = "class-K term is not gain * h";
      return false;
    }
    if (std::abs(s.lie_coeffs(0)) > 1e-12) {
      *why = "drift term nonzero for the driftless unicycle";
      return false;
    }
    if (!moving && std::abs(s.dh_dt) > 1e-12) {
      *why = "static point produced a nonzero time derivative";
      return false;
    }
    if (moving) {
      const double tau = 1e-6;
      ObstaclePoint fwd = pt, bwd = pt;
      fwd.position += tau * pt.velocity;
      bwd.position -= tau * pt.velocity;
      const double fd = (robot_sdf(body, pose, fwd.position) -
                         robot_sdf(body, pose, bwd.position)) /
                        (2 * tau);
      if (std::abs(fd - s.dh_dt) > 1e-5) {
        *why = "time derivative disagrees with finite differences";
        return false;
      }
    }
    // Input coefficients against finite differences through the motion.
    const double tau = 1e-6;
    auto h_after = [&](const Control& uu, double dt) {
      return robot_sdf(body, step_unicycle(pose, uu, dt), pt.position);
    };
    const double fd_v =
        (h_after(Control{1.0, 0.0}, tau) - h_after(Control{-1.0, 0.0}, tau)) /
        (2 * tau);
    const double fd_w =
        (h_after(Control{0.0, 1.0}, tau) - h_after(Control{0.0, -1.0}, tau)) /
        (2 * tau);
    if (std::abs(fd_v - s.lie_coeffs(1)) > 1e-4 ||
        std::abs(fd_w - s.lie_coeffs(2)) > 1e-4) {
      *why = "input coefficients disagree with finite differences";
      return false;
    }
  }
  return true;
}

// Independent shortest-path reference: inflate occupied cells, then run a
// plain O(V^2) Dijkstra with the same corner-cutting rule.
std::optional<double> dijkstra(const OccupancyGrid& grid,
                               const PlannerConfig& cfg,
                               const Eigen::Vector2i& start,
                               const Eigen::Vector2i& goal) {
  const int nx = grid.nx(), ny = grid.ny();
  const int r = static_cast<int>(
      std::ceil(cfg.inflation_radius / cfg.resolution - 1e-9));
  std::vector<char> blocked(static_cast<std::size_t>(nx) * ny, 0);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const CellState s = grid.at(x, y);
      if (s == CellState::kOccupied) {
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            if (dx * dx + dy * dy > r * r) continue;
            const int bx = x + dx, by = y + dy;
            if (grid.in_bounds(bx, by))
              blocked[static_cast<std::size_t>(by) * nx + bx] = 1;
          }
      } else if (s == CellState::kUnknown && !cfg.allow_unknown) {
        blocked[static_cast<std::size_t>(y) * nx + x] = 1;
      }
    }
  blocked[static_cast<std::size_t>(start.y()) * nx + start.x()] = 0;
  if (blocked[static_cast<std::size_t>(goal.y()) * nx + goal.x()])
    return std::nullopt;

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(nx) * ny, inf);
  std::vector<char> done(static_cast<std::size_t>(nx) * ny, 0);
  dist[static_cast<std::size_t>(start.y()) * nx + start.x()] = 0.0;
  for (;;) {
    int best = -1;
    double best_d = inf;
    for (int i = 0; i < nx * ny; ++i)
      if (!done[i] && dist[i] < best_d) {
        best = i;
        best_d = dist[i];
      }
    if (best < 0) break;
    done[best] = 1;
    const int cx = best % nx, cy = best / nx;
    if (cx == goal.x() && cy == goal.y()) return best_d * cfg.resolution;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int mx = cx + dx, my = cy + dy;
        if (!grid.in_bounds(mx, my)) continue;
        if (blocked[static_cast<std::size_t>(my) * nx + mx]) continue;
        if (dx != 0 && dy != 0 &&
            (blocked[static_cast<std::size_t>(cy) * nx + (cx + dx)] ||
             blocked[static_cast<std::size_t>(my) * nx + cx]))
          continue;  // no cutting corners
        const double step = (dx != 0 && dy != 0) ? std::sqrt(2.0) : 1.0;
        const std::size_t mi = static_cast<std::size_t>(my) * nx + mx;
        dist[mi] = std::min(dist[mi], best_d + step);
      }
  }
  return std::nullopt;
}

bool astar_vs_dijkstra(std::string* why) {
  PlannerConfig cfg;
  cfg.resolution = 0.25;
  cfg.inflation_radius = 0.3;
  int compared = 0;
  for (int trial = 0; trial < 15; ++trial) {
    Rng rng(8810 + static_cast<std::uint64_t>(trial));
    OccupancyGrid grid(Vec2(0.0, 0.0), cfg.resolution, 20, 20);
    cfg.allow_unknown = trial % 2 == 0;
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 20; ++x) {
        const double roll = rng.uniform();
        grid.set(x, y, roll < 0.08 ? CellState::kOccupied
                       : roll < 0.13 ? CellState::kUnknown
                                     : CellState::kFree);
      }
    const Eigen::Vector2i start(rng.uniform_int(0, 19), rng.uniform_int(0, 19));
    Eigen::Vector2i goal(rng.uniform_int(0, 19), rng.uniform_int(0, 19));
    if (goal.x() == start.x() && goal.y() == start.y())
      goal.x() = (goal.x() + 7) % 20;
    double cost = 0.0;
    auto path = a_star(grid, cfg, grid.center_of(start.x(), start.y()),
                       grid.center_of(goal.x(), goal.y()), &cost);
    auto ref = dijkstra(grid, cfg, start, goal);
    if (path.has_value() != ref.has_value()) {
      *why = fmt("trial %d: existence disagrees", trial);
      return false;
    }
    if (path) {
      if (std::abs(cost - *ref) > 1e-9) {
        *why = fmt("trial %d: cost %.9f vs reference %.9f", trial, cost, *ref);
        return false;
      }
      ++compared;
    }
  }
  if (compared < 5) {
    *why = "too few solvable instances";
    return false;
  }
  return true;
}

bool rk4_order(std::string* why) {
  // Constant-twist unicycle motion admits a closed-form arc solution.
  const double v = 1.0, w = 0.7, T = 1.0;
  auto error_at = [&](double dt) {
    Pose2 pose{{0.0, 0.0}, 0.0};
    const int steps = static_cast<int>(std::lround(T / dt));
    for (int i = 0; i < steps; ++i)
      pose = step_unicycle(pose, Control{v, w}, dt);
    const Vec2 exact(v / w * std::sin(w * T), v / w * (1.0 - std::cos(w * T)));
    return (pose.position - exact).norm();
  };
  const double e1 = error_at(0.02);
  const double e2 = error_at(0.01);
  const double ratio = e1 / e2;
  if (!(ratio > 10.0 && ratio < 24.0)) {
    *why = fmt("halving ratio %.2f outside [10, 24]", ratio);
    return false;
  }
  return true;
}

bool seed_determinism(std::string* why) {
  ExperimentConfig cfg = load_config(config_path("empty_room.json"));
  TrialRecord a = run_trial(cfg, 5);
  TrialRecord b = run_trial(cfg, 5);
  const bool same =
      a.outcome == b.outcome && a.completion_time == b.completion_time &&
      a.tracking_error_mean == b.tracking_error_mean &&
      a.tracking_error_std == b.tracking_error_std &&
      a.min_clearance == b.min_clearance &&
      a.infeasible_ticks == b.infeasible_ticks && a.goal.x() == b.goal.x() &&
      a.goal.y() == b.goal.y() && a.solve_times.size() == b.solve_times.size();
  if (!same) {
    *why = "two runs at the same seed differ";
    return false;
  }
  return true;
}

}  // namespace props

void criterion8() {
  struct Check {
    const char* name;
    bool (*fn)(std::string*);
  };
  const Check checks[] = {
      {"signed-distance properties", props::sdf_properties},
      {"CVaR brute force", props::cvar_brute_force},
      {"ambiguity monotonicity", props::ambiguity_monotonicity},
      {"barrier-condition identity", props::cbc_identity},
      {"A* vs Dijkstra", props::astar_vs_dijkstra},
      {"RK4 order", props::rk4_order},
      {"seed determinism", props::seed_determinism},
  };
  int passed = 0;
  std::string failing;
  for (const Check& c : checks) {
    std::string why;
    if (c.fn(&why)) {
      ++passed;
    } else if (failing.empty()) {
      failing = fmt("%s (%s)", c.name, why.c_str());
    }
  }
  const int total = static_cast<int>(std::size(checks));
  const bool pass = passed == total;
  report(8, "property suite", pass,
         pass ? fmt("%d/%d invariant groups hold", passed, total)
              : fmt("%d/%d invariant groups hold; first failure: %s", passed,
                    total, failing.c_str()));
}

}  // namespace

int main() {
  std::printf("acceptance campaign: 8 criteria\n");
  std::fflush(stdout);
  Timer total;
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  note(fmt("campaign finished in %.1f s, %d failure(s)", total.seconds(),
           g_failures));
  return g_failures == 0 ? 0 : 1;
}
