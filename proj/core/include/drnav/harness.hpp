#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drnav/controller.hpp"
#include "drnav/geometry.hpp"
#include "drnav/planner.hpp"
#include "drnav/random.hpp"
#include "drnav/stabilizer.hpp"
#include "drnav/world.hpp"

namespace drnav {

// Loop rates in Hz. The lidar and planner rates must divide the control rate
// so refreshes land on exact control ticks.
struct RateConfig {
  int control_hz = 50;
  int lidar_hz = 10;
  int planner_hz = 5;
};

struct GoalSampling {
  bool fixed = false;
  Vec2 fixed_point{0.0, 0.0};
  double min_distance = 10.0;   // random mode: lower bound on |goal - start|
  double min_clearance = 0.8;   // random mode: clearance to static obstacles
};

struct GovernorConfig {
  double gain = 1.0;
  double zeta = 2.0;
};

struct ScenarioConfig {
  std::string name = "scenario";
  Aabb bounds{{-10.0, -10.0}, {10.0, 10.0}};
  std::vector<Shape> static_obstacles;
  std::vector<MovingObstacle> moving_obstacles;
  std::vector<Pedestrian> pedestrians;
  Pose2 start_pose{{0.0, 0.0}, 0.0};
};

enum class ControllerKind { kDrCbf, kNominal };

struct ExperimentConfig {
  ScenarioConfig scenario;
  Shape robot_shape = Shape{Circle{{0.0, 0.0}, 0.267}};
  ControllerKind controller = ControllerKind::kDrCbf;
  ControllerConfig controller_config;
  LidarConfig lidar;
  LocalizationModel localization;
  PlannerConfig planner;
  GovernorConfig governor;
  GoalSampling goal_sampling;
  RateConfig rates;
  int trial_count = 100;
  std::uint64_t seed = 0;
  double timeout_s = 60.0;
  double goal_tolerance = 0.1;
};

// Throws std::invalid_argument describing the first inconsistency found.
void validate_config(const ExperimentConfig& config);

// Parses a JSON experiment description. Unknown keys are rejected so typos
// surface as errors instead of silently falling back to defaults. The result
// has been run through validate_config.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Fixed-point mode returns the configured point; random mode rejection-samples
// within bounds until the distance and static-clearance constraints hold.
// Throws std::runtime_error when no admissible goal exists.
Vec2 sample_goal(const ExperimentConfig& config, Rng& rng);

enum class TrialOutcome { kSuccess, kStuck, kCollision };

const char* outcome_name(TrialOutcome outcome);

struct TrajectorySample {
  double time = 0.0;
  Pose2 pose;        // ground truth
  Control control;
  double min_h = 0.0;  // smallest robot-to-point distance over the scan buffer
};

struct TrialRecord {
  int trial_id = 0;
  TrialOutcome outcome = TrialOutcome::kStuck;
  double tracking_error_mean = 0.0;
  double tracking_error_std = 0.0;
  double completion_time = 0.0;  // seconds until termination
  std::vector<double> solve_times;
  int infeasible_ticks = 0;
  double min_clearance = 0.0;  // ground-truth minimum over the trial
  Vec2 goal{0.0, 0.0};
  std::vector<TrajectorySample> trajectory;  // filled only when requested
};

struct MetricsTable {
  std::vector<TrialRecord> trials;
  double success_rate_pct = 0.0;
  double stuck_rate_pct = 0.0;
  double collision_rate_pct = 0.0;
  double tracking_error_mean = 0.0;  // across trials, of per-trial means
  double tracking_error_std = 0.0;
  double completion_time_mean = 0.0;  // successful trials only
  double completion_time_std = 0.0;
  double solve_time_mean = 0.0;  // across every controller invocation
  double solve_time_std = 0.0;
  long long infeasible_ticks_total = 0;
};

TrialRecord run_trial(const ExperimentConfig& config, std::uint64_t trial_seed,
                      bool record_trajectory = false);

MetricsTable run_experiment(const ExperimentConfig& config,
                            bool record_trajectories = false);

MetricsTable aggregate(std::vector<TrialRecord> trials);

// CSV: header row then one row per trial with columns trial_id, outcome,
// tracking_error_mean, tracking_error_std, completion_time_s,
// mean_solve_time_s, infeasible_ticks.
std::string metrics_csv(const MetricsTable& results);
// JSON: aggregates plus the full per-trial records (without trajectories).
std::string metrics_json(const MetricsTable& results);
// Per-tick time, pose, control, min-h rows for one trial.
std::string trajectory_csv(const TrialRecord& record);

void write_file(const std::string& path, const std::string& contents);

}  // namespace drnav
