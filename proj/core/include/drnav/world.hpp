#pragma once

#include <vector>

#include "drnav/drcbf.hpp"
#include "drnav/geometry.hpp"
#include "drnav/random.hpp"

namespace drnav {

struct Aabb {
  Vec2 min{0.0, 0.0};
  Vec2 max{0.0, 0.0};

  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() &&
           p.y() <= max.y();
  }
};

enum class PatrolMode { kPingPong, kLoop };

// Rigid obstacle translating along a waypoint polyline at constant speed
// (ping-pong or loop) while spinning at a constant angular rate. Boundary
// point speeds stay below speed + |angular_rate| * circumradius.
struct MovingObstacle {
  Shape shape;
  std::vector<Vec2> waypoints;
  double speed = 0.0;
  double angular_rate = 0.0;
  PatrolMode mode = PatrolMode::kPingPong;

  Pose2 pose_at(double t) const;
  Vec2 translation_velocity_at(double t) const;
  // Ground-truth velocity of the obstacle material point currently at
  // world_point.
  Vec2 point_velocity_at(double t, const Vec2& world_point) const;
};

// Goal-seeking disc agent: goal attraction plus inverse-square repulsion
// from the robot and from obstacles, speed clamped to max_speed.
struct Pedestrian {
  Vec2 position{0.0, 0.0};
  Vec2 velocity{0.0, 0.0};
  Vec2 goal{0.0, 0.0};
  double radius = 0.3;
  double max_speed = 1.0;
};

struct WorldState {
  Aabb bounds;
  std::vector<Shape> static_obstacles;  // world frame
  std::vector<MovingObstacle> moving_obstacles;
  std::vector<Pedestrian> pedestrians;
  Pose2 true_pose;
  double time = 0.0;
};

struct LidarConfig {
  int ray_count = 100;
  double eta_min = 0.1;
  double eta_max = 10.0;
  double noise_sigma = 0.0;
};

// Rays fan out from the true pose, evenly spaced over 360 degrees starting
// at the heading. Hit ranges get independent Gaussian noise and re-clamping
// into [eta_min, eta_max]; rays that geometrically miss read eta_max exactly
// and contribute no point. Each hit point carries the ground-truth velocity
// of the struck obstacle point.
struct LidarScan {
  std::vector<double> ranges;
  std::vector<bool> hit;
  std::vector<ObstaclePoint> points;  // world frame, one per hit ray
  std::vector<int> point_ray;         // ray index of each point
  double time = 0.0;
};

LidarScan lidar_scan(const WorldState& world, const LidarConfig& config, Rng& rng);

struct LocalizationModel {
  double sigma_xy = 0.0;
  double sigma_theta = 0.0;
  int sample_count = 3;
};

struct LocalizationResult {
  Pose2 estimate;
  std::vector<Pose2> samples;  // drawn around the estimate
};

LocalizationResult localize(const Pose2& true_pose, const LocalizationModel& model,
                            Rng& rng);

// Advances time (moving obstacles are functions of world.time) and the
// pedestrians by one Euler step; pedestrians re-sample their goal on arrival.
void step_world(WorldState& world, double dt, Rng& rng);

// Ground-truth minimum separation between the robot boundary (64 sampled
// points) and every obstacle.
double true_clearance(const WorldState& world, const Shape& robot,
                      const Pose2& true_pose);

bool collision_check(const WorldState& world, const Shape& robot,
                     const Pose2& true_pose);

}  // namespace drnav
