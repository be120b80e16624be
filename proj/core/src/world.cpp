#include "drnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drnav {

namespace {

constexpr int kBoundarySamples = 64;
constexpr double kPedGoalRadius = 0.4;
constexpr double kPedAttraction = 1.5;
constexpr double kPedRobotRepulsion = 0.5;
constexpr double kPedObstacleRepulsion = 0.15;

struct PolylinePoint {
  Vec2 position;
  Vec2 velocity;
};

PolylinePoint polyline_at(const std::vector<Vec2>& pts, double speed,
                          PatrolMode mode, double t) {
  if (pts.size() < 2 || speed <= 0.0) {
    return {pts.empty() ? Vec2(0, 0) : pts.front(), Vec2(0, 0)};
  }
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
  }
  const double open_len = cum.back();
  if (open_len <= 0.0) return {pts.front(), Vec2(0, 0)};

  double arc = speed * t;
  double dir_sign = 1.0;
  if (mode == PatrolMode::kLoop) {
    const double close_len = open_len + (pts.front() - pts.back()).norm();
    arc = std::fmod(arc, close_len);
    if (arc > open_len) {
      // Closing segment back to the first waypoint.
      const Vec2 e = pts.front() - pts.back();
      const double seg = e.norm();
      const double s = seg > 0.0 ? (arc - open_len) / seg : 0.0;
      return {pts.back() + s * e, speed * (seg > 0.0 ? (e / seg).eval() : Vec2(0, 0))};
    }
  } else {
    const double period = 2.0 * open_len;
    arc = std::fmod(arc, period);
    if (arc > open_len) {
      arc = period - arc;
      dir_sign = -1.0;
    }
  }
  auto it = std::lower_bound(cum.begin(), cum.end(), arc);
  std::size_t hi = it == cum.begin() ? 1 : static_cast<std::size_t>(it - cum.begin());
  hi = std::min(hi, pts.size() - 1);
  const std::size_t lo = hi - 1;
  const double seg = cum[hi] - cum[lo];
  const double s = seg > 0.0 ? (arc - cum[lo]) / seg : 0.0;
  const Vec2 dir = seg > 0.0 ? ((pts[hi] - pts[lo]) / seg).eval() : Vec2(0, 0);
  return {pts[lo] + s * (pts[hi] - pts[lo]), dir_sign * speed * dir};
}

// Signed distance from a world point to an obstacle shape at a pose.
double obstacle_sdf(const Shape& shape, const Pose2& pose, const Vec2& p) {
  return sdf_eval(shape, pose.to_body(p));
}

struct RayResult {
  double t = std::numeric_limits<double>::infinity();
  Vec2 velocity{0.0, 0.0};
};

void consider(const std::optional<RayHit>& hit, const Vec2& velocity,
              RayResult* best) {
  if (!hit) return;
  if (hit->distance < best->t) {
    best->t = hit->distance;
    best->velocity = velocity;
  }
}

}  // namespace

Pose2 MovingObstacle::pose_at(double t) const {
  const PolylinePoint p = polyline_at(waypoints, speed, mode, t);
  return Pose2{p.position, wrap_angle(angular_rate * t)};
}

Vec2 MovingObstacle::translation_velocity_at(double t) const {
  return polyline_at(waypoints, speed, mode, t).velocity;
}

Vec2 MovingObstacle::point_velocity_at(double t, const Vec2& world_point) const {
  const Pose2 pose = pose_at(t);
  const Vec2 rel = world_point - pose.position;
  return translation_velocity_at(t) + angular_rate * Vec2(-rel.y(), rel.x());
}

LidarScan lidar_scan(const WorldState& world, const LidarConfig& cfg, Rng& rng) {
  LidarScan scan;
  scan.time = world.time;
  scan.ranges.resize(static_cast<std::size_t>(cfg.ray_count));
  scan.hit.resize(static_cast<std::size_t>(cfg.ray_count));
  const Vec2 origin = world.true_pose.position;

  std::vector<Pose2> moving_poses;
  moving_poses.reserve(world.moving_obstacles.size());
  for (const MovingObstacle& mo : world.moving_obstacles) {
    moving_poses.push_back(mo.pose_at(world.time));
  }

  for (int k = 0; k < cfg.ray_count; ++k) {
    const double angle =
        world.true_pose.heading + 2.0 * M_PI * k / cfg.ray_count;
    const Vec2 dir(std::cos(angle), std::sin(angle));

    RayResult best;
    for (const Shape& s : world.static_obstacles) {
      consider(ray_hit(s, origin, dir, cfg.eta_max), Vec2(0, 0), &best);
    }
    for (std::size_t i = 0; i < world.moving_obstacles.size(); ++i) {
      const MovingObstacle& mo = world.moving_obstacles[i];
      const Pose2& pose = moving_poses[i];
      const Vec2 local_o = pose.to_body(origin);
      const Vec2 local_d = pose.rotation().transpose() * dir;
      const auto hit = ray_hit(mo.shape, local_o, local_d, cfg.eta_max);
      if (hit) {
        const Vec2 world_hit = origin + hit->distance * dir;
        consider(hit, mo.point_velocity_at(world.time, world_hit), &best);
      }
    }
    for (const Pedestrian& ped : world.pedestrians) {
      const Shape disc{Circle{ped.position, ped.radius}};
      consider(ray_hit(disc, origin, dir, cfg.eta_max), ped.velocity, &best);
    }

    const std::size_t idx = static_cast<std::size_t>(k);
    if (!std::isfinite(best.t)) {
      scan.ranges[idx] = cfg.eta_max;
      scan.hit[idx] = false;
      continue;
    }
    double range = std::clamp(best.t, cfg.eta_min, cfg.eta_max);
    if (cfg.noise_sigma > 0.0) {
      range = std::clamp(range + rng.normal(0.0, cfg.noise_sigma), cfg.eta_min,
                         cfg.eta_max);
    }
    scan.ranges[idx] = range;
    scan.hit[idx] = true;
    scan.points.push_back(ObstaclePoint{origin + range * dir, best.velocity});
    scan.point_ray.push_back(k);
  }
  return scan;
}

LocalizationResult localize(const Pose2& true_pose, const LocalizationModel& model,
                            Rng& rng) {
  LocalizationResult out;
  out.estimate.position.x() = true_pose.position.x() + rng.normal(0.0, model.sigma_xy);
  out.estimate.position.y() = true_pose.position.y() + rng.normal(0.0, model.sigma_xy);
  out.estimate.heading = wrap_angle(true_pose.heading + rng.normal(0.0, model.sigma_theta));
  out.samples.reserve(static_cast<std::size_t>(model.sample_count));
  for (int i = 0; i < model.sample_count; ++i) {
    Pose2 s;
    s.position.x() = out.estimate.position.x() + rng.normal(0.0, model.sigma_xy);
    s.position.y() = out.estimate.position.y() + rng.normal(0.0, model.sigma_xy);
    s.heading = wrap_angle(out.estimate.heading + rng.normal(0.0, model.sigma_theta));
    out.samples.push_back(s);
  }
  return out;
}

namespace {

Vec2 sample_pedestrian_goal(const WorldState& world, const Pedestrian& ped,
                            Rng& rng) {
  const Vec2 lo = world.bounds.min + Vec2(0.5, 0.5);
  const Vec2 hi = world.bounds.max - Vec2(0.5, 0.5);
  for (int attempt = 0; attempt < 20; ++attempt) {
    const Vec2 cand(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()));
    double clearance = std::numeric_limits<double>::infinity();
    for (const Shape& s : world.static_obstacles) {
      clearance = std::min(clearance, sdf_eval(s, cand));
    }
    if (clearance > ped.radius + 0.2) return cand;
  }
  return ped.goal;
}

}  // namespace

void step_world(WorldState& world, double dt, Rng& rng) {
  world.time += dt;
  for (Pedestrian& ped : world.pedestrians) {
    const Vec2 to_goal = ped.goal - ped.position;
    const double dist = to_goal.norm();
    if (dist < kPedGoalRadius) {
      ped.goal = sample_pedestrian_goal(world, ped, rng);
    }
    Vec2 accel(0.0, 0.0);
    if (dist > 1e-9) accel += kPedAttraction * to_goal / dist;

    const Vec2 from_robot = ped.position - world.true_pose.position;
    const double robot_dist = std::max(from_robot.norm(), 0.15);
    accel += kPedRobotRepulsion * from_robot / (robot_dist * robot_dist * robot_dist);

    for (const Shape& s : world.static_obstacles) {
      const double d = std::max(sdf_eval(s, ped.position) - ped.radius, 0.05);
      if (d < 0.8) {
        accel += kPedObstacleRepulsion * sdf_gradient(s, ped.position).grad / (d * d);
      }
    }

    ped.velocity += dt * accel;
    const double speed = ped.velocity.norm();
    if (speed > ped.max_speed) ped.velocity *= ped.max_speed / speed;
    ped.position += dt * ped.velocity;
    ped.position.x() = std::clamp(ped.position.x(), world.bounds.min.x(), world.bounds.max.x());
    ped.position.y() = std::clamp(ped.position.y(), world.bounds.min.y(), world.bounds.max.y());
  }
}

double true_clearance(const WorldState& world, const Shape& robot,
                      const Pose2& true_pose) {
  const std::vector<Vec2> body = boundary_points(robot, kBoundarySamples);
  std::vector<Vec2> pts;
  pts.reserve(body.size());
  for (const Vec2& p : body) pts.push_back(true_pose.to_world(p));

  const double robot_r = circumradius(robot);
  double best = std::numeric_limits<double>::infinity();

  const auto scan_obstacle = [&](auto&& sdf_at, const Vec2& center, double radius) {
    // Boundary samples cannot beat sdf(center) - circumradius; skip obstacles
    // that provably cannot improve the current minimum.
    const double lower = (true_pose.position - center).norm() - radius - robot_r;
    if (lower >= best) return;
    for (const Vec2& p : pts) {
      const double d = sdf_at(p);
      if (d < best) best = d;
    }
  };

  for (const Shape& s : world.static_obstacles) {
    const BoundingCircle bc = bounding_circle(s);
    scan_obstacle([&](const Vec2& p) { return sdf_eval(s, p); }, bc.center,
                  bc.radius);
  }
  for (const MovingObstacle& mo : world.moving_obstacles) {
    const Pose2 pose = mo.pose_at(world.time);
    scan_obstacle([&](const Vec2& p) { return obstacle_sdf(mo.shape, pose, p); },
                  pose.position, circumradius(mo.shape));
  }
  for (const Pedestrian& ped : world.pedestrians) {
    scan_obstacle([&](const Vec2& p) { return (p - ped.position).norm() - ped.radius; },
                  ped.position, ped.radius);
  }
  return best;
}

bool collision_check(const WorldState& world, const Shape& robot,
                     const Pose2& true_pose) {
  return true_clearance(world, robot, true_pose) <= 0.0;
}

}  // namespace drnav
