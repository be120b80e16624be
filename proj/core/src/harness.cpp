#include "drnav/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "drnav/dynamics.hpp"
#include "drnav/random.hpp"
#include "json.hpp"

namespace drnav {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
  throw std::invalid_argument(message);
}

void check_keys(const json& obj, const std::string& context,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail(context + ": unknown key '" + item.key() + "'");
  }
}

const json& require(const json& obj, const std::string& context, const char* key) {
  if (!obj.contains(key)) fail(context + ": missing key '" + key + "'");
  return obj.at(key);
}

double as_number(const json& v, const std::string& context) {
  if (!v.is_number()) fail(context + ": expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& context) {
  if (!v.is_number_integer()) fail(context + ": expected an integer");
  return v.get<int>();
}

Vec2 parse_vec2(const json& v, const std::string& context) {
  if (!v.is_array() || v.size() != 2) fail(context + ": expected [x, y]");
  return {as_number(v[0], context), as_number(v[1], context)};
}

Pose2 parse_pose(const json& v, const std::string& context) {
  if (!v.is_object()) fail(context + ": expected an object");
  check_keys(v, context, {"position", "heading"});
  Pose2 pose;
  pose.position = parse_vec2(require(v, context, "position"), context + ".position");
  pose.heading = as_number(require(v, context, "heading"), context + ".heading");
  return pose;
}

Shape parse_shape(const json& v, const std::string& context) {
  if (!v.is_object()) fail(context + ": expected a shape object");
  const std::string type = require(v, context, "type").get<std::string>();
  if (type == "circle") {
    check_keys(v, context, {"type", "center", "radius"});
    Circle c;
    c.center = parse_vec2(require(v, context, "center"), context + ".center");
    c.radius = as_number(require(v, context, "radius"), context + ".radius");
    return Shape{c};
  }
  if (type == "polygon") {
    check_keys(v, context, {"type", "vertices"});
    const json& verts = require(v, context, "vertices");
    if (!verts.is_array()) fail(context + ".vertices: expected an array");
    ConvexPolygon poly;
    for (std::size_t i = 0; i < verts.size(); ++i) {
      poly.vertices.push_back(
          parse_vec2(verts[i], context + ".vertices[" + std::to_string(i) + "]"));
    }
    return Shape{poly};
  }
  if (type == "union") {
    check_keys(v, context, {"type", "members"});
    const json& members = require(v, context, "members");
    if (!members.is_array()) fail(context + ".members: expected an array");
    ShapeUnion u;
    for (std::size_t i = 0; i < members.size(); ++i) {
      u.members.push_back(
          parse_shape(members[i], context + ".members[" + std::to_string(i) + "]"));
    }
    return Shape{u};
  }
  fail(context + ": unknown shape type '" + type + "'");
}

MovingObstacle parse_moving(const json& v, const std::string& context) {
  if (!v.is_object()) fail(context + ": expected an object");
  check_keys(v, context, {"shape", "waypoints", "speed", "angular_rate", "mode"});
  MovingObstacle m;
  m.shape = parse_shape(require(v, context, "shape"), context + ".shape");
  const json& wps = require(v, context, "waypoints");
  if (!wps.is_array()) fail(context + ".waypoints: expected an array");
  for (std::size_t i = 0; i < wps.size(); ++i) {
    m.waypoints.push_back(
        parse_vec2(wps[i], context + ".waypoints[" + std::to_string(i) + "]"));
  }
  if (v.contains("speed")) m.speed = as_number(v["speed"], context + ".speed");
  if (v.contains("angular_rate")) {
    m.angular_rate = as_number(v["angular_rate"], context + ".angular_rate");
  }
  if (v.contains("mode")) {
    const std::string mode = v["mode"].get<std::string>();
    if (mode == "ping-pong") {
      m.mode = PatrolMode::kPingPong;
    } else if (mode == "loop") {
      m.mode = PatrolMode::kLoop;
    } else {
      fail(context + ".mode: expected 'ping-pong' or 'loop'");
    }
  }
  return m;
}

Pedestrian parse_pedestrian(const json& v, const std::string& context) {
  if (!v.is_object()) fail(context + ": expected an object");
  check_keys(v, context, {"position", "velocity", "goal", "radius", "max_speed"});
  Pedestrian p;
  p.position = parse_vec2(require(v, context, "position"), context + ".position");
  if (v.contains("velocity")) {
    p.velocity = parse_vec2(v["velocity"], context + ".velocity");
  }
  p.goal = v.contains("goal")
               ? parse_vec2(v["goal"], context + ".goal")
               : p.position;
  if (v.contains("radius")) p.radius = as_number(v["radius"], context + ".radius");
  if (v.contains("max_speed")) {
    p.max_speed = as_number(v["max_speed"], context + ".max_speed");
  }
  return p;
}

ScenarioConfig parse_scenario(const json& v) {
  const std::string ctx = "scenario";
  if (!v.is_object()) fail(ctx + ": expected an object");
  check_keys(v, ctx,
             {"name", "bounds", "static_obstacles", "moving_obstacles",
              "pedestrians", "start_pose"});
  ScenarioConfig s;
  if (v.contains("name")) s.name = v["name"].get<std::string>();
  if (v.contains("bounds")) {
    const json& b = v["bounds"];
    check_keys(b, ctx + ".bounds", {"min", "max"});
    s.bounds.min = parse_vec2(require(b, ctx + ".bounds", "min"), ctx + ".bounds.min");
    s.bounds.max = parse_vec2(require(b, ctx + ".bounds", "max"), ctx + ".bounds.max");
  }
  if (v.contains("static_obstacles")) {
    const json& arr = v["static_obstacles"];
    if (!arr.is_array()) fail(ctx + ".static_obstacles: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      s.static_obstacles.push_back(parse_shape(
          arr[i], ctx + ".static_obstacles[" + std::to_string(i) + "]"));
    }
  }
  if (v.contains("moving_obstacles")) {
    const json& arr = v["moving_obstacles"];
    if (!arr.is_array()) fail(ctx + ".moving_obstacles: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      s.moving_obstacles.push_back(parse_moving(
          arr[i], ctx + ".moving_obstacles[" + std::to_string(i) + "]"));
    }
  }
  if (v.contains("pedestrians")) {
    const json& arr = v["pedestrians"];
    if (!arr.is_array()) fail(ctx + ".pedestrians: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      s.pedestrians.push_back(parse_pedestrian(
          arr[i], ctx + ".pedestrians[" + std::to_string(i) + "]"));
    }
  }
  if (v.contains("start_pose")) {
    s.start_pose = parse_pose(v["start_pose"], ctx + ".start_pose");
  }
  return s;
}

ControllerConfig parse_controller_config(const json& v) {
  const std::string ctx = "controller_config";
  if (!v.is_object()) fail(ctx + ": expected an object");
  check_keys(v, ctx,
             {"clf", "ambiguity", "lambda", "alpha_h_gain", "nominal_control",
              "v_min", "v_max", "omega_min", "omega_max", "goal_tolerance",
              "qp_tol", "qp_max_iter"});
  ControllerConfig c;
  if (v.contains("clf")) {
    const json& clf = v["clf"];
    check_keys(clf, ctx + ".clf", {"k_v", "k_omega", "alpha_v_gain"});
    if (clf.contains("k_v")) c.clf.k_v = as_number(clf["k_v"], ctx + ".clf.k_v");
    if (clf.contains("k_omega")) {
      c.clf.k_omega = as_number(clf["k_omega"], ctx + ".clf.k_omega");
    }
    if (clf.contains("alpha_v_gain")) {
      c.clf.alpha_v_gain = as_number(clf["alpha_v_gain"], ctx + ".clf.alpha_v_gain");
    }
  }
  if (v.contains("ambiguity")) {
    const json& a = v["ambiguity"];
    check_keys(a, ctx + ".ambiguity",
               {"radius_r", "epsilon", "sample_count", "c1", "c2", "rho"});
    if (a.contains("radius_r")) {
      c.ambiguity.radius_r = as_number(a["radius_r"], ctx + ".ambiguity.radius_r");
    }
    if (a.contains("epsilon")) {
      c.ambiguity.epsilon = as_number(a["epsilon"], ctx + ".ambiguity.epsilon");
    }
    if (a.contains("sample_count")) {
      c.ambiguity.sample_count =
          as_int(a["sample_count"], ctx + ".ambiguity.sample_count");
    }
    if (a.contains("c1")) c.ambiguity.c1 = as_number(a["c1"], ctx + ".ambiguity.c1");
    if (a.contains("c2")) c.ambiguity.c2 = as_number(a["c2"], ctx + ".ambiguity.c2");
    if (a.contains("rho")) {
      c.ambiguity.rho = as_number(a["rho"], ctx + ".ambiguity.rho");
    }
  }
  if (v.contains("lambda")) c.lambda = as_number(v["lambda"], ctx + ".lambda");
  if (v.contains("alpha_h_gain")) {
    c.alpha_h_gain = as_number(v["alpha_h_gain"], ctx + ".alpha_h_gain");
  }
  if (v.contains("nominal_control")) {
    const Vec2 n = parse_vec2(v["nominal_control"], ctx + ".nominal_control");
    c.nominal_control = Control{n.x(), n.y()};
  }
  if (v.contains("v_min")) c.v_min = as_number(v["v_min"], ctx + ".v_min");
  if (v.contains("v_max")) c.v_max = as_number(v["v_max"], ctx + ".v_max");
  if (v.contains("omega_min")) c.omega_min = as_number(v["omega_min"], ctx + ".omega_min");
  if (v.contains("omega_max")) c.omega_max = as_number(v["omega_max"], ctx + ".omega_max");
  if (v.contains("goal_tolerance")) {
    c.goal_tolerance = as_number(v["goal_tolerance"], ctx + ".goal_tolerance");
  }
  if (v.contains("qp_tol")) c.qp_tol = as_number(v["qp_tol"], ctx + ".qp_tol");
  if (v.contains("qp_max_iter")) c.qp_max_iter = as_int(v["qp_max_iter"], ctx + ".qp_max_iter");
  return c;
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
  const RateConfig& r = config.rates;
  if (r.control_hz < 1 || r.lidar_hz < 1 || r.planner_hz < 1) {
    fail("rates: all rates must be at least 1 Hz");
  }
  if (r.control_hz % r.lidar_hz != 0 || r.control_hz % r.planner_hz != 0) {
    fail("rates: lidar and planner rates must divide the control rate");
  }
  if (config.trial_count < 1) fail("trial_count must be at least 1");
  if (!(config.timeout_s > 0.0)) fail("timeout_s must be positive");
  if (!(config.goal_tolerance > 0.0)) fail("goal_tolerance must be positive");

  validate_shape(config.robot_shape);
  const ScenarioConfig& s = config.scenario;
  if (!(s.bounds.min.x() < s.bounds.max.x() && s.bounds.min.y() < s.bounds.max.y())) {
    fail("scenario.bounds: min must be strictly below max");
  }
  if (!s.bounds.contains(s.start_pose.position)) {
    fail("scenario.start_pose: outside the world bounds");
  }
  for (const Shape& shape : s.static_obstacles) validate_shape(shape);
  for (const MovingObstacle& m : s.moving_obstacles) {
    validate_shape(m.shape);
    if (m.waypoints.empty()) fail("moving obstacle: needs at least one waypoint");
    if (m.speed < 0.0) fail("moving obstacle: speed must be nonnegative");
  }
  for (const Pedestrian& p : s.pedestrians) {
    if (!(p.radius > 0.0)) fail("pedestrian: radius must be positive");
    if (p.max_speed < 0.0) fail("pedestrian: max_speed must be nonnegative");
  }

  const LidarConfig& l = config.lidar;
  if (l.ray_count < 1) fail("lidar.ray_count must be at least 1");
  if (!(l.eta_min > 0.0 && l.eta_max > l.eta_min)) {
    fail("lidar: need 0 < eta_min < eta_max");
  }
  if (l.noise_sigma < 0.0) fail("lidar.noise_sigma must be nonnegative");

  const LocalizationModel& loc = config.localization;
  if (loc.sigma_xy < 0.0 || loc.sigma_theta < 0.0) {
    fail("localization: sigmas must be nonnegative");
  }
  if (loc.sample_count < 1) fail("localization.sample_count must be at least 1");

  if (!(config.planner.resolution > 0.0)) fail("planner.resolution must be positive");
  if (config.planner.inflation_radius < 0.0) {
    fail("planner.inflation_radius must be nonnegative");
  }
  if (!(config.governor.gain > 0.0)) fail("governor.gain must be positive");
  if (!(config.governor.zeta >= 1.0)) fail("governor.zeta must be at least 1");

  const GoalSampling& g = config.goal_sampling;
  if (g.fixed) {
    if (!s.bounds.contains(g.fixed_point)) {
      fail("goal_sampling.point: outside the world bounds");
    }
  } else {
    if (!(g.min_distance > 0.0)) fail("goal_sampling.min_distance must be positive");
    if (g.min_clearance < 0.0) fail("goal_sampling.min_clearance must be nonnegative");
  }

  const ControllerConfig& c = config.controller_config;
  if (!(c.lambda > 0.0)) fail("controller_config.lambda must be positive");
  if (!(c.alpha_h_gain > 0.0)) fail("controller_config.alpha_h_gain must be positive");
  if (!(c.clf.k_v > 0.0 && c.clf.k_omega > 0.0 && c.clf.alpha_v_gain > 0.0)) {
    fail("controller_config.clf: gains must be positive");
  }
  if (!(c.v_min < c.v_max)) fail("controller_config: need v_min < v_max");
  if (!(c.omega_min < c.omega_max)) fail("controller_config: need omega_min < omega_max");
  if (!(c.ambiguity.epsilon > 0.0 && c.ambiguity.epsilon <= 1.0)) {
    fail("controller_config.ambiguity.epsilon must lie in (0, 1]");
  }
  if (c.ambiguity.sample_count < 1) {
    fail("controller_config.ambiguity.sample_count must be at least 1");
  }
  if (c.ambiguity.radius_r < 0.0) {
    fail("controller_config.ambiguity.radius_r must be nonnegative");
  }
  if (!(c.qp_tol > 0.0)) fail("controller_config.qp_tol must be positive");
  if (c.qp_max_iter < 1) fail("controller_config.qp_max_iter must be at least 1");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("config: top level must be an object");
  check_keys(root, "config",
             {"scenario", "robot_shape", "controller", "controller_config",
              "lidar", "localization", "planner", "governor", "goal_sampling",
              "rates", "trial_count", "seed", "timeout_s", "goal_tolerance"});

  ExperimentConfig c;
  if (root.contains("scenario")) c.scenario = parse_scenario(root["scenario"]);
  if (root.contains("robot_shape")) {
    c.robot_shape = parse_shape(root["robot_shape"], "robot_shape");
  }
  if (root.contains("controller")) {
    const std::string kind = root["controller"].get<std::string>();
    if (kind == "dr-cbf") {
      c.controller = ControllerKind::kDrCbf;
    } else if (kind == "nominal") {
      c.controller = ControllerKind::kNominal;
    } else {
      fail("controller: expected 'dr-cbf' or 'nominal'");
    }
  }
  if (root.contains("controller_config")) {
    c.controller_config = parse_controller_config(root["controller_config"]);
  }
  if (root.contains("lidar")) {
    const json& l = root["lidar"];
    check_keys(l, "lidar", {"ray_count", "eta_min", "eta_max", "noise_sigma"});
    if (l.contains("ray_count")) c.lidar.ray_count = as_int(l["ray_count"], "lidar.ray_count");
    if (l.contains("eta_min")) c.lidar.eta_min = as_number(l["eta_min"], "lidar.eta_min");
    if (l.contains("eta_max")) c.lidar.eta_max = as_number(l["eta_max"], "lidar.eta_max");
    if (l.contains("noise_sigma")) {
      c.lidar.noise_sigma = as_number(l["noise_sigma"], "lidar.noise_sigma");
    }
  }
  if (root.contains("localization")) {
    const json& l = root["localization"];
    check_keys(l, "localization", {"sigma_xy", "sigma_theta", "sample_count"});
    if (l.contains("sigma_xy")) {
      c.localization.sigma_xy = as_number(l["sigma_xy"], "localization.sigma_xy");
    }
    if (l.contains("sigma_theta")) {
      c.localization.sigma_theta = as_number(l["sigma_theta"], "localization.sigma_theta");
    }
    if (l.contains("sample_count")) {
      c.localization.sample_count = as_int(l["sample_count"], "localization.sample_count");
    }
  }
  if (root.contains("planner")) {
    const json& p = root["planner"];
    check_keys(p, "planner", {"resolution", "inflation_radius", "allow_unknown"});
    if (p.contains("resolution")) {
      c.planner.resolution = as_number(p["resolution"], "planner.resolution");
    }
    if (p.contains("inflation_radius")) {
      c.planner.inflation_radius =
          as_number(p["inflation_radius"], "planner.inflation_radius");
    }
    if (p.contains("allow_unknown")) {
      if (!p["allow_unknown"].is_boolean()) fail("planner.allow_unknown: expected a bool");
      c.planner.allow_unknown = p["allow_unknown"].get<bool>();
    }
  }
  if (root.contains("governor")) {
    const json& g = root["governor"];
    check_keys(g, "governor", {"gain", "zeta"});
    if (g.contains("gain")) c.governor.gain = as_number(g["gain"], "governor.gain");
    if (g.contains("zeta")) c.governor.zeta = as_number(g["zeta"], "governor.zeta");
  }
  if (root.contains("goal_sampling")) {
    const json& g = root["goal_sampling"];
    const std::string type = require(g, "goal_sampling", "type").get<std::string>();
    if (type == "fixed") {
      check_keys(g, "goal_sampling", {"type", "point"});
      c.goal_sampling.fixed = true;
      c.goal_sampling.fixed_point =
          parse_vec2(require(g, "goal_sampling", "point"), "goal_sampling.point");
    } else if (type == "random") {
      check_keys(g, "goal_sampling", {"type", "min_distance", "min_clearance"});
      c.goal_sampling.fixed = false;
      if (g.contains("min_distance")) {
        c.goal_sampling.min_distance =
            as_number(g["min_distance"], "goal_sampling.min_distance");
      }
      if (g.contains("min_clearance")) {
        c.goal_sampling.min_clearance =
            as_number(g["min_clearance"], "goal_sampling.min_clearance");
      }
    } else {
      fail("goal_sampling.type: expected 'fixed' or 'random'");
    }
  }
  if (root.contains("rates")) {
    const json& r = root["rates"];
    check_keys(r, "rates", {"control", "lidar", "planner"});
    if (r.contains("control")) c.rates.control_hz = as_int(r["control"], "rates.control");
    if (r.contains("lidar")) c.rates.lidar_hz = as_int(r["lidar"], "rates.lidar");
    if (r.contains("planner")) c.rates.planner_hz = as_int(r["planner"], "rates.planner");
  }
  if (root.contains("trial_count")) c.trial_count = as_int(root["trial_count"], "trial_count");
  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer()) fail("seed: expected an integer");
    c.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("timeout_s")) c.timeout_s = as_number(root["timeout_s"], "timeout_s");
  if (root.contains("goal_tolerance")) {
    c.goal_tolerance = as_number(root["goal_tolerance"], "goal_tolerance");
  }

  // The controller sees the same body the simulator collides.
  c.controller_config.robot_shape = c.robot_shape;
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("config: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

const char* outcome_name(TrialOutcome outcome) {
  switch (outcome) {
    case TrialOutcome::kSuccess: return "success";
    case TrialOutcome::kStuck: return "stuck";
    case TrialOutcome::kCollision: return "collision";
  }
  return "unknown";
}

Vec2 sample_goal(const ExperimentConfig& config, Rng& rng) {
  const GoalSampling& g = config.goal_sampling;
  if (g.fixed) return g.fixed_point;
  const Aabb& b = config.scenario.bounds;
  const double margin = std::max(g.min_clearance, 1e-6);
  const Vec2 lo = b.min + Vec2(margin, margin);
  const Vec2 hi = b.max - Vec2(margin, margin);
  if (!(lo.x() < hi.x() && lo.y() < hi.y())) {
    throw std::runtime_error("goal sampling: bounds too small for the clearance");
  }
  const Vec2 start = config.scenario.start_pose.position;
  for (int attempt = 0; attempt < 20000; ++attempt) {
    const Vec2 cand(rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y()));
    if ((cand - start).norm() < g.min_distance) continue;
    double clearance = std::numeric_limits<double>::infinity();
    for (const Shape& shape : config.scenario.static_obstacles) {
      clearance = std::min(clearance, sdf_eval(shape, cand));
    }
    if (clearance < g.min_clearance) continue;
    return cand;
  }
  throw std::runtime_error(
      "goal sampling: no admissible goal found in 20000 attempts");
}

namespace {

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

Stats stats_of(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
  return s;
}

// Plans a route to the goal, falling back to the nearest traversable cell as
// the search seed when the position itself sits inside inflation padding (the
// search gives up otherwise; the first path segment then leads out of the
// padding). Returns nullopt when the goal is unreachable either way.
std::optional<Path> plan_route(const OccupancyGrid& grid,
                               const PlannerConfig& cfg, const Vec2& position,
                               const Vec2& goal) {
  auto cells = a_star(grid, cfg, position, goal);
  if (!cells) {
    const std::optional<Vec2> seed = nearest_free_point(grid, cfg, position);
    if (!seed) return std::nullopt;
    cells = a_star(grid, cfg, *seed, goal);
    if (!cells) return std::nullopt;
  }
  return to_path(grid, cfg, *cells, true, position, goal);
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& config, std::uint64_t trial_seed,
                      bool record_trajectory) {
  validate_config(config);
  ControllerConfig cc = config.controller_config;
  cc.robot_shape = config.robot_shape;

  Rng rng(trial_seed);

  WorldState world;
  world.bounds = config.scenario.bounds;
  world.static_obstacles = config.scenario.static_obstacles;
  world.moving_obstacles = config.scenario.moving_obstacles;
  world.pedestrians = config.scenario.pedestrians;
  world.true_pose = config.scenario.start_pose;
  world.time = 0.0;

  TrialRecord rec;
  rec.goal = sample_goal(config, rng);

  const double start_clearance =
      true_clearance(world, config.robot_shape, world.true_pose);
  if (start_clearance <= 0.0) {
    fail("scenario.start_pose: robot starts in collision");
  }
  rec.min_clearance = start_clearance;

  const double dt = 1.0 / static_cast<double>(config.rates.control_hz);
  const int lidar_period = config.rates.control_hz / config.rates.lidar_hz;
  const int plan_period = config.rates.control_hz / config.rates.planner_hz;
  const int max_ticks = static_cast<int>(
      std::ceil(config.timeout_s * config.rates.control_hz - 1e-9));

  OccupancyGrid grid =
      OccupancyGrid::for_bounds(world.bounds, config.planner.resolution, 0.5);
  LidarScan scan;
  std::vector<ObstaclePoint> points;
  std::optional<Path> path;
  GovernorState gov;
  gov.g = 0.0;
  gov.k_gov = config.governor.gain;
  gov.zeta = config.governor.zeta;

  std::vector<double> tracking;
  tracking.reserve(static_cast<std::size_t>(max_ticks));
  rec.solve_times.reserve(static_cast<std::size_t>(max_ticks));

  int ticks_run = 0;
  TrialOutcome outcome = TrialOutcome::kStuck;
  for (int k = 0; k < max_ticks; ++k) {
    if (k % lidar_period == 0) {
      scan = lidar_scan(world, config.lidar, rng);
      points = scan.points;
    }
    const LocalizationResult loc =
        localize(world.true_pose, config.localization, rng);

    if (k % plan_period == 0) {
      update_grid(grid, loc.estimate, scan, config.lidar);
      // Adopting a fresh plan resets governor progress to the robot's
      // projection, which stalls the reference, so the current route is kept
      // until the grid contradicts it near the robot. Replanning on every
      // tick chatters when a marginally visible obstacle flickers in and out
      // of the grid or when fresh wall paint pushes padding onto the far tail
      // of the route, and each chatter step freezes the reference again.
      constexpr double kBlockHorizon = 3.0;
      if (!path ||
          route_blocked(grid, config.planner, *path, gov.g, kBlockHorizon)) {
        std::optional<Path> candidate =
            plan_route(grid, config.planner, loc.estimate.position, rec.goal);
        if (candidate) {
          path = std::move(candidate);
          gov.g = path->project(loc.estimate.position);
        }
      }
    }

    Vec2 reference = loc.estimate.position;  // no plan: hold position
    if (path) {
      gov = governor_step(gov, loc.estimate.position, *path, dt);
      reference = path->eval(gov.g);
    }

    const ControlOutput out =
        config.controller == ControllerKind::kDrCbf
            ? clf_dr_cbf_step(cc, loc.estimate, loc.samples, points, reference)
            : nominal_clf_cbf_step(cc, loc.estimate, points, reference);
    rec.solve_times.push_back(out.solve_time);
    if (out.status == ControlStatus::kInfeasibleStop) ++rec.infeasible_ticks;

    if (path) {
      const double s = path->project(world.true_pose.position);
      tracking.push_back((world.true_pose.position - path->eval(s)).norm());
    }

    if (record_trajectory) {
      double min_h = config.lidar.eta_max;
      for (const ObstaclePoint& p : points) {
        min_h = std::min(
            min_h, robot_sdf(config.robot_shape, loc.estimate, p.position));
      }
      rec.trajectory.push_back(
          TrajectorySample{k * dt, world.true_pose, out.control, min_h});
    }

    world.true_pose = step_unicycle(world.true_pose, out.control, dt);
    step_world(world, dt, rng);
    for (ObstaclePoint& p : points) p.position += dt * p.velocity;
    ticks_run = k + 1;

    const double clearance =
        true_clearance(world, config.robot_shape, world.true_pose);
    rec.min_clearance = std::min(rec.min_clearance, clearance);
    if (clearance <= 0.0) {
      outcome = TrialOutcome::kCollision;
      break;
    }
    if ((world.true_pose.position - rec.goal).norm() <= config.goal_tolerance) {
      outcome = TrialOutcome::kSuccess;
      break;
    }
  }

  rec.outcome = outcome;
  rec.completion_time = ticks_run * dt;
  const Stats t = stats_of(tracking);
  rec.tracking_error_mean = t.mean;
  rec.tracking_error_std = t.stddev;
  return rec;
}

MetricsTable run_experiment(const ExperimentConfig& config,
                            bool record_trajectories) {
  validate_config(config);
  std::vector<TrialRecord> trials;
  trials.reserve(static_cast<std::size_t>(config.trial_count));
  for (int i = 0; i < config.trial_count; ++i) {
    TrialRecord rec = run_trial(config, config.seed + static_cast<std::uint64_t>(i),
                                record_trajectories);
    rec.trial_id = i;
    trials.push_back(std::move(rec));
  }
  return aggregate(std::move(trials));
}

MetricsTable aggregate(std::vector<TrialRecord> trials) {
  MetricsTable m;
  m.trials = std::move(trials);
  const double n = static_cast<double>(m.trials.size());
  if (m.trials.empty()) return m;

  int success = 0, stuck = 0, collision = 0;
  std::vector<double> tracking_means;
  std::vector<double> completion_times;
  std::vector<double> solves;
  for (const TrialRecord& t : m.trials) {
    switch (t.outcome) {
      case TrialOutcome::kSuccess:
        ++success;
        completion_times.push_back(t.completion_time);
        break;
      case TrialOutcome::kStuck: ++stuck; break;
      case TrialOutcome::kCollision: ++collision; break;
    }
    tracking_means.push_back(t.tracking_error_mean);
    solves.insert(solves.end(), t.solve_times.begin(), t.solve_times.end());
    m.infeasible_ticks_total += t.infeasible_ticks;
  }
  m.success_rate_pct = 100.0 * success / n;
  m.stuck_rate_pct = 100.0 * stuck / n;
  m.collision_rate_pct = 100.0 * collision / n;
  const Stats tr = stats_of(tracking_means);
  m.tracking_error_mean = tr.mean;
  m.tracking_error_std = tr.stddev;
  const Stats ct = stats_of(completion_times);
  m.completion_time_mean = ct.mean;
  m.completion_time_std = ct.stddev;
  const Stats st = stats_of(solves);
  m.solve_time_mean = st.mean;
  m.solve_time_std = st.stddev;
  return m;
}

std::string metrics_csv(const MetricsTable& results) {
  std::string out =
      "trial_id,outcome,tracking_error_mean,tracking_error_std,"
      "completion_time_s,mean_solve_time_s,infeasible_ticks\n";
  char line[256];
  for (const TrialRecord& t : results.trials) {
    const Stats s = stats_of(t.solve_times);
    std::snprintf(line, sizeof(line), "%d,%s,%.6f,%.6f,%.6f,%.6f,%d\n",
                  t.trial_id, outcome_name(t.outcome), t.tracking_error_mean,
                  t.tracking_error_std, t.completion_time, s.mean,
                  t.infeasible_ticks);
    out += line;
  }
  return out;
}

std::string metrics_json(const MetricsTable& results) {
  json root;
  root["aggregates"] = {
      {"trial_count", results.trials.size()},
      {"success_rate_pct", results.success_rate_pct},
      {"stuck_rate_pct", results.stuck_rate_pct},
      {"collision_rate_pct", results.collision_rate_pct},
      {"tracking_error_mean", results.tracking_error_mean},
      {"tracking_error_std", results.tracking_error_std},
      {"completion_time_mean", results.completion_time_mean},
      {"completion_time_std", results.completion_time_std},
      {"solve_time_mean", results.solve_time_mean},
      {"solve_time_std", results.solve_time_std},
      {"infeasible_ticks_total", results.infeasible_ticks_total},
  };
  json trials = json::array();
  for (const TrialRecord& t : results.trials) {
    json rec;
    rec["trial_id"] = t.trial_id;
    rec["outcome"] = outcome_name(t.outcome);
    rec["goal"] = {t.goal.x(), t.goal.y()};
    rec["tracking_error_mean"] = t.tracking_error_mean;
    rec["tracking_error_std"] = t.tracking_error_std;
    rec["completion_time_s"] = t.completion_time;
    rec["solve_times"] = t.solve_times;
    rec["infeasible_ticks"] = t.infeasible_ticks;
    rec["min_clearance"] = t.min_clearance;
    trials.push_back(std::move(rec));
  }
  root["trials"] = std::move(trials);
  return root.dump(2) + "\n";
}

std::string trajectory_csv(const TrialRecord& record) {
  std::string out = "time_s,x,y,theta,v,omega,min_h\n";
  char line[256];
  for (const TrajectorySample& s : record.trajectory) {
    std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  s.time, s.pose.position.x(), s.pose.position.y(),
                  s.pose.heading, s.control.v, s.control.omega, s.min_h);
    out += line;
  }
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace drnav
