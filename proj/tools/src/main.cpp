// Command-line front end: batch experiment runs and a planner inspector.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "drnav/harness.hpp"
#include "drnav/random.hpp"

namespace {

struct RunOptions {
  std::string config_path;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> controller;
  std::optional<std::string> out_dir;
  bool dump_trajectories = false;
};

int cmd_run(const RunOptions& opt) {
  drnav::ExperimentConfig config = drnav::load_config(opt.config_path);
  if (opt.trials) config.trial_count = *opt.trials;
  if (opt.seed) config.seed = *opt.seed;
  if (opt.controller) {
    if (*opt.controller == "dr-cbf") {
      config.controller = drnav::ControllerKind::kDrCbf;
    } else if (*opt.controller == "nominal") {
      config.controller = drnav::ControllerKind::kNominal;
    } else {
      throw std::invalid_argument("--controller: expected 'dr-cbf' or 'nominal'");
    }
  }
  drnav::validate_config(config);

  const drnav::MetricsTable results =
      drnav::run_experiment(config, opt.dump_trajectories);

  std::printf("scenario:            %s\n", config.scenario.name.c_str());
  std::printf("controller:          %s\n",
              config.controller == drnav::ControllerKind::kDrCbf ? "dr-cbf"
                                                                 : "nominal");
  std::printf("trials:              %d (seed %llu)\n", config.trial_count,
              static_cast<unsigned long long>(config.seed));
  std::printf("success rate:        %.1f %%\n", results.success_rate_pct);
  std::printf("stuck rate:          %.1f %%\n", results.stuck_rate_pct);
  std::printf("collision rate:      %.1f %%\n", results.collision_rate_pct);
  std::printf("tracking error:      %.4f +/- %.4f m\n",
              results.tracking_error_mean, results.tracking_error_std);
  std::printf("completion time:     %.2f +/- %.2f s\n",
              results.completion_time_mean, results.completion_time_std);
  std::printf("solve time:          %.5f +/- %.5f s\n", results.solve_time_mean,
              results.solve_time_std);
  std::printf("infeasible ticks:    %lld\n", results.infeasible_ticks_total);

  if (opt.out_dir) {
    const std::filesystem::path dir(*opt.out_dir);
    std::filesystem::create_directories(dir);
    drnav::write_file((dir / "metrics.csv").string(),
                      drnav::metrics_csv(results));
    drnav::write_file((dir / "metrics.json").string(),
                      drnav::metrics_json(results));
    if (opt.dump_trajectories) {
      for (const drnav::TrialRecord& t : results.trials) {
        char name[64];
        std::snprintf(name, sizeof(name), "trajectory_%04d.csv", t.trial_id);
        drnav::write_file((dir / name).string(), drnav::trajectory_csv(t));
      }
    }
    std::printf("wrote results to %s\n", dir.string().c_str());
  }
  return 0;
}

int cmd_plan_debug(const std::string& config_path) {
  const drnav::ExperimentConfig config = drnav::load_config(config_path);
  drnav::Rng rng(config.seed);

  drnav::WorldState world;
  world.bounds = config.scenario.bounds;
  world.static_obstacles = config.scenario.static_obstacles;
  world.moving_obstacles = config.scenario.moving_obstacles;
  world.pedestrians = config.scenario.pedestrians;
  world.true_pose = config.scenario.start_pose;

  // Same draw order as trial 0, so the debug view matches what that trial
  // plans against.
  const drnav::Vec2 goal = drnav::sample_goal(config, rng);

  const drnav::LidarScan scan = drnav::lidar_scan(world, config.lidar, rng);
  drnav::OccupancyGrid grid = drnav::OccupancyGrid::for_bounds(
      world.bounds, config.planner.resolution, 0.5);
  drnav::update_grid(grid, world.true_pose, scan, config.lidar);

  const auto cells = drnav::a_star(grid, config.planner,
                                   world.true_pose.position, goal);
  std::printf("grid: %d x %d at %.2f m, start (%.2f, %.2f), goal (%.2f, %.2f)\n",
              grid.nx(), grid.ny(), grid.resolution(),
              world.true_pose.position.x(), world.true_pose.position.y(),
              goal.x(), goal.y());
  if (!cells) {
    std::printf("no path found\n");
    return 0;
  }
  double cost = 0.0;
  drnav::a_star(grid, config.planner, world.true_pose.position, goal, &cost);
  std::printf("path: %zu cells, metric length %.2f m\n", cells->size(), cost);

  // ASCII render, downsampled to at most ~100 columns.
  const int stride = std::max(1, grid.nx() / 100);
  std::string row;
  for (int y = grid.ny() - 1; y >= 0; y -= stride) {
    row.clear();
    for (int x = 0; x < grid.nx(); x += stride) {
      char c = '.';
      switch (grid.at(x, y)) {
        case drnav::CellState::kUnknown: c = ' '; break;
        case drnav::CellState::kFree: c = '.'; break;
        case drnav::CellState::kOccupied: c = '#'; break;
      }
      row.push_back(c);
    }
    for (const Eigen::Vector2i& p : *cells) {
      if (p.y() / stride == y / stride && p.y() >= y && p.y() < y + stride) {
        const std::size_t col = static_cast<std::size_t>(p.x() / stride);
        if (col < row.size()) row[col] = '*';
      }
    }
    std::printf("%s\n", row.c_str());
  }
  const drnav::Path path = drnav::to_path(grid, config.planner, *cells, true,
                                          world.true_pose.position, goal);
  std::printf("smoothed waypoints: %zu, length %.2f m\n",
              path.waypoints().size(), path.length());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally robust safe navigation experiments"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run a batch of trials");
  run->add_option("--config", run_opt.config_path, "Experiment config (JSON)")
      ->required();
  int trials_arg = 0;
  std::uint64_t seed_arg = 0;
  std::string controller_arg, out_arg;
  CLI::Option* trials_opt =
      run->add_option("--trials", trials_arg, "Override trial count");
  CLI::Option* seed_opt = run->add_option("--seed", seed_arg, "Override seed");
  CLI::Option* controller_opt = run->add_option(
      "--controller", controller_arg, "Controller: dr-cbf or nominal");
  CLI::Option* out_opt =
      run->add_option("--out", out_arg, "Directory for CSV/JSON results");
  run->add_flag("--dump-trajectories", run_opt.dump_trajectories,
                "Also write per-trial trajectory CSVs");

  std::string plan_config;
  CLI::App* plan = app.add_subcommand("plan-debug", "Print the grid and path");
  plan->add_option("--config", plan_config, "Experiment config (JSON)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (*trials_opt) run_opt.trials = trials_arg;
      if (*seed_opt) run_opt.seed = seed_arg;
      if (*controller_opt) run_opt.controller = controller_arg;
      if (*out_opt) run_opt.out_dir = out_arg;
      return cmd_run(run_opt);
    }
    return cmd_plan_debug(plan_config);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
