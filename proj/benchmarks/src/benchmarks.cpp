#include <benchmark/benchmark.h>

#include <vector>

#include "drnav/controller.hpp"
#include "drnav/geometry.hpp"
#include "drnav/planner.hpp"
#include "drnav/qp.hpp"
#include "drnav/random.hpp"
#include "drnav/world.hpp"

namespace {

using namespace drnav;

// A wall and two pedestrians scanned by a full-resolution lidar; the fixture
// every controller benchmark shares.
struct ControllerFixture {
  ControllerConfig config;
  Pose2 estimate{{0.0, 0.0}, 0.0};
  std::vector<Pose2> samples;
  std::vector<ObstaclePoint> points;
  Vec2 reference{3.0, 0.5};

  ControllerFixture() {
    WorldState world;
    world.bounds = Aabb{{-10.0, -10.0}, {10.0, 10.0}};
    world.static_obstacles.push_back(Shape{ConvexPolygon{
        {{2.0, -4.0}, {2.5, -4.0}, {2.5, 4.0}, {2.0, 4.0}}}});
    world.static_obstacles.push_back(Shape{Circle{{0.5, 1.5}, 0.4}});
    world.pedestrians.push_back(
        Pedestrian{{1.0, -1.0}, {0.4, 0.3}, {3.0, 3.0}, 0.3, 1.0});
    world.pedestrians.push_back(
        Pedestrian{{-1.5, 0.5}, {-0.2, 0.5}, {-3.0, 3.0}, 0.3, 1.0});
    world.true_pose = estimate;

    Rng rng(7);
    LidarConfig lidar;
    lidar.noise_sigma = 0.1;
    const LidarScan scan = lidar_scan(world, lidar, rng);
    points = scan.points;

    LocalizationModel loc;
    loc.sigma_xy = 0.05;
    loc.sigma_theta = 0.05;
    const LocalizationResult lr = localize(world.true_pose, loc, rng);
    estimate = lr.estimate;
    samples = lr.samples;
  }
};

void BM_QpSolve(benchmark::State& state) {
  // Dimensions matching one safety-filter step: 10 variables, 26 rows.
  Rng rng(11);
  const int n = 10, m = 26;
  Eigen::MatrixXd L(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) L(i, j) = rng.normal();
  QuadraticProgram qp;
  qp.P = L * L.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
  qp.q = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) qp.q(i) = rng.normal();
  qp.A = Eigen::MatrixXd(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) qp.A(i, j) = rng.normal();
  qp.b = qp.A * Eigen::VectorXd::Zero(n) +
         Eigen::VectorXd::Constant(m, 1.0);  // origin strictly feasible
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(qp));
  }
}
BENCHMARK(BM_QpSolve);

void BM_ControllerStep(benchmark::State& state) {
  const ControllerFixture fx;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        clf_dr_cbf_step(fx.config, fx.estimate, fx.samples, fx.points, fx.reference));
  }
}
BENCHMARK(BM_ControllerStep);

void BM_NominalStep(benchmark::State& state) {
  const ControllerFixture fx;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        nominal_clf_cbf_step(fx.config, fx.estimate, fx.points, fx.reference));
  }
}
BENCHMARK(BM_NominalStep);

void BM_SdfUnion(benchmark::State& state) {
  const Shape shape{ShapeUnion{{
      Shape{Circle{{1.0, 2.0}, 0.5}},
      Shape{ConvexPolygon{{{-2.0, -1.0}, {0.0, -1.5}, {1.0, 0.0}, {-1.0, 1.0}}}},
      Shape{Circle{{-3.0, 0.5}, 1.2}},
  }}};
  double x = -4.0;
  for (auto _ : state) {
    x += 0.01;
    if (x > 4.0) x = -4.0;
    benchmark::DoNotOptimize(sdf_eval(shape, Vec2(x, 0.3 * x)));
  }
}
BENCHMARK(BM_SdfUnion);

void BM_LidarScan(benchmark::State& state) {
  WorldState world;
  world.bounds = Aabb{{-10.0, -10.0}, {10.0, 10.0}};
  for (int i = 0; i < 8; ++i) {
    world.static_obstacles.push_back(
        Shape{Circle{{-6.0 + 1.7 * i, (i % 2 == 0) ? 2.0 : -2.5}, 0.5}});
  }
  world.true_pose = Pose2{{0.0, 0.0}, 0.3};
  LidarConfig lidar;
  lidar.noise_sigma = 0.05;
  Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lidar_scan(world, lidar, rng));
  }
}
BENCHMARK(BM_LidarScan);

void BM_AStar(benchmark::State& state) {
  // 200 x 200 grid with a slalom of walls.
  const Aabb bounds{{-10.0, -10.0}, {10.0, 10.0}};
  OccupancyGrid grid = OccupancyGrid::for_bounds(bounds, 0.1, 0.0);
  for (int y = 0; y < grid.ny(); ++y) {
    for (int x = 0; x < grid.nx(); ++x) grid.set(x, y, CellState::kFree);
  }
  for (int wall = 0; wall < 4; ++wall) {
    const int x = 40 + wall * 35;
    const int gap = (wall % 2 == 0) ? 30 : 160;
    for (int y = 0; y < grid.ny(); ++y) {
      if (std::abs(y - gap) > 12) grid.set(x, y, CellState::kOccupied);
    }
  }
  PlannerConfig cfg;
  const Vec2 start(-9.0, -9.0), goal(9.0, 9.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(a_star(grid, cfg, start, goal));
  }
}
BENCHMARK(BM_AStar);

}  // namespace

BENCHMARK_MAIN();
