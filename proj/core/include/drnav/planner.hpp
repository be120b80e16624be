#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "drnav/geometry.hpp"
#include "drnav/stabilizer.hpp"
#include "drnav/world.hpp"

namespace drnav {

enum class CellState : std::uint8_t { kUnknown = 0, kFree = 1, kOccupied = 2 };

class OccupancyGrid {
 public:
  OccupancyGrid(const Vec2& origin, double resolution, int nx, int ny);
  static OccupancyGrid for_bounds(const Aabb& bounds, double resolution,
                                  double margin = 0.5);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double resolution() const { return resolution_; }
  const Vec2& origin() const { return origin_; }

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && ix < nx_ && iy >= 0 && iy < ny_;
  }
  CellState at(int ix, int iy) const {
    return cells_[static_cast<std::size_t>(iy) * nx_ + ix];
  }
  void set(int ix, int iy, CellState s) {
    cells_[static_cast<std::size_t>(iy) * nx_ + ix] = s;
  }
  Eigen::Vector2i cell_of(const Vec2& p) const;
  Vec2 center_of(int ix, int iy) const;

 private:
  Vec2 origin_;
  double resolution_;
  int nx_, ny_;
  std::vector<CellState> cells_;
};

// Ray-casts the scan from the pose estimate: traversed cells become free,
// endpoint cells of hit rays become occupied. Revisited cells are simply
// overwritten (latest wins), so moved obstacles clear on later scans.
void update_grid(OccupancyGrid& grid, const Pose2& estimate,
                 const LidarScan& scan, const LidarConfig& config);

struct PlannerConfig {
  double resolution = 0.1;
  double inflation_radius = 0.35;
  bool allow_unknown = true;
};

// 8-connected A* with the Euclidean heuristic over the grid with occupied
// cells inflated by inflation_radius. Unknown cells are traversable exactly
// when allow_unknown. Returns the cell path (start to goal) or nullopt when
// no path exists; cost_out receives the metric path length.
std::optional<std::vector<Eigen::Vector2i>> a_star(const OccupancyGrid& grid,
                                                   const PlannerConfig& config,
                                                   const Vec2& start,
                                                   const Vec2& goal,
                                                   double* cost_out = nullptr);

// Converts a cell path to a waypoint Path. With smoothing, runs greedy
// line-of-sight shortcutting against the same inflated-cell predicate as the
// search. Optional exact endpoints replace the first/last cell centers.
Path to_path(const OccupancyGrid& grid, const PlannerConfig& config,
             const std::vector<Eigen::Vector2i>& cells, bool smoothing,
             const std::optional<Vec2>& exact_start = std::nullopt,
             const std::optional<Vec2>& exact_goal = std::nullopt);

// True when the path runs through space the inflated grid considers
// untraversable, examined from normalized arc length `from` for at most
// `horizon` meters of arc (the far tail of a long route is still being
// mapped and settles on its own). The leading contiguous run of inflated
// cells is ignored — a route that starts inside padding and immediately
// leaves it is not blocked — but cells the grid marks occupied always block.
// Empty paths are blocked.
bool route_blocked(const OccupancyGrid& grid, const PlannerConfig& config,
                   const Path& path, double from = 0.0,
                   double horizon = std::numeric_limits<double>::infinity());

// Center of the traversable cell nearest to p under the inflated-cell
// predicate, or nullopt when the whole grid is untraversable. Used to seed a
// search when the query position itself sits inside inflation padding.
std::optional<Vec2> nearest_free_point(const OccupancyGrid& grid,
                                       const PlannerConfig& config,
                                       const Vec2& p);

}  // namespace drnav
