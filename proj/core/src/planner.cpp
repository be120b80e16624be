#include "drnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace drnav {

namespace {

// Validates before the cell store is sized so a bad dimension can never turn
// into a huge allocation request.
std::size_t checked_cell_count(double resolution, int nx, int ny) {
  if (resolution <= 0.0 || nx < 1 || ny < 1) {
    throw std::invalid_argument("occupancy grid: bad dimensions");
  }
  return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
}

}  // namespace

OccupancyGrid::OccupancyGrid(const Vec2& origin, double resolution, int nx, int ny)
    : origin_(origin), resolution_(resolution), nx_(nx), ny_(ny),
      cells_(checked_cell_count(resolution, nx, ny), CellState::kUnknown) {}

OccupancyGrid OccupancyGrid::for_bounds(const Aabb& bounds, double resolution,
                                        double margin) {
  const Vec2 lo = bounds.min - Vec2(margin, margin);
  const Vec2 hi = bounds.max + Vec2(margin, margin);
  const int nx = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / resolution)));
  const int ny = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / resolution)));
  return OccupancyGrid(lo, resolution, nx, ny);
}

Eigen::Vector2i OccupancyGrid::cell_of(const Vec2& p) const {
  return {static_cast<int>(std::floor((p.x() - origin_.x()) / resolution_)),
          static_cast<int>(std::floor((p.y() - origin_.y()) / resolution_))};
}

Vec2 OccupancyGrid::center_of(int ix, int iy) const {
  return {origin_.x() + (ix + 0.5) * resolution_,
          origin_.y() + (iy + 0.5) * resolution_};
}

void update_grid(OccupancyGrid& grid, const Pose2& estimate,
                 const LidarScan& scan, const LidarConfig& config) {
  const Eigen::Vector2i start = grid.cell_of(estimate.position);
  if (grid.in_bounds(start.x(), start.y())) {
    grid.set(start.x(), start.y(), CellState::kFree);
  }
  const int rays = static_cast<int>(scan.ranges.size());
  for (int k = 0; k < rays; ++k) {
    const double angle = estimate.heading + 2.0 * M_PI * k / config.ray_count;
    const Vec2 dir(std::cos(angle), std::sin(angle));
    const Vec2 end = estimate.position + scan.ranges[static_cast<std::size_t>(k)] * dir;
    const Eigen::Vector2i goal = grid.cell_of(end);

    // Bresenham between the start and endpoint cells.
    int x0 = start.x(), y0 = start.y();
    const int x1 = goal.x(), y1 = goal.y();
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      const bool is_end = (x0 == x1 && y0 == y1);
      if (grid.in_bounds(x0, y0)) {
        if (is_end) {
          grid.set(x0, y0, scan.hit[static_cast<std::size_t>(k)]
                               ? CellState::kOccupied
                               : CellState::kFree);
        } else {
          grid.set(x0, y0, CellState::kFree);
        }
      }
      if (is_end) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }
}

namespace {

// Occupied cells dilated by the inflation radius; unknown cells blocked as-is
// when not traversable.
std::vector<std::uint8_t> blocked_map(const OccupancyGrid& grid,
                                      const PlannerConfig& cfg) {
  const int nx = grid.nx(), ny = grid.ny();
  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(nx) * ny, 0);
  const int r = static_cast<int>(std::ceil(cfg.inflation_radius / grid.resolution()));
  std::vector<Eigen::Vector2i> disk;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy <= r * r) disk.emplace_back(dx, dy);
    }
  }
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const CellState c = grid.at(x, y);
      if (c == CellState::kOccupied) {
        for (const Eigen::Vector2i& d : disk) {
          const int bx = x + d.x(), by = y + d.y();
          if (grid.in_bounds(bx, by)) {
            blocked[static_cast<std::size_t>(by) * nx + bx] = 1;
          }
        }
      } else if (c == CellState::kUnknown && !cfg.allow_unknown) {
        blocked[static_cast<std::size_t>(y) * nx + x] = 1;
      }
    }
  }
  return blocked;
}

}  // namespace

std::optional<std::vector<Eigen::Vector2i>> a_star(const OccupancyGrid& grid,
                                                   const PlannerConfig& cfg,
                                                   const Vec2& start,
                                                   const Vec2& goal,
                                                   double* cost_out) {
  const int nx = grid.nx(), ny = grid.ny();
  const Eigen::Vector2i sc = grid.cell_of(start);
  const Eigen::Vector2i gc = grid.cell_of(goal);
  if (!grid.in_bounds(sc.x(), sc.y()) || !grid.in_bounds(gc.x(), gc.y())) {
    return std::nullopt;
  }
  std::vector<std::uint8_t> blocked = blocked_map(grid, cfg);
  const auto idx = [nx](int x, int y) {
    return static_cast<std::size_t>(y) * nx + x;
  };
  // The robot may legitimately stand inside an inflated cell (noise, drift);
  // planning from it must still be possible.
  blocked[idx(sc.x(), sc.y())] = 0;
  if (blocked[idx(gc.x(), gc.y())]) return std::nullopt;

  const double res = grid.resolution();
  const double kDiag = res * std::sqrt(2.0);
  const auto heuristic = [&](int x, int y) {
    const double dx = (x - gc.x()) * res, dy = (y - gc.y()) * res;
    return std::sqrt(dx * dx + dy * dy);
  };

  std::vector<double> g(static_cast<std::size_t>(nx) * ny,
                        std::numeric_limits<double>::infinity());
  std::vector<int> parent(static_cast<std::size_t>(nx) * ny, -1);
  using Node = std::pair<double, int>;  // (f, cell index) — deterministic order
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;

  g[idx(sc.x(), sc.y())] = 0.0;
  open.emplace(heuristic(sc.x(), sc.y()), static_cast<int>(idx(sc.x(), sc.y())));

  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  const int goal_idx = static_cast<int>(idx(gc.x(), gc.y()));
  bool found = false;
  while (!open.empty()) {
    const auto [f, ci] = open.top();
    open.pop();
    const int cx = ci % nx, cy = ci / nx;
    if (f > g[static_cast<std::size_t>(ci)] + heuristic(cx, cy) + 1e-12) continue;
    if (ci == goal_idx) {
      found = true;
      break;
    }
    for (int k = 0; k < 8; ++k) {
      const int x = cx + kDx[k], y = cy + kDy[k];
      if (!grid.in_bounds(x, y) || blocked[idx(x, y)]) continue;
      if (k >= 4) {
        // No corner cutting: a diagonal requires both adjacent cardinals.
        if (blocked[idx(cx + kDx[k], cy)] || blocked[idx(cx, cy + kDy[k])]) continue;
      }
      const double step = k < 4 ? res : kDiag;
      const double cand = g[static_cast<std::size_t>(ci)] + step;
      if (cand < g[idx(x, y)] - 1e-12) {
        g[idx(x, y)] = cand;
        parent[idx(x, y)] = ci;
        open.emplace(cand + heuristic(x, y), static_cast<int>(idx(x, y)));
      }
    }
  }
  if (!found) return std::nullopt;

  if (cost_out) *cost_out = g[static_cast<std::size_t>(goal_idx)];
  std::vector<Eigen::Vector2i> cells;
  for (int ci = goal_idx; ci != -1; ci = parent[static_cast<std::size_t>(ci)]) {
    cells.emplace_back(ci % nx, ci / nx);
  }
  std::reverse(cells.begin(), cells.end());
  return cells;
}

namespace {

bool line_of_sight(const OccupancyGrid& grid, const std::vector<std::uint8_t>& blocked,
                   const Vec2& a, const Vec2& b) {
  const double step = grid.resolution() * 0.25;
  const double len = (b - a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  for (int i = 0; i <= n; ++i) {
    const Vec2 p = a + (static_cast<double>(i) / n) * (b - a);
    const Eigen::Vector2i c = grid.cell_of(p);
    if (!grid.in_bounds(c.x(), c.y())) return false;
    if (blocked[static_cast<std::size_t>(c.y()) * grid.nx() + c.x()]) return false;
  }
  return true;
}

}  // namespace

Path to_path(const OccupancyGrid& grid, const PlannerConfig& cfg,
             const std::vector<Eigen::Vector2i>& cells, bool smoothing,
             const std::optional<Vec2>& exact_start,
             const std::optional<Vec2>& exact_goal) {
  if (cells.empty()) throw std::invalid_argument("to_path: empty cell path");
  std::vector<Vec2> pts;
  pts.reserve(cells.size());
  for (const Eigen::Vector2i& c : cells) pts.push_back(grid.center_of(c.x(), c.y()));
  if (exact_start) pts.front() = *exact_start;
  if (exact_goal) pts.back() = *exact_goal;
  if (!smoothing || pts.size() <= 2) return Path(pts);

  const std::vector<std::uint8_t> blocked = blocked_map(grid, cfg);
  // Greedy shortcutting with a bounded lookahead so a long path costs O(n)
  // visibility samples, not O(n^2).
  constexpr std::size_t kLookahead = 64;
  std::vector<Vec2> kept;
  kept.push_back(pts.front());
  std::size_t i = 0;
  while (i + 1 < pts.size()) {
    std::size_t j = std::min(pts.size() - 1, i + kLookahead);
    for (; j > i + 1; --j) {
      if (line_of_sight(grid, blocked, pts[i], pts[j])) break;
    }
    kept.push_back(pts[j]);
    i = j;
  }
  return Path(kept);
}

bool route_blocked(const OccupancyGrid& grid, const PlannerConfig& cfg,
                   const Path& path, double from, double horizon) {
  if (path.empty()) return true;
  const std::vector<std::uint8_t> blocked = blocked_map(grid, cfg);
  const double s0 = std::clamp(from, 0.0, 1.0);
  const double remaining =
      std::min((1.0 - s0) * path.length(), std::max(horizon, 0.0));
  if (remaining <= 0.0) return false;
  const double s1 = s0 + remaining / std::max(path.length(), 1e-12);
  const double step = 0.5 * grid.resolution();
  const int n = std::max(1, static_cast<int>(std::ceil(remaining / step)));
  // The leading exemption covers at most one inflation radius of travel: just
  // enough for a route that starts inside padding to leave it directly, never
  // enough to tunnel past the obstacle that generated the padding.
  const double max_leading = cfg.inflation_radius + 2.0 * grid.resolution();
  bool in_leading_run = true;
  for (int i = 0; i <= n; ++i) {
    const double s = s0 + (s1 - s0) * i / n;
    const Eigen::Vector2i c = grid.cell_of(path.eval(s));
    if (!grid.in_bounds(c.x(), c.y())) return true;
    const bool hit =
        blocked[static_cast<std::size_t>(c.y()) * grid.nx() + c.x()] != 0;
    if (hit && grid.at(c.x(), c.y()) == CellState::kOccupied) return true;
    if (!hit) {
      in_leading_run = false;
    } else if (!in_leading_run || (s - s0) * path.length() > max_leading) {
      return true;
    }
  }
  return false;
}

std::optional<Vec2> nearest_free_point(const OccupancyGrid& grid,
                                       const PlannerConfig& cfg,
                                       const Vec2& p) {
  const std::vector<std::uint8_t> blocked = blocked_map(grid, cfg);
  const Eigen::Vector2i c0 = grid.cell_of(p);
  const int nx = grid.nx(), ny = grid.ny();
  const int max_ring = std::max(nx, ny);
  for (int r = 0; r <= max_ring; ++r) {
    std::optional<Vec2> best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
        const int x = c0.x() + dx, y = c0.y() + dy;
        if (!grid.in_bounds(x, y)) continue;
        if (blocked[static_cast<std::size_t>(y) * nx + x]) continue;
        const Vec2 q = grid.center_of(x, y);
        const double d2 = (q - p).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = q;
        }
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

}  // namespace drnav
