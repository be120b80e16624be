#include "drnav/geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace drnav {

namespace {

constexpr double kEps = 1e-12;

bool finite(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

// Outward normal of CCW edge a -> b.
Vec2 edge_normal(const Vec2& a, const Vec2& b) {
  const Vec2 e = b - a;
  return Vec2(e.y(), -e.x()).normalized();
}

struct PolyQuery {
  double dist;
  Vec2 grad;
};

PolyQuery polygon_query(const ConvexPolygon& poly, const Vec2& p) {
  const std::size_t n = poly.vertices.size();
  // Interior signed distance: max over edge half-planes of n_i . (p - v_i).
  // Non-positive exactly when p is inside or on the boundary.
  double plane_max = -std::numeric_limits<double>::infinity();
  std::size_t plane_arg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly.vertices[i];
    const Vec2& b = poly.vertices[(i + 1) % n];
    const double d = edge_normal(a, b).dot(p - a);
    if (d > plane_max + kEps) {
      plane_max = d;
      plane_arg = i;
    }
  }
  if (plane_max <= 0.0) {
    const Vec2& a = poly.vertices[plane_arg];
    const Vec2& b = poly.vertices[(plane_arg + 1) % n];
    return {plane_max, edge_normal(a, b)};
  }
  // Outside: distance to the nearest boundary segment.
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_point = poly.vertices[0];
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly.vertices[i];
    const Vec2& b = poly.vertices[(i + 1) % n];
    const Vec2 e = b - a;
    const double t = std::clamp(e.dot(p - a) / e.squaredNorm(), 0.0, 1.0);
    const Vec2 q = a + t * e;
    const double d = (p - q).norm();
    if (d < best - kEps) {
      best = d;
      best_point = q;
    }
  }
  if (best < kEps) {
    // On the boundary to machine precision; fall back to the nearest edge
    // half-plane normal so the gradient stays unit length.
    const Vec2& a = poly.vertices[plane_arg];
    const Vec2& b = poly.vertices[(plane_arg + 1) % n];
    return {0.0, edge_normal(a, b)};
  }
  return {best, (p - best_point) / best};
}

struct UnionPick {
  const Shape* member;
  double dist;
};

UnionPick union_pick(const ShapeUnion& u, const Vec2& p) {
  const Shape* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Shape& member : u.members) {
    const double d = sdf_eval(member, p);
    if (d < best_d - kEps || best == nullptr) {
      best_d = d;
      best = &member;
    }
  }
  return {best, best_d};
}

}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

Eigen::Matrix2d rotation_matrix(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Vec2 Pose2::to_body(const Vec2& world_point) const {
  return rotation().transpose() * (world_point - position);
}

Vec2 Pose2::to_world(const Vec2& body_point) const {
  return rotation() * body_point + position;
}

void validate_shape(const Shape& shape) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          if (!finite(s.center) || !std::isfinite(s.radius)) {
            throw std::invalid_argument("circle has non-finite parameters");
          }
          if (s.radius <= 0.0) {
            throw std::invalid_argument("circle radius must be positive");
          }
        } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
          const std::size_t n = s.vertices.size();
          if (n < 3) {
            throw std::invalid_argument("polygon needs at least 3 vertices");
          }
          for (const Vec2& v : s.vertices) {
            if (!finite(v)) {
              throw std::invalid_argument("polygon vertex is non-finite");
            }
          }
          for (std::size_t i = 0; i < n; ++i) {
            const Vec2 e0 = s.vertices[(i + 1) % n] - s.vertices[i];
            const Vec2 e1 = s.vertices[(i + 2) % n] - s.vertices[(i + 1) % n];
            const double cross = e0.x() * e1.y() - e0.y() * e1.x();
            if (cross <= 1e-9 * e0.norm() * e1.norm()) {
              throw std::invalid_argument(
                  "polygon must be strictly convex counter-clockwise");
            }
          }
        } else {
          if (s.members.empty()) {
            throw std::invalid_argument("union must have at least one member");
          }
          for (const Shape& m : s.members) validate_shape(m);
        }
      },
      shape.value);
}

double sdf_eval(const Shape& shape, const Vec2& point) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return (point - s.center).norm() - s.radius;
        } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
          return polygon_query(s, point).dist;
        } else {
          return union_pick(s, point).dist;
        }
      },
      shape.value);
}

SdfGradient sdf_gradient(const Shape& shape, const Vec2& point) {
  return std::visit(
      [&](const auto& s) -> SdfGradient {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          const Vec2 d = point - s.center;
          const double norm = d.norm();
          if (norm < kEps) return {Vec2(1.0, 0.0), true};
          return {d / norm, false};
        } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
          return {polygon_query(s, point).grad, false};
        } else {
          return sdf_gradient(*union_pick(s, point).member, point);
        }
      },
      shape.value);
}

double robot_sdf(const Shape& body, const Pose2& pose, const Vec2& world_point) {
  return sdf_eval(body, pose.to_body(world_point));
}

namespace {

std::optional<RayHit> ray_hit_circle(const Circle& c, const Vec2& o,
                                     const Vec2& d, double max_range) {
  const Vec2 oc = o - c.center;
  const double c2 = oc.squaredNorm() - c.radius * c.radius;
  if (c2 < -kEps) return RayHit{0.0, true};
  const double b = oc.dot(d);
  const double disc = b * b - c2;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  double t = -b - sq;
  if (t < 0.0) {
    if (-b + sq < 0.0) return std::nullopt;  // sphere behind the origin
    t = 0.0;                                 // origin on the boundary
  }
  if (t > max_range) return std::nullopt;
  return RayHit{t, false};
}

std::optional<RayHit> ray_hit_polygon(const ConvexPolygon& poly, const Vec2& o,
                                      const Vec2& d, double max_range) {
  const std::size_t n = poly.vertices.size();
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  bool strictly_inside = true;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly.vertices[i];
    const Vec2 normal = edge_normal(a, poly.vertices[(i + 1) % n]);
    const double dist = normal.dot(o - a);  // > 0 outside this half-plane
    if (dist >= -kEps) strictly_inside = false;
    const double slope = normal.dot(d);
    if (std::abs(slope) < kEps) {
      if (dist > kEps) return std::nullopt;  // parallel and outside
      continue;
    }
    const double t = -dist / slope;
    if (slope > 0.0) {
      t_hi = std::min(t_hi, t);  // exiting this half-plane
    } else {
      t_lo = std::max(t_lo, t);
    }
  }
  if (strictly_inside) return RayHit{0.0, true};
  const double t = std::max(t_lo, 0.0);
  if (t > t_hi + kEps || t > max_range) return std::nullopt;
  return RayHit{t, false};
}

}  // namespace

std::optional<RayHit> ray_hit(const Shape& shape, const Vec2& origin,
                              const Vec2& direction, double max_range) {
  const double dn = direction.norm();
  if (dn < kEps) throw std::invalid_argument("ray direction must be nonzero");
  const Vec2 d = direction / dn;
  return std::visit(
      [&](const auto& s) -> std::optional<RayHit> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return ray_hit_circle(s, origin, d, max_range);
        } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
          return ray_hit_polygon(s, origin, d, max_range);
        } else {
          std::optional<RayHit> best;
          for (const Shape& m : s.members) {
            const auto h = ray_hit(m, origin, d, max_range);
            if (!h) continue;
            if (h->penetration) return RayHit{0.0, true};
            if (!best || h->distance < best->distance) best = h;
          }
          return best;
        }
      },
      shape.value);
}

double circumradius(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return s.center.norm() + s.radius;
        } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
          double r = 0.0;
          for (const Vec2& v : s.vertices) r = std::max(r, v.norm());
          return r;
        } else {
          double r = 0.0;
          for (const Shape& m : s.members) r = std::max(r, circumradius(m));
          return r;
        }
      },
      shape.value);
}

BoundingCircle bounding_circle(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> BoundingCircle {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return {s.center, s.radius};
        } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
          Vec2 c(0.0, 0.0);
          for (const Vec2& v : s.vertices) c += v;
          c /= static_cast<double>(s.vertices.size());
          double r = 0.0;
          for (const Vec2& v : s.vertices) r = std::max(r, (v - c).norm());
          return {c, r};
        } else {
          Vec2 c(0.0, 0.0);
          std::vector<BoundingCircle> parts;
          parts.reserve(s.members.size());
          for (const Shape& m : s.members) {
            parts.push_back(bounding_circle(m));
            c += parts.back().center;
          }
          c /= static_cast<double>(parts.size());
          double r = 0.0;
          for (const BoundingCircle& p : parts) {
            r = std::max(r, (p.center - c).norm() + p.radius);
          }
          return {c, r};
        }
      },
      shape.value);
}

double perimeter(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return 2.0 * M_PI * s.radius;
        } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
          double p = 0.0;
          const std::size_t n = s.vertices.size();
          for (std::size_t i = 0; i < n; ++i) {
            p += (s.vertices[(i + 1) % n] - s.vertices[i]).norm();
          }
          return p;
        } else {
          double p = 0.0;
          for (const Shape& m : s.members) p += perimeter(m);
          return p;
        }
      },
      shape.value);
}

namespace {

void sample_boundary(const Shape& shape, int count, std::vector<Vec2>* out) {
  if (count <= 0) return;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          for (int i = 0; i < count; ++i) {
            const double a = 2.0 * M_PI * i / count;
            out->push_back(s.center + s.radius * Vec2(std::cos(a), std::sin(a)));
          }
        } else if constexpr (std::is_same_v<T, ConvexPolygon>) {
          const std::size_t n = s.vertices.size();
          double total = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            total += (s.vertices[(i + 1) % n] - s.vertices[i]).norm();
          }
          const double step = total / count;
          double along = 0.0;
          std::size_t edge = 0;
          double edge_start = 0.0;
          double edge_len = (s.vertices[1 % n] - s.vertices[0]).norm();
          for (int i = 0; i < count; ++i, along += step) {
            while (along > edge_start + edge_len && edge + 1 < n) {
              edge_start += edge_len;
              ++edge;
              edge_len = (s.vertices[(edge + 1) % n] - s.vertices[edge]).norm();
            }
            const double t = edge_len > 0.0 ? (along - edge_start) / edge_len : 0.0;
            const Vec2& a = s.vertices[edge];
            const Vec2& b = s.vertices[(edge + 1) % n];
            out->push_back(a + std::clamp(t, 0.0, 1.0) * (b - a));
          }
        } else {
          const double total = perimeter(Shape{s});
          int used = 0;
          for (std::size_t i = 0; i < s.members.size(); ++i) {
            int share;
            if (i + 1 == s.members.size()) {
              share = count - used;
            } else {
              share = std::max(
                  1, static_cast<int>(count * perimeter(s.members[i]) / total));
            }
            share = std::min(share, count - used);
            sample_boundary(s.members[i], share, out);
            used += share;
            if (used >= count) break;
          }
        }
      },
      shape.value);
}

}  // namespace

std::vector<Vec2> boundary_points(const Shape& shape, int count) {
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  sample_boundary(shape, count, &out);
  return out;
}

}  // namespace drnav
