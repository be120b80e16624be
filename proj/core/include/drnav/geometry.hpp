#pragma once

#include <Eigen/Core>
#include <optional>
#include <variant>
#include <vector>

namespace drnav {

using Vec2 = Eigen::Vector2d;

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

Eigen::Matrix2d rotation_matrix(double theta);

struct Pose2 {
  Vec2 position{0.0, 0.0};
  double heading = 0.0;

  Eigen::Matrix2d rotation() const { return rotation_matrix(heading); }
  // Maps a world point into this pose's body frame.
  Vec2 to_body(const Vec2& world_point) const;
  Vec2 to_world(const Vec2& body_point) const;
};

struct Circle {
  Vec2 center{0.0, 0.0};
  double radius = 0.0;
};

// Vertices counter-clockwise, strictly convex.
struct ConvexPolygon {
  std::vector<Vec2> vertices;
};

struct Shape;

struct ShapeUnion {
  std::vector<Shape> members;
};

struct Shape {
  std::variant<Circle, ConvexPolygon, ShapeUnion> value;
};

// Rejects non-positive radii, polygons with fewer than 3 vertices or that are
// not strictly convex counter-clockwise, empty unions, non-finite
// coordinates. Throws std::invalid_argument.
void validate_shape(const Shape& shape);

// Exact signed distance for circles and convex polygons; unions take the
// member-wise minimum (exact outside disjoint members).
double sdf_eval(const Shape& shape, const Vec2& point);

struct SdfGradient {
  Vec2 grad{1.0, 0.0};
  // Set when the gradient is not defined at the query (circle center); the
  // returned vector is then the fixed fallback (1, 0).
  bool degenerate = false;
};

// Unit gradient of sdf_eval. On ties (polygon vertices, equidistant union
// members) returns the lowest-index minimizing feature's gradient.
SdfGradient sdf_gradient(const Shape& shape, const Vec2& point);

// Distance from a world point to the robot body placed at `pose`:
// sdf_eval(body, R(pose)^T (point - pose.position)).
double robot_sdf(const Shape& body, const Pose2& pose, const Vec2& world_point);

struct RayHit {
  double distance = 0.0;
  // Origin strictly inside the shape; distance is 0.
  bool penetration = false;
};

// First intersection of origin + t * direction with the shape boundary,
// t in [0, max_range]. Direction need not be normalized (it is internally);
// zero direction throws std::invalid_argument.
std::optional<RayHit> ray_hit(const Shape& shape, const Vec2& origin,
                              const Vec2& direction, double max_range);

// Radius of the smallest origin-centered disc containing the shape.
double circumradius(const Shape& shape);

struct BoundingCircle {
  Vec2 center{0.0, 0.0};
  double radius = 0.0;
};

// Cheap enclosing disc (not minimal) used for broad-phase culling.
BoundingCircle bounding_circle(const Shape& shape);

double perimeter(const Shape& shape);

// Samples `count` points on the shape boundary (body frame), distributed by
// arc length across members. Used for ground-truth collision checks.
std::vector<Vec2> boundary_points(const Shape& shape, int count);

}  // namespace drnav
