#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "drnav/geometry.hpp"
#include "drnav/random.hpp"

using namespace drnav;

namespace {

constexpr double kPi = 3.14159265358979323846;

Shape circle(double cx, double cy, double r) {
  return Shape{Circle{{cx, cy}, r}};
}

Shape unit_square() {
  return Shape{ConvexPolygon{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}};
}

// Distance oracle that never looks at sdf_eval: densely samples the shape
// boundary and takes the minimum point distance, signed by containment.
double brute_force_sdf(const Shape& shape, const Vec2& p, int samples = 200000) {
  const std::vector<Vec2> pts = boundary_points(shape, samples);
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& q : pts) best = std::min(best, (p - q).norm());
  // Containment by separate geometric tests per variant.
  struct Visitor {
    const Vec2& p;
    bool operator()(const Circle& c) const {
      return (p - c.center).norm() < c.radius;
    }
    bool operator()(const ConvexPolygon& poly) const {
      const std::size_t n = poly.vertices.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly.vertices[i];
        const Vec2 b = poly.vertices[(i + 1) % n];
        const Vec2 e = b - a;
        if (e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x()) < 0.0) return false;
      }
      return true;
    }
    bool operator()(const ShapeUnion& u) const {
      for (const Shape& m : u.members) {
        if (std::visit(Visitor{p}, m.value)) return true;
      }
      return false;
    }
  };
  const bool inside = std::visit(Visitor{p}, shape.value);
  return inside ? -best : best;
}

Vec2 finite_difference_gradient(const Shape& shape, const Vec2& p,
                                double step = 1e-5) {
  const double gx =
      (sdf_eval(shape, {p.x() + step, p.y()}) - sdf_eval(shape, {p.x() - step, p.y()})) /
      (2.0 * step);
  const double gy =
      (sdf_eval(shape, {p.x(), p.y() + step}) - sdf_eval(shape, {p.x(), p.y() - step})) /
      (2.0 * step);
  return {gx, gy};
}

Shape random_shape(Rng& rng) {
  const int kind = rng.uniform_int(0, 2);
  if (kind == 0) {
    return circle(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.2, 2.0));
  }
  if (kind == 1) {
    // Random convex polygon: points on an ellipse (strictly convex, ccw).
    const int n = rng.uniform_int(3, 8);
    const double cx = rng.uniform(-3, 3), cy = rng.uniform(-3, 3);
    const double ax = rng.uniform(0.3, 2.0), ay = rng.uniform(0.3, 2.0);
    const double phase = rng.uniform(0, 2 * kPi);
    std::vector<Vec2> v;
    for (int i = 0; i < n; ++i) {
      const double t = phase + 2 * kPi * i / n;
      v.push_back({cx + ax * std::cos(t), cy + ay * std::sin(t)});
    }
    return Shape{ConvexPolygon{v}};
  }
  std::vector<Shape> members;
  const int n = rng.uniform_int(2, 3);
  for (int i = 0; i < n; ++i) {
    members.push_back(
        circle(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.2, 1.5)));
  }
  return Shape{ShapeUnion{members}};
}

}  // namespace

TEST_CASE("angle wrapping maps into (-pi, pi]") {
  CHECK(wrap_angle(0.0) == doctest::Approx(0.0));
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(2 * kPi + 0.25) == doctest::Approx(0.25));
  CHECK(wrap_angle(-7.5 * kPi) == doctest::Approx(0.5 * kPi));
}

TEST_CASE("circle signed distance: outside, center, boundary") {
  const Shape c = circle(0, 0, 1.0);
  CHECK(sdf_eval(c, {2, 0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sdf_eval(c, {0, 0}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(sdf_eval(c, {1, 0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sdf_eval(c, {3, 4}) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("square interior depth matches the boundary-sampling oracle") {
  const Shape sq = unit_square();
  CHECK(sdf_eval(sq, {0.5, 0.5}) == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(sdf_eval(sq, {0.5, 0.5}) ==
        doctest::Approx(brute_force_sdf(sq, {0.5, 0.5})).epsilon(1e-4));
  // Outside a face, outside a corner.
  CHECK(sdf_eval(sq, {2.0, 0.5}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sdf_eval(sq, {2.0, 2.0}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(sdf_eval(sq, {0.25, 0.5}) == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("union takes the member-wise minimum") {
  const Shape u = Shape{ShapeUnion{{circle(0, 0, 1), circle(5, 0, 1)}}};
  CHECK(sdf_eval(u, {2.5, 0}) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(sdf_eval(u, {4.5, 0}) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(sdf_eval(u, {-2, 0}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random shape pairs satisfy the 1-Lipschitz bound") {
  Rng rng(11);
  for (int trial = 0; trial < 400; ++trial) {
    const Shape s = random_shape(rng);
    const Vec2 p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const Vec2 q{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const double lhs = std::abs(sdf_eval(s, p) - sdf_eval(s, q));
    CHECK(lhs <= (p - q).norm() + 1e-9);
  }
}

TEST_CASE("gradients are radial for circles") {
  const Shape c = circle(0, 0, 1.0);
  CHECK(sdf_gradient(c, {2, 0}).grad.x() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sdf_gradient(c, {2, 0}).grad.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sdf_gradient(c, {0, 3}).grad.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sdf_gradient(c, {0, 3}).grad.y() == doctest::Approx(1.0).epsilon(1e-12));
  // Inside points still point away from the center.
  CHECK(sdf_gradient(c, {0.5, 0}).grad.x() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gradient at a circle center falls back to a fixed direction") {
  const SdfGradient g = sdf_gradient(circle(2, 3, 1.0), {2, 3});
  CHECK(g.degenerate);
  CHECK(g.grad.x() == doctest::Approx(1.0));
  CHECK(g.grad.y() == doctest::Approx(0.0));
}

TEST_CASE("square face gradient matches finite differences") {
  const Shape sq = unit_square();
  const SdfGradient g = sdf_gradient(sq, {2, 0.5});
  CHECK(g.grad.x() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.grad.y() == doctest::Approx(0.0).epsilon(1e-12));
  const Vec2 fd = finite_difference_gradient(sq, {2, 0.5});
  CHECK(g.grad.x() == doctest::Approx(fd.x()).epsilon(1e-4));
  CHECK(g.grad.y() == doctest::Approx(fd.y()).epsilon(1e-4));
}

TEST_CASE("random differentiable points: unit norm and finite-difference match") {
  Rng rng(23);
  int checked = 0;
  while (checked < 300) {
    const Shape s = random_shape(rng);
    const Vec2 p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    // Keep clear of nondifferentiable loci: boundary kinks show up as
    // disagreement between one-sided differences along both axes.
    const double step = 1e-3;
    bool smooth = true;
    for (int axis = 0; axis < 2 && smooth; ++axis) {
      const Vec2 e = axis == 0 ? Vec2{step, 0} : Vec2{0, step};
      const double forward = sdf_eval(s, p + e) - sdf_eval(s, p);
      const double backward = sdf_eval(s, p) - sdf_eval(s, p - e);
      if (std::abs(forward - backward) > 1e-7) smooth = false;
    }
    if (!smooth || std::abs(sdf_eval(s, p)) < 1e-3) continue;
    const SdfGradient g = sdf_gradient(s, p);
    if (g.degenerate) continue;
    CHECK(g.grad.norm() == doctest::Approx(1.0).epsilon(1e-6));
    const Vec2 fd = finite_difference_gradient(s, p);
    CHECK(g.grad.x() == doctest::Approx(fd.x()).epsilon(1e-4));
    CHECK(g.grad.y() == doctest::Approx(fd.y()).epsilon(1e-4));
    ++checked;
  }
}

TEST_CASE("body-frame distance applies the rigid transform") {
  // Body circle radius 0.3 at pose ((1,1), pi/2); world point one meter away.
  const Shape body = circle(0, 0, 0.3);
  const Pose2 pose{{1, 1}, kPi / 2};
  CHECK(robot_sdf(body, pose, {1, 2}) == doctest::Approx(0.7).epsilon(1e-12));

  // Identity pose reduces to the plain field.
  const Pose2 ident{};
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Vec2 p{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    CHECK(robot_sdf(body, ident, p) == doctest::Approx(sdf_eval(body, p)).epsilon(1e-12));
  }

  // Centered side-1 square rotated half a turn maps onto itself; the nearest
  // feature to (1.5, 0) is the edge at x = 0.5, one meter away. The
  // corner-anchored square from the helper shifts under the same rotation and
  // ends up with its origin corner closest, 1.5 m away.
  const Shape centered{ConvexPolygon{
      {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}}};
  const Pose2 flipped{{0, 0}, kPi};
  CHECK(robot_sdf(centered, flipped, {1.5, 0}) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(robot_sdf(unit_square(), flipped, {1.5, 0}) ==
        doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("body-frame distance is invariant under the pose transform") {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const Shape s = random_shape(rng);
    const Pose2 pose{{rng.uniform(-2, 2), rng.uniform(-2, 2)}, rng.uniform(-3, 3)};
    const Vec2 p{rng.uniform(-4, 4), rng.uniform(-4, 4)};
    const Vec2 world = pose.to_world(p);
    CHECK(robot_sdf(s, pose, world) == doctest::Approx(sdf_eval(s, p)).epsilon(1e-12));
  }
}

TEST_CASE("ray cast hits the near circle surface") {
  const Shape c = circle(5, 0, 1.0);
  const auto hit = ray_hit(c, {0, 0}, {1, 0}, 10.0);
  REQUIRE(hit.has_value());
  CHECK(hit->distance == doctest::Approx(4.0).epsilon(1e-12));
  CHECK_FALSE(hit->penetration);

  CHECK_FALSE(ray_hit(c, {0, 0}, {0, 1}, 10.0).has_value());
  CHECK_FALSE(ray_hit(c, {0, 0}, {1, 0}, 3.0).has_value());  // out of range
}

TEST_CASE("ray cast hits the square edge found by segment intersection") {
  const Shape sq = unit_square();
  const auto hit = ray_hit(sq, {-1, 0.5}, {1, 0}, 10.0);
  REQUIRE(hit.has_value());
  CHECK(hit->distance == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ray cast from inside flags penetration at zero distance") {
  const auto hit = ray_hit(circle(0, 0, 1.0), {0.2, 0}, {1, 0}, 10.0);
  REQUIRE(hit.has_value());
  CHECK(hit->penetration);
  CHECK(hit->distance == doctest::Approx(0.0));
}

TEST_CASE("ray hits land on the boundary with positive field before them") {
  Rng rng(31);
  int hits = 0;
  while (hits < 150) {
    const Shape s = random_shape(rng);
    const Vec2 origin{rng.uniform(-6, 6), rng.uniform(-6, 6)};
    if (sdf_eval(s, origin) <= 1e-6) continue;
    const double ang = rng.uniform(0, 2 * kPi);
    const Vec2 dir{std::cos(ang), std::sin(ang)};
    const auto hit = ray_hit(s, origin, dir, 12.0);
    if (!hit) continue;
    CHECK(std::abs(sdf_eval(s, origin + hit->distance * dir)) <= 1e-6);
    for (int j = 1; j < 20; ++j) {
      const double t = hit->distance * j / 20.0;
      CHECK(sdf_eval(s, origin + t * dir) > -1e-9);
    }
    ++hits;
  }
}

TEST_CASE("shape validation rejects malformed inputs") {
  CHECK_THROWS_AS(validate_shape(circle(0, 0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(validate_shape(circle(0, 0, -1.0)), std::invalid_argument);
  CHECK_THROWS_AS(validate_shape(Shape{ConvexPolygon{{{0, 0}, {1, 0}}}}),
                  std::invalid_argument);
  // Clockwise winding.
  CHECK_THROWS_AS(validate_shape(Shape{ConvexPolygon{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}}}),
                  std::invalid_argument);
  // Collinear triple is not strictly convex.
  CHECK_THROWS_AS(
      validate_shape(Shape{ConvexPolygon{{{0, 0}, {1, 0}, {2, 0}, {1, 1}}}}),
      std::invalid_argument);
  CHECK_THROWS_AS(validate_shape(Shape{ShapeUnion{{}}}), std::invalid_argument);
  CHECK_NOTHROW(validate_shape(unit_square()));
  CHECK_NOTHROW(validate_shape(Shape{ShapeUnion{{circle(0, 0, 1), unit_square()}}}));
}

TEST_CASE("enclosing radii bound the boundary samples") {
  Rng rng(41);
  for (int i = 0; i < 60; ++i) {
    const Shape s = random_shape(rng);
    const double cr = circumradius(s);
    const BoundingCircle bc = bounding_circle(s);
    for (const Vec2& p : boundary_points(s, 64)) {
      CHECK(p.norm() <= cr + 1e-9);
      CHECK((p - bc.center).norm() <= bc.radius + 1e-9);
    }
  }
}

TEST_CASE("boundary sampling covers the whole perimeter") {
  const Shape sq = unit_square();
  CHECK(perimeter(sq) == doctest::Approx(4.0).epsilon(1e-12));
  const std::vector<Vec2> pts = boundary_points(sq, 400);
  CHECK(pts.size() == 400);
  // Every sample lies on the zero level set; all four edges are represented.
  int on_left = 0, on_right = 0, on_top = 0, on_bottom = 0;
  for (const Vec2& p : pts) {
    CHECK(std::abs(sdf_eval(sq, p)) <= 1e-9);
    if (std::abs(p.x()) < 1e-9) ++on_left;
    if (std::abs(p.x() - 1) < 1e-9) ++on_right;
    if (std::abs(p.y()) < 1e-9) ++on_bottom;
    if (std::abs(p.y() - 1) < 1e-9) ++on_top;
  }
  CHECK(on_left > 50);
  CHECK(on_right > 50);
  CHECK(on_top > 50);
  CHECK(on_bottom > 50);
}
