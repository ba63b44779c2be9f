#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace eotlab {

using Point = std::vector<double>;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Bounded convex region in R^n. Three shapes are supported: axis-aligned
/// boxes (any n), convex polygons given by a vertex list (n = 2) and
/// Euclidean balls (any n). All queries are exact up to a fixed 1e-12
/// absolute tolerance.
class ConvexDomain {
 public:
  static constexpr double kMembershipTol = 1e-12;

  struct Box {
    std::vector<Interval> axes;
  };
  struct Polygon {
    std::vector<Point> vertices;  // counter-clockwise hull order
    // Half-planes normal . z <= offset with unit normals, one per edge.
    std::vector<Point> normals;
    std::vector<double> offsets;
  };
  struct Ball {
    Point center;
    double radius = 1.0;
  };

  static ConvexDomain box(std::vector<Interval> axes);
  /// Vertices in any order; the convex hull is computed. Throws a
  /// degenerate-domain error if the hull has empty interior.
  static ConvexDomain polygon(std::vector<Point> vertices);
  static ConvexDomain ball(Point center, double radius);

  int dimension() const noexcept { return dim_; }
  double diameter() const noexcept { return diameter_; }
  bool contains(std::span<const double> z) const;

  /// Axis-aligned bounding box.
  std::vector<Interval> bounds() const;
  Point centroid() const;

  /// Interior-preserving inset: boxes shrink each interval by `margin` at
  /// both ends; polygons are scaled toward the vertex centroid so every face
  /// moves inward by at least `margin`; balls lose `margin` of radius.
  ConvexDomain shrink(double margin) const;

  /// Points on the boundary useful as worst-case probes (box corners,
  /// polygon vertices, and `extra` evenly spread boundary points).
  std::vector<Point> boundary_samples(int extra) const;

  bool is_box() const noexcept { return std::holds_alternative<Box>(shape_); }
  bool is_polygon() const noexcept { return std::holds_alternative<Polygon>(shape_); }
  bool is_ball() const noexcept { return std::holds_alternative<Ball>(shape_); }
  const Box& as_box() const { return std::get<Box>(shape_); }
  const Polygon& as_polygon() const { return std::get<Polygon>(shape_); }
  const Ball& as_ball() const { return std::get<Ball>(shape_); }

  /// Round-trippable text form, e.g. "box 0 1 0 2".
  std::string describe() const;
  /// Inverse of describe(): "box lo hi [lo hi ...]", "polygon x y x y ...",
  /// "ball c_0 [c_1 ...] r".
  static ConvexDomain parse(const std::string& text);

 private:
  using Shape = std::variant<Box, Polygon, Ball>;
  ConvexDomain(int dim, Shape shape);

  int dim_ = 0;
  Shape shape_;
  double diameter_ = 0.0;
};

double diameter(const ConvexDomain& domain);
ConvexDomain shrink(const ConvexDomain& domain, double margin);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

}  // namespace eotlab
