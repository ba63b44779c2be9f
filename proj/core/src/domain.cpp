#include "eotlab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "eotlab/error.hpp"

namespace eotlab {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; returns the hull counter-clockwise without
// collinear points.
std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

ConvexDomain::ConvexDomain(int dim, Shape shape) : dim_(dim), shape_(std::move(shape)) {
  if (const auto* b = std::get_if<Box>(&shape_)) {
    double s = 0.0;
    for (const auto& iv : b->axes) s += (iv.hi - iv.lo) * (iv.hi - iv.lo);
    diameter_ = std::sqrt(s);
  } else if (const auto* p = std::get_if<Polygon>(&shape_)) {
    for (std::size_t i = 0; i < p->vertices.size(); ++i)
      for (std::size_t j = i + 1; j < p->vertices.size(); ++j)
        diameter_ = std::max(diameter_, distance(p->vertices[i], p->vertices[j]));
  } else {
    diameter_ = 2.0 * std::get<Ball>(shape_).radius;
  }
}

ConvexDomain ConvexDomain::box(std::vector<Interval> axes) {
  if (axes.empty()) throw Error(ErrorKind::DegenerateDomain, "box needs at least one axis");
  for (const auto& iv : axes) {
    if (!(std::isfinite(iv.lo) && std::isfinite(iv.hi) && iv.hi > iv.lo))
      throw Error(ErrorKind::DegenerateDomain, "box interval must satisfy lo < hi");
  }
  const int dim = static_cast<int>(axes.size());
  return ConvexDomain(dim, Box{std::move(axes)});
}

ConvexDomain ConvexDomain::polygon(std::vector<Point> vertices) {
  for (const auto& v : vertices) {
    if (v.size() != 2) throw Error(ErrorKind::Parameter, "polygon vertices must be 2D points");
  }
  auto hull = convex_hull(std::move(vertices));
  if (hull.size() < 3) throw Error(ErrorKind::DegenerateDomain, "polygon hull has empty interior");
  Polygon poly;
  poly.vertices = hull;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point& a = hull[i];
    const Point& b = hull[(i + 1) % hull.size()];
    const double ex = b[0] - a[0];
    const double ey = b[1] - a[1];
    const double len = std::hypot(ex, ey);
    Point n{ey / len, -ex / len};  // outward for CCW order
    poly.offsets.push_back(n[0] * a[0] + n[1] * a[1]);
    poly.normals.push_back(std::move(n));
  }
  return ConvexDomain(2, std::move(poly));
}

ConvexDomain ConvexDomain::ball(Point center, double radius) {
  if (center.empty()) throw Error(ErrorKind::DegenerateDomain, "ball needs a center");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw Error(ErrorKind::DegenerateDomain, "ball radius must be positive");
  const int dim = static_cast<int>(center.size());
  return ConvexDomain(dim, Ball{std::move(center), radius});
}

bool ConvexDomain::contains(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != dim_) return false;
  if (const auto* b = std::get_if<Box>(&shape_)) {
    for (int k = 0; k < dim_; ++k) {
      if (z[k] < b->axes[k].lo - kMembershipTol || z[k] > b->axes[k].hi + kMembershipTol) return false;
    }
    return true;
  }
  if (const auto* p = std::get_if<Polygon>(&shape_)) {
    for (std::size_t f = 0; f < p->normals.size(); ++f) {
      if (dot(p->normals[f], z) > p->offsets[f] + kMembershipTol) return false;
    }
    return true;
  }
  const auto& ball = std::get<Ball>(shape_);
  return distance(ball.center, z) <= ball.radius + kMembershipTol;
}

std::vector<Interval> ConvexDomain::bounds() const {
  if (const auto* b = std::get_if<Box>(&shape_)) return b->axes;
  if (const auto* p = std::get_if<Polygon>(&shape_)) {
    std::vector<Interval> out(2, Interval{INFINITY, -INFINITY});
    for (const auto& v : p->vertices) {
      for (int k = 0; k < 2; ++k) {
        out[k].lo = std::min(out[k].lo, v[k]);
        out[k].hi = std::max(out[k].hi, v[k]);
      }
    }
    return out;
  }
  const auto& ball = std::get<Ball>(shape_);
  std::vector<Interval> out;
  for (double c : ball.center) out.push_back({c - ball.radius, c + ball.radius});
  return out;
}

Point ConvexDomain::centroid() const {
  if (const auto* p = std::get_if<Polygon>(&shape_)) {
    Point c(2, 0.0);
    for (const auto& v : p->vertices) {
      c[0] += v[0];
      c[1] += v[1];
    }
    c[0] /= static_cast<double>(p->vertices.size());
    c[1] /= static_cast<double>(p->vertices.size());
    return c;
  }
  if (const auto* ball = std::get_if<Ball>(&shape_)) return ball->center;
  Point c;
  for (const auto& iv : std::get<Box>(shape_).axes) c.push_back(0.5 * (iv.lo + iv.hi));
  return c;
}

ConvexDomain ConvexDomain::shrink(double margin) const {
  if (!(margin > 0.0) || !(margin < diameter_ / 2.0))
    throw Error(ErrorKind::Parameter, "shrink margin must lie in (0, diameter/2)");
  if (const auto* b = std::get_if<Box>(&shape_)) {
    std::vector<Interval> axes = b->axes;
    for (auto& iv : axes) {
      iv.lo += margin;
      iv.hi -= margin;
      if (!(iv.hi > iv.lo)) throw Error(ErrorKind::MarginTooLarge, "shrunken box has empty interior");
    }
    return box(std::move(axes));
  }
  if (const auto* p = std::get_if<Polygon>(&shape_)) {
    const Point c = centroid();
    double min_face = INFINITY;
    for (std::size_t f = 0; f < p->normals.size(); ++f)
      min_face = std::min(min_face, p->offsets[f] - dot(p->normals[f], c));
    const double scale = 1.0 - margin / min_face;
    if (!(scale > 0.0)) throw Error(ErrorKind::MarginTooLarge, "shrunken polygon has empty interior");
    std::vector<Point> verts;
    for (const auto& v : p->vertices) verts.push_back({c[0] + scale * (v[0] - c[0]), c[1] + scale * (v[1] - c[1])});
    return polygon(std::move(verts));
  }
  const auto& ball = std::get<Ball>(shape_);
  if (!(ball.radius - margin > 0.0)) throw Error(ErrorKind::MarginTooLarge, "shrunken ball is empty");
  return ConvexDomain::ball(ball.center, ball.radius - margin);
}

std::vector<Point> ConvexDomain::boundary_samples(int extra) const {
  std::vector<Point> out;
  if (const auto* b = std::get_if<Box>(&shape_)) {
    const std::size_t corners = std::size_t{1} << dim_;
    for (std::size_t mask = 0; mask < corners; ++mask) {
      Point z(dim_);
      for (int k = 0; k < dim_; ++k) z[k] = (mask >> k) & 1U ? b->axes[k].hi : b->axes[k].lo;
      out.push_back(std::move(z));
    }
    // Face midpoints along the first axis pair, then points along edges.
    for (int e = 0; e < extra; ++e) {
      Point z(dim_);
      const double t = (e + 0.5) / extra;
      for (int k = 0; k < dim_; ++k) z[k] = b->axes[k].lo + t * (b->axes[k].hi - b->axes[k].lo);
      z[e % dim_] = (e / dim_) % 2 == 0 ? b->axes[e % dim_].lo : b->axes[e % dim_].hi;
      out.push_back(std::move(z));
    }
    return out;
  }
  if (const auto* p = std::get_if<Polygon>(&shape_)) {
    out = p->vertices;
    const std::size_t nv = p->vertices.size();
    for (int e = 0; e < extra; ++e) {
      const std::size_t f = static_cast<std::size_t>(e) % nv;
      const double t = (static_cast<double>(e / static_cast<int>(nv)) + 0.5) /
                       std::max(1.0, std::ceil(static_cast<double>(extra) / static_cast<double>(nv)));
      const Point& a = p->vertices[f];
      const Point& b = p->vertices[(f + 1) % nv];
      out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
    }
    return out;
  }
  const auto& ball = std::get<Ball>(shape_);
  const int count = std::max(extra, 2);
  for (int e = 0; e < count; ++e) {
    Point z = ball.center;
    if (dim_ == 1) {
      z[0] += (e % 2 == 0 ? -1.0 : 1.0) * ball.radius;
    } else {
      const double theta = 2.0 * std::numbers::pi * e / count;
      z[0] += ball.radius * std::cos(theta);
      z[1] += ball.radius * std::sin(theta);
    }
    out.push_back(std::move(z));
  }
  return out;
}

std::string ConvexDomain::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* b = std::get_if<Box>(&shape_)) {
    os << "box";
    for (const auto& iv : b->axes) os << ' ' << iv.lo << ' ' << iv.hi;
  } else if (const auto* p = std::get_if<Polygon>(&shape_)) {
    os << "polygon";
    for (const auto& v : p->vertices) os << ' ' << v[0] << ' ' << v[1];
  } else {
    const auto& ball = std::get<Ball>(shape_);
    os << "ball";
    for (double c : ball.center) os << ' ' << c;
    os << ' ' << ball.radius;
  }
  return os.str();
}

ConvexDomain ConvexDomain::parse(const std::string& text) {
  std::istringstream is(text);
  std::string kind;
  is >> kind;
  std::vector<double> nums;
  std::string tok;
  while (is >> tok) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw Error(ErrorKind::Parameter, "bad number '" + tok + "' in domain '" + text + "'");
    nums.push_back(x);
  }
  if (kind == "box") {
    if (nums.empty() || nums.size() % 2 != 0) throw Error(ErrorKind::Parameter, "box needs lo hi pairs");
    std::vector<Interval> axes;
    for (std::size_t k = 0; k < nums.size(); k += 2) axes.push_back({nums[k], nums[k + 1]});
    return box(std::move(axes));
  }
  if (kind == "polygon") {
    if (nums.size() < 6 || nums.size() % 2 != 0) throw Error(ErrorKind::Parameter, "polygon needs at least 3 x y vertices");
    std::vector<Point> vertices;
    for (std::size_t k = 0; k < nums.size(); k += 2) vertices.push_back({nums[k], nums[k + 1]});
    return polygon(std::move(vertices));
  }
  if (kind == "ball") {
    if (nums.size() < 2) throw Error(ErrorKind::Parameter, "ball needs a center and a radius");
    const double r = nums.back();
    nums.pop_back();
    return ball(std::move(nums), r);
  }
  throw Error(ErrorKind::Parameter, "unknown domain kind '" + kind + "'");
}

double diameter(const ConvexDomain& domain) { return domain.diameter(); }

ConvexDomain shrink(const ConvexDomain& domain, double margin) { return domain.shrink(margin); }

}  // namespace eotlab
