#pragma once

#include "parakon/errors.hpp"
#include "parakon/linalg.hpp"
#include "parakon/means.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace parakon {

using Point2 = Eigen::Vector2d;

struct Interval {
  double a = 0.0;
  double b = 1.0;
};

/// Strictly convex polygon, vertices in counter-clockwise order.
struct ConvexPolygon {
  std::vector<Point2> vertices;
};

enum class NodeKind : std::uint8_t { outside = 0, interior = 1, boundary = 2 };

/// Node grid x_{ij} = origin + (i h, j h). Interior nodes carry unknowns;
/// boundary nodes are the Dirichlet-flagged neighbours of interior nodes.
/// In 1D, ny == 1 and only the first coordinate is used.
struct Raster {
  int dim = 1;
  int nx = 0;
  int ny = 1;
  double h = 0.0;
  Point2 origin = Point2::Zero();
  std::vector<NodeKind> kind;

  std::size_t size() const noexcept { return kind.size(); }
  std::size_t index(int i, int j = 0) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(i);
  }
  int ix(std::size_t node) const noexcept { return static_cast<int>(node % static_cast<std::size_t>(nx)); }
  int jy(std::size_t node) const noexcept { return static_cast<int>(node / static_cast<std::size_t>(nx)); }

  Vec position(std::size_t node) const {
    Vec x(dim);
    x(0) = origin.x() + h * ix(node);
    if (dim == 2) x(1) = origin.y() + h * jy(node);
    return x;
  }
  bool in_range(int i, int j) const noexcept { return i >= 0 && i < nx && j >= 0 && j < ny; }
  NodeKind at(int i, int j) const noexcept {
    return in_range(i, j) ? kind[index(i, j)] : NodeKind::outside;
  }
  bool is_interior(std::size_t node) const noexcept { return kind[node] == NodeKind::interior; }

  std::size_t interior_count() const {
    return static_cast<std::size_t>(std::count(kind.begin(), kind.end(), NodeKind::interior));
  }
  /// Union of the cells (side h) of interior nodes: length in 1D, area in 2D.
  double measure() const {
    return static_cast<double>(interior_count()) * (dim == 2 ? h * h : h);
  }
  bool same_grid(const Raster& o, double tol = 1e-12) const {
    return dim == o.dim && nx == o.nx && ny == o.ny && std::abs(h - o.h) <= tol &&
           (origin - o.origin).norm() <= tol;
  }

  /// Marks as boundary every non-interior node that touches an interior one
  /// through the 9-point (3-point in 1D) stencil.
  void flag_boundary() {
    for (auto& k : kind)
      if (k == NodeKind::boundary) k = NodeKind::outside;
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        if (kind[index(i, j)] != NodeKind::interior) continue;
        for (int dj = (dim == 2 ? -1 : 0); dj <= (dim == 2 ? 1 : 0); ++dj) {
          for (int di = -1; di <= 1; ++di) {
            if (!in_range(i + di, j + dj)) continue;
            auto& k = kind[index(i + di, j + dj)];
            if (k == NodeKind::outside) k = NodeKind::boundary;
          }
        }
      }
    }
  }
};

enum class Location { interior, boundary, outside };

inline const char* to_string(Location l) {
  switch (l) {
    case Location::interior: return "interior";
    case Location::boundary: return "boundary";
    case Location::outside: return "outside";
  }
  return "?";
}

namespace detail {

inline double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline bool strictly_convex_ccw(const std::vector<Point2>& v) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % n];
    const Point2& c = v[(i + 2) % n];
    if (!(cross(b - a, c - b) > 0.0)) return false;
  }
  // Total turning of 2π rules out star-shaped self-intersections.
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e0 = v[(i + 1) % n] - v[i];
    const Point2 e1 = v[(i + 2) % n] - v[(i + 1) % n];
    turning += std::atan2(cross(e0, e1), e0.dot(e1));
  }
  return std::abs(turning - 2.0 * M_PI) < 1e-6;
}

inline double segment_distance(const Point2& x, const Point2& a, const Point2& b) {
  const Point2 d = b - a;
  const double len2 = d.squaredNorm();
  double s = len2 > 0.0 ? (x - a).dot(d) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (x - (a + s * d)).norm();
}

inline bool inside_polygon_closed(const ConvexPolygon& poly, const Point2& x) {
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 e = v[(i + 1) % v.size()] - v[i];
    if (cross(e, x - v[i]) < 0.0) return false;
  }
  return true;
}

/// Ray-casting test for a general simple polygon.
inline bool inside_simple_polygon(const std::vector<Point2>& v, const Point2& x) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y() > x.y()) != (v[j].y() > x.y())) {
      const double xc =
          v[j].x() + (x.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
      if (x.x() < xc) inside = !inside;
    }
  }
  return inside;
}

inline double polygon_area(const std::vector<Point2>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * s;
}

inline Point2 as_point2(const Vec& x) {
  return x.size() >= 2 ? Point2(x(0), x(1)) : Point2(x(0), 0.0);
}

}  // namespace detail

/// Bounded region in 1D (interval) or 2D (convex polygon or raster mask).
class Domain {
 public:
  using Shape = std::variant<Interval, ConvexPolygon, Raster>;

  static Domain interval(double a, double b) {
    if (!(a < b)) throw domain_error("interval requires a < b");
    return Domain(Interval{a, b});
  }

  static Domain polygon(std::vector<Point2> vertices) {
    if (!detail::strictly_convex_ccw(vertices))
      throw domain_error("polygon vertices are not strictly convex in CCW order");
    return Domain(ConvexPolygon{std::move(vertices)});
  }

  static Domain rectangle(double x0, double y0, double x1, double y1) {
    if (!(x0 < x1 && y0 < y1)) throw domain_error("rectangle requires x0 < x1, y0 < y1");
    return polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
  }

  static Domain unit_square() { return rectangle(0.0, 0.0, 1.0, 1.0); }

  static Domain raster(Raster r) {
    if (r.interior_count() == 0) throw domain_error("raster has no interior node");
    if (!(r.h > 0.0)) throw domain_error("raster cell size must be positive");
    r.flag_boundary();
    return Domain(std::move(r));
  }

  /// Convex CCW input becomes an exact polygon; anything else (non-convex,
  /// clockwise, self-touching) is rasterized at `fallback_h`.
  static Domain from_vertices(std::vector<Point2> vertices, double fallback_h);

  int dim() const {
    if (std::holds_alternative<Interval>(shape_)) return 1;
    if (std::holds_alternative<ConvexPolygon>(shape_)) return 2;
    return std::get<Raster>(shape_).dim;
  }
  const Shape& shape() const noexcept { return shape_; }
  bool is_interval() const noexcept { return std::holds_alternative<Interval>(shape_); }
  bool is_polygon() const noexcept { return std::holds_alternative<ConvexPolygon>(shape_); }
  bool is_raster() const noexcept { return std::holds_alternative<Raster>(shape_); }
  const Interval& as_interval() const { return std::get<Interval>(shape_); }
  const ConvexPolygon& as_polygon() const { return std::get<ConvexPolygon>(shape_); }
  const Raster& as_raster() const { return std::get<Raster>(shape_); }

  /// Axis-aligned bounding box (lo, hi); 1D boxes use the first coordinate.
  std::pair<Point2, Point2> bounding_box() const {
    if (is_interval()) {
      return {Point2(as_interval().a, 0.0), Point2(as_interval().b, 0.0)};
    }
    if (is_polygon()) {
      Point2 lo = as_polygon().vertices.front(), hi = lo;
      for (const auto& v : as_polygon().vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
      return {lo, hi};
    }
    const Raster& r = as_raster();
    Point2 lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
    Point2 hi = -lo;
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r.kind[k] != NodeKind::interior) continue;
      const Point2 p = detail::as_point2(r.position(k));
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const double half = 0.5 * r.h;
    lo.x() -= half;
    hi.x() += half;
    if (r.dim == 2) {
      lo.y() -= half;
      hi.y() += half;
    } else {
      lo.y() = hi.y() = 0.0;
    }
    return {lo, hi};
  }

  double diameter() const {
    auto [lo, hi] = bounding_box();
    if (is_polygon()) {
      double d = 0.0;
      for (const auto& a : as_polygon().vertices)
        for (const auto& b : as_polygon().vertices) d = std::max(d, (a - b).norm());
      return d;
    }
    return (hi - lo).norm();
  }

  /// Length (1D) or area (2D).
  double measure() const {
    if (is_interval()) return as_interval().b - as_interval().a;
    if (is_polygon()) return detail::polygon_area(as_polygon().vertices);
    return as_raster().measure();
  }

  /// Width of the boundary band used when no tolerance is given.
  double default_tolerance() const { return is_raster() ? 0.5 * as_raster().h : 1e-9; }

 private:
  explicit Domain(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

struct BoundaryPoint {
  Vec x;
  Vec normal;  ///< inward unit normal on the boundary, zero vector inside
  double dist = 0.0;
};

namespace detail {

/// Distance from x to the boundary of the union of interior cells, and
/// whether x lies in that union.
inline std::pair<double, bool> raster_boundary_distance(const Raster& r, const Vec& xv) {
  const Point2 x = as_point2(xv);
  const double half = 0.5 * r.h;
  auto cell_distance = [&](std::size_t k) {
    const Point2 c = as_point2(r.position(k));
    Point2 d = (x - c).cwiseAbs() - Point2(half, r.dim == 2 ? half : -1.0);
    if (r.dim == 1) d.y() = 0.0;
    return d.cwiseMax(0.0).norm();
  };
  const int ci = static_cast<int>(std::floor((x.x() - r.origin.x()) / r.h + 0.5));
  const int cj = r.dim == 2 ? static_cast<int>(std::floor((x.y() - r.origin.y()) / r.h + 0.5)) : 0;
  const bool inside = r.at(ci, cj) == NodeKind::interior;
  double best = std::numeric_limits<double>::infinity();
  // Cells outside the node grid count as exterior.
  if (inside) {
    auto [lo, hi] = std::pair<Point2, Point2>(r.origin - Point2(half, half),
                                              r.origin + Point2((r.nx - 1) * r.h + half,
                                                                (r.ny - 1) * r.h + half));
    best = std::min({x.x() - lo.x(), hi.x() - x.x()});
    if (r.dim == 2) best = std::min({best, x.y() - lo.y(), hi.y() - x.y()});
  }
  for (std::size_t k = 0; k < r.size(); ++k) {
    const bool interior = r.kind[k] == NodeKind::interior;
    if (interior == inside) continue;
    best = std::min(best, cell_distance(k));
  }
  return {best, inside};
}

}  // namespace detail

/// Classifies x as interior, boundary (within `tol` of ∂Ω) or outside.
/// A negative tol selects the domain's default band.
inline Location contains(const Domain& omega, const Vec& x, double tol = -1.0) {
  if (tol < 0.0) tol = omega.default_tolerance();
  if (x.size() < omega.dim()) throw usage_error("contains: point dimension too small");
  if (omega.is_interval()) {
    const auto& iv = omega.as_interval();
    const double d = std::min(x(0) - iv.a, iv.b - x(0));
    if (std::abs(d) <= tol) return Location::boundary;
    return d > 0.0 ? Location::interior : Location::outside;
  }
  if (omega.is_polygon()) {
    const auto& v = omega.as_polygon().vertices;
    const Point2 p = detail::as_point2(x);
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i)
      dist = std::min(dist, detail::segment_distance(p, v[i], v[(i + 1) % v.size()]));
    if (dist <= tol) return Location::boundary;
    return detail::inside_polygon_closed(omega.as_polygon(), p) ? Location::interior
                                                                 : Location::outside;
  }
  auto [dist, inside] = detail::raster_boundary_distance(omega.as_raster(), x);
  if (dist <= tol) return Location::boundary;
  return inside ? Location::interior : Location::outside;
}

/// ν̃(x) and the distance to ∂Ω. Points within the boundary band are snapped
/// to dist = 0 and get the inward normal; polygon vertices use the bisector
/// of the two adjacent edge normals.
inline BoundaryPoint normal_ext(const Domain& omega, const Vec& x) {
  const int n = omega.dim();
  const Location loc = contains(omega, x);
  if (loc == Location::outside) throw domain_error("normal_ext: point " + to_string(x) + " outside closure");
  BoundaryPoint bp{x.head(n), Vec::Zero(n), 0.0};
  const double tol = omega.default_tolerance();
  if (omega.is_interval()) {
    const auto& iv = omega.as_interval();
    const double da = x(0) - iv.a, db = iv.b - x(0);
    if (loc == Location::boundary) {
      bp.normal(0) = da <= db ? 1.0 : -1.0;
    } else {
      bp.dist = std::min(da, db);
    }
    return bp;
  }
  if (omega.is_polygon()) {
    const auto& v = omega.as_polygon().vertices;
    const Point2 p = detail::as_point2(x);
    double dist = std::numeric_limits<double>::infinity();
    Point2 normal_sum = Point2::Zero();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point2& a = v[i];
      const Point2& b = v[(i + 1) % v.size()];
      const double d = detail::segment_distance(p, a, b);
      dist = std::min(dist, d);
      if (d <= tol) {
        const Point2 e = (b - a).normalized();
        normal_sum += Point2(-e.y(), e.x());
      }
    }
    if (loc == Location::boundary) {
      const Point2 nu = normal_sum.normalized();
      bp.normal(0) = nu.x();
      bp.normal(1) = nu.y();
    } else {
      bp.dist = dist;
    }
    return bp;
  }
  const Raster& r = omega.as_raster();
  if (loc == Location::boundary) {
    // Inward direction: average offset towards nearby interior nodes.
    Point2 acc = Point2::Zero();
    const Point2 p = detail::as_point2(x);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r.kind[k] != NodeKind::interior) continue;
      const Point2 c = detail::as_point2(r.position(k));
      if ((c - p).norm() <= 1.5 * r.h) acc += c - p;
    }
    if (acc.norm() == 0.0) throw domain_error("normal_ext: no interior node near raster boundary point");
    acc.normalize();
    bp.normal(0) = acc.x();
    if (n == 2) bp.normal(1) = acc.y();
  } else {
    bp.dist = detail::raster_boundary_distance(r, x).first;
  }
  return bp;
}

/// Node raster of Ω with spacing h; node positions start at the lower corner
/// of the bounding box. Throws if no node lands strictly inside.
inline Raster rasterize(const Domain& omega, double h) {
  if (!(h > 0.0)) throw usage_error("rasterize: h must be positive");
  if (omega.is_raster() && std::abs(omega.as_raster().h - h) <= 1e-14) return omega.as_raster();
  auto [lo, hi] = omega.bounding_box();
  Raster r;
  r.dim = omega.dim();
  r.h = h;
  r.origin = lo;
  r.nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / h - 1e-9)) + 1;
  r.ny = r.dim == 2 ? static_cast<int>(std::ceil((hi.y() - lo.y()) / h - 1e-9)) + 1 : 1;
  r.kind.assign(static_cast<std::size_t>(r.nx) * static_cast<std::size_t>(r.ny), NodeKind::outside);
  const double tol = omega.is_raster() ? 0.0 : 1e-9;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const Location loc = contains(omega, r.position(k), tol);
    if (loc == Location::interior) r.kind[k] = NodeKind::interior;
  }
  if (r.interior_count() == 0)
    throw usage_error("rasterize: h = " + std::to_string(h) + " too coarse, no interior node");
  r.flag_boundary();
  // Nodes sitting on the exact boundary are Dirichlet nodes even when they are
  // not stencil neighbours of an interior node.
  if (!omega.is_raster()) {
    for (std::size_t k = 0; k < r.size(); ++k)
      if (r.kind[k] == NodeKind::outside && contains(omega, r.position(k), tol) == Location::boundary)
        r.kind[k] = NodeKind::boundary;
  }
  return r;
}

inline Domain Domain::from_vertices(std::vector<Point2> vertices, double fallback_h) {
  if (detail::strictly_convex_ccw(vertices)) return polygon(std::move(vertices));
  if (vertices.size() < 3) throw domain_error("polygon needs at least three vertices");
  Point2 lo = vertices.front(), hi = lo;
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  Raster r;
  r.dim = 2;
  r.h = fallback_h;
  r.origin = lo;
  r.nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / fallback_h - 1e-9)) + 1;
  r.ny = static_cast<int>(std::ceil((hi.y() - lo.y()) / fallback_h - 1e-9)) + 1;
  r.kind.assign(static_cast<std::size_t>(r.nx) * static_cast<std::size_t>(r.ny), NodeKind::outside);
  for (std::size_t k = 0; k < r.size(); ++k)
    if (detail::inside_simple_polygon(vertices, detail::as_point2(r.position(k))))
      r.kind[k] = NodeKind::interior;
  return raster(std::move(r));
}

namespace detail {

inline ConvexPolygon minkowski_polygons(std::span<const Domain> domains, const Weights& w) {
  // Scaled edge merge: start at the sum of the lowest (then leftmost)
  // vertices and walk all edges sorted by polar angle.
  struct Edge {
    double angle;
    Point2 d;
  };
  std::vector<Edge> edges;
  Point2 start = Point2::Zero();
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const auto& v = domains[i].as_polygon().vertices;
    std::size_t low = 0;
    for (std::size_t k = 1; k < v.size(); ++k) {
      if (v[k].y() < v[low].y() || (v[k].y() == v[low].y() && v[k].x() < v[low].x())) low = k;
    }
    start += w[i] * v[low];
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::size_t a = (low + k) % v.size();
      const Point2 d = w[i] * (v[(a + 1) % v.size()] - v[a]);
      double ang = std::atan2(d.y(), d.x());
      if (ang < 0.0) ang += 2.0 * M_PI;
      // The first edge out of the lowest-leftmost vertex has angle in [0, π).
      edges.push_back({ang, d});
    }
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& a, const Edge& b) { return a.angle < b.angle; });
  ConvexPolygon out;
  Point2 cur = start;
  std::vector<Point2> merged;
  for (std::size_t k = 0; k < edges.size();) {
    Point2 d = edges[k].d;
    std::size_t j = k + 1;
    while (j < edges.size() && std::abs(edges[j].angle - edges[k].angle) < 1e-12) d += edges[j++].d;
    merged.push_back(d);
    k = j;
  }
  for (const Point2& d : merged) {
    out.vertices.push_back(cur);
    cur += d;
  }
  return out;
}

/// Brute-force dilation of two rasters with weights (wa, wb) onto a grid of
/// spacing h: each weighted sum of interior nodes marks its nearest node.
inline Raster dilate_pair(const Raster& a, double wa, const Raster& b, double wb, double h) {
  Raster out;
  out.dim = a.dim;
  out.h = h;
  const Point2 a_hi = a.origin + Point2((a.nx - 1) * a.h, (a.ny - 1) * a.h);
  const Point2 b_hi = b.origin + Point2((b.nx - 1) * b.h, (b.ny - 1) * b.h);
  const Point2 lo = wa * a.origin + wb * b.origin;
  const Point2 hi = wa * a_hi + wb * b_hi;
  out.origin = lo;
  out.nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / h - 1e-9)) + 1;
  out.ny = a.dim == 2 ? static_cast<int>(std::ceil((hi.y() - lo.y()) / h - 1e-9)) + 1 : 1;
  out.kind.assign(static_cast<std::size_t>(out.nx) * static_cast<std::size_t>(out.ny),
                  NodeKind::outside);
  std::vector<Point2> pb;
  for (std::size_t k = 0; k < b.size(); ++k)
    if (b.kind[k] == NodeKind::interior) pb.push_back(as_point2(b.position(k)));
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a.kind[k] != NodeKind::interior) continue;
    const Point2 pa = wa * as_point2(a.position(k));
    for (const Point2& q : pb) {
      const Point2 s = pa + wb * q;
      const int i = static_cast<int>(std::lround((s.x() - lo.x()) / h));
      const int j = a.dim == 2 ? static_cast<int>(std::lround((s.y() - lo.y()) / h)) : 0;
      if (out.in_range(i, j)) out.kind[out.index(i, j)] = NodeKind::interior;
    }
  }
  out.flag_boundary();
  return out;
}

}  // namespace detail

/// The Minkowski combination Σ λ_i Ω_i. Exact for intervals and convex
/// polygons; rasters (and mixtures) fall back to brute-force dilation at the
/// finest input resolution.
inline Domain minkowski_combination(std::span<const Domain> domains, const Weights& w) {
  if (domains.size() != w.size()) throw usage_error("minkowski_combination: domain/weight count mismatch");
  const int dim = domains.front().dim();
  for (const auto& d : domains)
    if (d.dim() != dim) throw usage_error("minkowski_combination: dimension mismatch");
  const bool all_intervals = std::all_of(domains.begin(), domains.end(), [](const Domain& d) { return d.is_interval(); });
  if (all_intervals) {
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < domains.size(); ++i) {
      a += w[i] * domains[i].as_interval().a;
      b += w[i] * domains[i].as_interval().b;
    }
    return Domain::interval(a, b);
  }
  const bool all_polygons = std::all_of(domains.begin(), domains.end(), [](const Domain& d) { return d.is_polygon(); });
  if (all_polygons) return Domain::polygon(detail::minkowski_polygons(domains, w).vertices);

  double h = std::numeric_limits<double>::infinity();
  for (const auto& d : domains)
    if (d.is_raster()) h = std::min(h, d.as_raster().h);
  Raster acc = rasterize(domains[0], h);
  double acc_weight = w[0];
  for (std::size_t i = 1; i < domains.size(); ++i) {
    const double total = acc_weight + w[i];
    acc = detail::dilate_pair(acc, acc_weight / total, rasterize(domains[i], h), w[i] / total, h);
    acc_weight = total;
  }
  return Domain::raster(std::move(acc));
}

inline Domain minkowski_combination(std::initializer_list<Domain> domains, const Weights& w) {
  std::vector<Domain> v(domains);
  return minkowski_combination(std::span<const Domain>(v), w);
}

/// Reads "x y" vertex lines; blank lines and '#' comments are skipped.
inline std::vector<Point2> read_polygon(std::istream& in) {
  std::vector<Point2> v;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double x = 0.0, y = 0.0;
    if (!(ls >> x)) continue;
    if (!(ls >> y)) throw usage_error("polygon line " + std::to_string(line_no) + ": expected 'x y'");
    v.emplace_back(x, y);
  }
  return v;
}

inline void write_polygon(const ConvexPolygon& poly, std::ostream& out) {
  out.precision(17);
  for (const auto& v : poly.vertices) out << v.x() << ' ' << v.y() << '\n';
}

/// Plain PGM (P2): outside = 0, boundary = 128, interior = 255; top row is
/// the largest y.
inline void write_pgm(const Raster& r, std::ostream& out) {
  out << "P2\n" << r.nx << ' ' << r.ny << "\n255\n";
  for (int j = r.ny - 1; j >= 0; --j) {
    for (int i = 0; i < r.nx; ++i) {
      const NodeKind k = r.kind[r.index(i, j)];
      out << (k == NodeKind::interior ? 255 : k == NodeKind::boundary ? 128 : 0)
          << (i + 1 < r.nx ? ' ' : '\n');
    }
  }
}

}  // namespace parakon
