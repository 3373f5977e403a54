#include "parakon/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace parakon;

namespace {

// Strictly convex CCW polygon: sorted random angles on a random ellipse.
std::vector<Point2> random_convex(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(3, 8);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI), ax(0.3, 1.5), c(-1.0, 1.0);
  const int n = count(rng);
  std::vector<double> t;
  while (static_cast<int>(t.size()) < n) {
    const double a = ang(rng);
    bool ok = true;
    for (double b : t) ok = ok && std::abs(std::remainder(a - b, 2.0 * M_PI)) > 0.2;
    if (ok) t.push_back(a);
  }
  std::sort(t.begin(), t.end());
  const double rx = ax(rng), ry = ax(rng), cx = c(rng), cy = c(rng);
  std::vector<Point2> v;
  for (double a : t) v.emplace_back(cx + rx * std::cos(a), cy + ry * std::sin(a));
  return v;
}

Domain rotated_unit_square() {
  const double s = std::sqrt(0.5);
  return Domain::polygon({{0.5, 0.5 - s}, {0.5 + s, 0.5}, {0.5, 0.5 + s}, {0.5 - s, 0.5}});
}

// Points of a polygon sampled on a grid of spacing d (plus its vertices).
std::vector<Point2> sample_polygon(const Domain& d, double step) {
  std::vector<Point2> out(d.as_polygon().vertices);
  auto [lo, hi] = d.bounding_box();
  for (double x = lo.x(); x <= hi.x() + 1e-12; x += step)
    for (double y = lo.y(); y <= hi.y() + 1e-12; y += step)
      if (contains(d, make_vec({x, y})) != Location::outside) out.emplace_back(x, y);
  return out;
}

}  // namespace

TEST(Domain, ShapeInvariants) {
  EXPECT_THROW(Domain::interval(1.0, 0.0), domain_error);
  EXPECT_THROW(Domain::interval(1.0, 1.0), domain_error);
  EXPECT_THROW(Domain::polygon({{0, 0}, {0, 1}, {1, 1}, {1, 0}}), domain_error);  // clockwise
  EXPECT_THROW(Domain::polygon({{0, 0}, {1, 0}, {2, 0}, {1, 1}}), domain_error);  // collinear
  EXPECT_THROW(Domain::polygon({{0, 0}, {1, 0}}), domain_error);
  EXPECT_NO_THROW(Domain::unit_square());
  EXPECT_DOUBLE_EQ(Domain::unit_square().measure(), 1.0);
  EXPECT_DOUBLE_EQ(rotated_unit_square().measure(), 1.0);
}

TEST(Domain, NonConvexVerticesFallBackToRaster) {
  const std::vector<Point2> L{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  const Domain d = Domain::from_vertices(L, 0.05);
  ASSERT_TRUE(d.is_raster());
  EXPECT_EQ(contains(d, make_vec({0.5, 1.5})), Location::interior);
  EXPECT_EQ(contains(d, make_vec({1.5, 1.5})), Location::outside);
  EXPECT_NEAR(d.measure(), 3.0, 0.2);
  EXPECT_TRUE(Domain::from_vertices({{0, 0}, {1, 0}, {0, 1}}, 0.1).is_polygon());
}

TEST(Minkowski, IntervalExamples) {
  const Weights half = Weights::pair(0.5);
  auto d = minkowski_combination({Domain::interval(0, 1), Domain::interval(0, 1)}, half);
  ASSERT_TRUE(d.is_interval());
  EXPECT_DOUBLE_EQ(d.as_interval().a, 0.0);
  EXPECT_DOUBLE_EQ(d.as_interval().b, 1.0);
  d = minkowski_combination({Domain::interval(0, 1), Domain::interval(2, 4)}, half);
  EXPECT_DOUBLE_EQ(d.as_interval().a, 1.0);
  EXPECT_DOUBLE_EQ(d.as_interval().b, 2.5);
}

TEST(Minkowski, Errors) {
  EXPECT_THROW(minkowski_combination({Domain::interval(0, 1), Domain::unit_square()}, Weights::pair(0.5)), usage_error);
  EXPECT_THROW(minkowski_combination({Domain::interval(0, 1)}, Weights::pair(0.5)), usage_error);
}

TEST(Minkowski, SquarePlusRotatedSquareIsOctagon) {
  const Domain a = Domain::unit_square(), b = rotated_unit_square();
  const Weights half = Weights::pair(0.5);
  const Domain oct = minkowski_combination({a, b}, half);
  ASSERT_TRUE(oct.is_polygon());
  EXPECT_EQ(oct.as_polygon().vertices.size(), 8u);

  // Brute force: all weighted sums of sampled points.
  const double step = 0.05;
  const auto pa = sample_polygon(a, step), pb = sample_polygon(b, step);
  std::vector<Point2> sums;
  for (const auto& x : pa)
    for (const auto& y : pb) sums.push_back(0.5 * x + 0.5 * y);
  // Every sum lies in the octagon.
  for (const auto& s : sums) EXPECT_NE(contains(oct, make_vec({s.x(), s.y()}), 1e-9), Location::outside);
  // Every octagon point is within the sampling resolution of a sum.
  for (const auto& q : sample_polygon(oct, 0.07)) {
    double best = 1e9;
    for (const auto& s : sums) best = std::min(best, (s - q).norm());
    EXPECT_LE(best, step);
  }
}

TEST(Minkowski, OctagonRasterArea) {
  const Domain oct = minkowski_combination({Domain::unit_square(), rotated_unit_square()}, Weights::pair(0.5));
  // Shoelace oracle written out independently of the library helper.
  const auto& v = oct.as_polygon().vertices;
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  const double area = 0.5 * twice;
  // Mixed area of the two unit squares: (1 + 1 + 2·V(a,b))/4 with V = √2.
  EXPECT_NEAR(area, (2.0 + 2.0 * std::sqrt(2.0)) / 4.0, 1e-12);
  const Raster r = rasterize(oct, 0.05);
  EXPECT_NEAR(r.measure(), area, 0.02 * area);
}

TEST(Minkowski, ContainsTheDomainAndAllVertexSums) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> wd(0.1, 0.9);
  for (int s = 0; s < 200; ++s) {
    const Domain d1 = Domain::polygon(random_convex(rng));
    const Domain d2 = Domain::polygon(random_convex(rng));
    const Weights w = Weights::pair(wd(rng));
    // Convex Ω is Minkowski-stable: same area, same vertex set.
    const Domain self = minkowski_combination({d1, d1}, w);
    EXPECT_NEAR(self.measure(), d1.measure(), 1e-10);
    for (const auto& v : d1.as_polygon().vertices)
      EXPECT_EQ(contains(self, make_vec({v.x(), v.y()}), 1e-9), Location::boundary);
    const Domain mix = minkowski_combination({d1, d2}, w);
    for (const auto& a : d1.as_polygon().vertices)
      for (const auto& b : d2.as_polygon().vertices) {
        const Point2 q = w[0] * a + w[1] * b;
        EXPECT_NE(contains(mix, make_vec({q.x(), q.y()}), 1e-9), Location::outside);
      }
  }
}

TEST(Minkowski, RasterDilationContainsNonConvexDomain) {
  const Domain L = Domain::from_vertices({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}, 0.1);
  const Domain m = minkowski_combination({L, L}, Weights::pair(0.5));
  ASSERT_TRUE(m.is_raster());
  const Raster& rl = L.as_raster();
  std::size_t missing = 0;
  for (std::size_t k = 0; k < rl.size(); ++k)
    if (rl.kind[k] == NodeKind::interior && contains(m, rl.position(k), 0.0) == Location::outside) ++missing;
  EXPECT_EQ(missing, 0u);
  // Part of the notch is filled: (1.2, 1.2) = ½((0.5, 1.9) + (1.9, 0.5)).
  EXPECT_NE(contains(m, make_vec({1.2, 1.2}), 0.0), Location::outside);
  EXPECT_GT(m.measure(), L.measure());
}

TEST(Contains, Examples) {
  const Domain I = Domain::interval(0, 1);
  EXPECT_EQ(contains(I, make_vec({0.5}), 1e-9), Location::interior);
  EXPECT_EQ(contains(I, make_vec({0.0}), 1e-9), Location::boundary);
  EXPECT_EQ(contains(I, make_vec({1.5}), 1e-9), Location::outside);
  const Domain S = Domain::unit_square();
  EXPECT_EQ(contains(S, make_vec({0.5, 0.5})), Location::interior);
  EXPECT_EQ(contains(S, make_vec({1.0, 0.3})), Location::boundary);
  EXPECT_EQ(contains(S, make_vec({1.0 + 1e-6, 0.3})), Location::outside);
  EXPECT_EQ(contains(S, make_vec({1.0 + 1e-6, 0.3}), 1e-5), Location::boundary);
}

TEST(NormalExt, Examples) {
  const Domain I = Domain::interval(0, 1);
  auto b = normal_ext(I, make_vec({0.0}));
  EXPECT_DOUBLE_EQ(b.normal(0), 1.0);
  EXPECT_DOUBLE_EQ(b.dist, 0.0);
  b = normal_ext(I, make_vec({1.0}));
  EXPECT_DOUBLE_EQ(b.normal(0), -1.0);
  b = normal_ext(I, make_vec({0.3}));
  EXPECT_DOUBLE_EQ(b.normal(0), 0.0);
  EXPECT_DOUBLE_EQ(b.dist, 0.3);
  const Domain S = Domain::unit_square();
  b = normal_ext(S, make_vec({0.0, 0.5}));
  EXPECT_NEAR(b.normal(0), 1.0, 1e-15);
  EXPECT_NEAR(b.normal(1), 0.0, 1e-15);
  b = normal_ext(S, make_vec({0.0, 0.0}));  // vertex: bisector
  EXPECT_NEAR(b.normal(0), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(b.normal(1), std::sqrt(0.5), 1e-15);
  b = normal_ext(S, make_vec({0.2, 0.7}));
  EXPECT_NEAR(b.dist, 0.2, 1e-15);
  EXPECT_THROW(normal_ext(I, make_vec({1.5})), domain_error);
}

TEST(NormalExt, UnitExactlyOnBoundary) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 100; ++s) {
    const Domain d = Domain::polygon(random_convex(rng));
    const auto& v = d.as_polygon().vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double t = u(rng);
      const Point2 e = v[(i + 1) % v.size()] - v[i];
      const Point2 q = v[i] + t * e;
      auto b = normal_ext(d, make_vec({q.x(), q.y()}));
      EXPECT_EQ(b.dist, 0.0);
      EXPECT_NEAR(b.normal.norm(), 1.0, 1e-12);
      if (t > 1e-3 && t < 1 - 1e-3) {
        // Inward: the step q + δν stays inside.
        EXPECT_NEAR(b.normal.dot(make_vec({e.x(), e.y()})), 0.0, 1e-9);
        EXPECT_EQ(contains(d, make_vec({q.x(), q.y()}) + 1e-4 * b.normal), Location::interior);
      }
      // An interior point has zero ν̃ and positive distance.
      Point2 c = Point2::Zero();
      for (const auto& p : v) c += p / static_cast<double>(v.size());
      auto bi = normal_ext(d, make_vec({c.x(), c.y()}));
      EXPECT_GT(bi.dist, 0.0);
      EXPECT_EQ(bi.normal.norm(), 0.0);
    }
  }
}

TEST(NormalExt, RasterBoundary) {
  const Domain d = Domain::raster(rasterize(Domain::unit_square(), 0.05));
  auto b = normal_ext(d, make_vec({0.025, 0.5}));
  EXPECT_EQ(b.dist, 0.0);
  EXPECT_GT(b.normal(0), 0.9);
}

TEST(Rasterize, Examples) {
  const Raster r = rasterize(Domain::interval(0, 1), 0.25);
  ASSERT_EQ(r.nx, 5);
  std::vector<double> inner;
  for (std::size_t k = 0; k < r.size(); ++k)
    if (r.kind[k] == NodeKind::interior) inner.push_back(r.position(k)(0));
  EXPECT_EQ(inner, (std::vector<double>{0.25, 0.5, 0.75}));
  EXPECT_EQ(r.kind[0], NodeKind::boundary);
  EXPECT_EQ(r.kind[4], NodeKind::boundary);

  const Raster s = rasterize(Domain::unit_square(), 0.5);
  EXPECT_EQ(s.interior_count(), 1u);
  EXPECT_EQ(s.kind[s.index(1, 1)], NodeKind::interior);
  EXPECT_EQ(std::count(s.kind.begin(), s.kind.end(), NodeKind::boundary), 8);

  EXPECT_THROW(rasterize(Domain::interval(0, 1), 2.0), usage_error);
  EXPECT_THROW(rasterize(Domain::interval(0, 1), 0.0), usage_error);
}

TEST(Rasterize, InteriorNodesClassifyInterior) {
  std::mt19937_64 rng(7);
  for (int s = 0; s < 30; ++s) {
    const Domain d = Domain::polygon(random_convex(rng));
    const Raster r = rasterize(d, 0.04);
    for (std::size_t k = 0; k < r.size(); ++k) {
      const Location loc = contains(d, r.position(k));
      if (r.kind[k] == NodeKind::interior) {
        EXPECT_EQ(loc, Location::interior);
      }
      if (loc == Location::interior) {
        EXPECT_EQ(r.kind[k], NodeKind::interior);
      }
    }
    EXPECT_NEAR(r.measure(), d.measure(), 0.1 * d.measure() + 0.04);
  }
}

TEST(PolygonIO, RoundTripAndPgm) {
  const Domain oct = minkowski_combination({Domain::unit_square(), rotated_unit_square()}, Weights::pair(0.5));
  std::stringstream ss;
  ss << "# octagon\n\n";
  write_polygon(oct.as_polygon(), ss);
  const auto v = read_polygon(ss);
  ASSERT_EQ(v.size(), oct.as_polygon().vertices.size());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], oct.as_polygon().vertices[i]);
  std::istringstream bad("0 0\n1\n");
  EXPECT_THROW(read_polygon(bad), usage_error);

  const Raster r = rasterize(Domain::unit_square(), 0.5);
  std::ostringstream pgm;
  write_pgm(r, pgm);
  EXPECT_EQ(pgm.str(), "P2\n3 3\n255\n128 128 128\n128 255 128\n128 128 128\n");
}
