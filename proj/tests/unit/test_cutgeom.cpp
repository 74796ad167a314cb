#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "mmshape/cutgeom.hpp"
#include "mmshape/errors.hpp"
#include "support.hpp"

using namespace mmshape;
using std::numbers::pi;

namespace {

ConvexPolygon square(double x0, double y0, double x1, double y1) {
  return ConvexPolygon{{Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)}};
}

ConvexPolygon regular_polygon(const Vec2& c, double r, int n, double phase = 0.0) {
  ConvexPolygon p;
  for (int k = 0; k < n; ++k) {
    const double t = phase + 2 * pi * k / n;
    p.vertices.emplace_back(c.x() + r * std::cos(t), c.y() + r * std::sin(t));
  }
  return p;
}

bool inside_convex(const ConvexPolygon& p, const Vec2& x) {
  const auto& v = p.vertices;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (cross(v[(i + 1) % v.size()] - v[i], x - v[i]) < 0.0) return false;
  return true;
}

// Length of segment ab inside a CCW triangle, parametric slab clipping.
double segment_length_in(const Triangle& t, const Vec2& a, const Vec2& b) {
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2 e = t[(k + 1) % 3] - t[k];
    const double fa = cross(e, a - t[k]), fb = cross(e, b - t[k]);
    if (fa < 0 && fb < 0) return 0.0;
    if (fa < 0) lo = std::max(lo, fa / (fa - fb));
    if (fb < 0) hi = std::min(hi, fa / (fa - fb));
  }
  return hi > lo ? (hi - lo) * (b - a).norm() : 0.0;
}

}  // namespace

TEST_CASE("footprint polygon") {
  Mesh ann = gen_annulus({0.5, 0.5}, 0.1, 0.3, 2, 16);
  ConvexPolygon fp = footprint_polygon(ann);
  CHECK(fp.vertices.size() == 16);
  for (const auto& v : fp.vertices) CHECK((v - Vec2(0.5, 0.5)).norm() == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(fp.area() >= ann.total_area());

  // a reflex outer loop: dent one outer vertex inwards
  auto verts = ann.vertices();
  const auto loops = boundary_loops(ann);
  for (const auto& l : loops)
    if (l.signed_area > 0) verts[l.vertices[3]] = Vec2(0.5, 0.5) + 0.7 * (verts[l.vertices[3]] - Vec2(0.5, 0.5));
  CHECK_THROWS_AS(footprint_polygon(ann.with_vertices(verts)), UnsupportedGeometry);
}

TEST_CASE("triangle clipping") {
  const Triangle unit{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  CHECK(clip_triangle(unit, square(-1, -1, 2, 2)).area() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(clip_triangle(unit, square(3, 3, 4, 4)).empty());
  ConvexPolygon q = clip_triangle(unit, square(-5, -5, 0.5, 5));
  CHECK(q.area() == doctest::Approx(0.375).epsilon(1e-14));

  // first moment of the clipped quadrilateral against the vertex formula
  QuadratureRule r = polygon_quadrature(q, 1);
  CHECK(r.integrate([](const Vec2& p) { return p.x(); }) ==
        doctest::Approx(testing::polygon_moment(q.vertices, 1, 0)).epsilon(1e-13));
  CHECK(polygon_quadrature(ConvexPolygon{}, 3).size() == 0);

  // monotone: area(clip) <= min of the two areas
  testing::Rng rng(7);
  for (int k = 0; k < 200; ++k) {
    ConvexPolygon a{testing::random_convex_polygon(rng)}, b{testing::random_convex_polygon(rng)};
    const double c = clip_convex(a, b).area();
    CHECK(c <= std::min(a.area(), b.area()) * (1 + 1e-12));
  }
}

TEST_CASE("polygon quadrature integrates monomials exactly") {
  testing::Rng rng(11);
  for (int k = 0; k < 100; ++k) {
    ConvexPolygon poly{testing::random_convex_polygon(rng)};
    for (int d = 1; d <= 6; ++d) {
      QuadratureRule rule = polygon_quadrature(poly, d);
      for (int a = 0; a <= d; ++a)
        for (int b = 0; a + b <= d; ++b) {
          const double exact = testing::polygon_moment(poly.vertices, a, b);
          const double got = rule.integrate([&](const Vec2& p) { return std::pow(p.x(), a) * std::pow(p.y(), b); });
          const double scale = std::max(std::abs(exact), testing::polygon_moment(poly.vertices, 0, 0) * 1e-3);
          CHECK(std::abs(got - exact) <= 1e-12 * scale);
        }
    }
  }
}

TEST_CASE("classification") {
  Mesh bg = gen_rect_grid(0, 0, 1, 1, 4, 4);
  SUBCASE("disjoint and full") {
    auto far = classify_cells(bg, {square(3, 3, 4, 4)});
    CHECK(far.count(CellStatus::Uncut) == bg.num_cells());
    auto all = classify_cells(bg, {square(-1, -1, 2, 2)});
    CHECK(all.count(CellStatus::Covered) == bg.num_cells());
    auto r = partition_report(bg, all);
    CHECK(r.visible == 0.0);
    CHECK(r.covered == doctest::Approx(1.0).epsilon(1e-14));
    auto none = classify_cells(bg, {});
    CHECK(partition_report(bg, none).visible == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("disk against brute-force clipping") {
    ConvexPolygon disk = regular_polygon({0.5, 0.5}, 0.3, 64, 0.01);
    auto cls = classify_cells(bg, {disk});
    for (int c = 0; c < static_cast<int>(bg.num_cells()); ++c) {
      const double a = clip_triangle(bg.triangle(c), disk).area();
      const double full = bg.cell_area(c);
      CellStatus expect = a <= 1e-12 * full ? CellStatus::Uncut
                          : a >= full * (1 - 1e-12) ? CellStatus::Covered
                                                    : CellStatus::Cut;
      CHECK(cls.status[c] == expect);
    }
  }
  SUBCASE("partition against the disk area") {
    Mesh fine = gen_rect_grid(0, 0, 1, 1, 32, 32);
    ConvexPolygon disk = regular_polygon({0.47, 0.52}, 0.3, 256);
    auto r = partition_report(fine, classify_cells(fine, {disk}));
    CHECK(r.total() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(r.hidden + r.covered - pi * 0.09) < fine.h_max());
    CHECK(r.hidden + r.covered == doctest::Approx(disk.area()).epsilon(1e-12));
  }
  SUBCASE("overlapping footprints are rejected") {
    CHECK_THROWS_AS(classify_cells(bg, {regular_polygon({0.4, 0.5}, 0.2, 16), regular_polygon({0.6, 0.5}, 0.2, 16)}),
                    UnsupportedConfiguration);
  }
}

TEST_CASE("classification is equivariant under joint rigid motions") {
  Mesh bg = gen_rect_grid(0, 0, 1, 1, 8, 8);
  ConvexPolygon fp = regular_polygon({0.43, 0.55}, 0.27, 40, 0.2);
  auto base = classify_cells(bg, {fp});
  testing::Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    RigidPose pose{rng.uniform(0, 2 * pi), Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1)),
                   Vec2(rng.uniform(-2, 2), rng.uniform(-2, 2))};
    ConvexPolygon moved;
    for (const auto& v : fp.vertices) moved.vertices.push_back(pose.apply(v));
    auto cls = classify_cells(apply_rigid(bg, pose), {moved});
    CHECK(cls.status == base.status);
  }
}

TEST_CASE("point location") {
  Mesh bg = gen_rect_grid(0, 0, 1, 1, 3, 3);
  for (int c = 0; c < static_cast<int>(bg.num_cells()); ++c) {
    const auto t = bg.triangle(c);
    CHECK(point_locate(bg, (t[0] + t[1] + t[2]) / 3.0) == c);
  }
  CHECK_FALSE(point_locate(bg, Vec2(1.5, 0.5)).has_value());
  for (int f = 0; f < static_cast<int>(bg.num_facets()); ++f) {
    const auto& cells = bg.facet_cells(f);
    if (cells.size() != 2) continue;
    const Vec2 mid = 0.5 * (bg.vertices()[bg.facets()[f][0]] + bg.vertices()[bg.facets()[f][1]]);
    CHECK(point_locate(bg, mid) == std::min(cells[0], cells[1]));
  }
  CellLocator loc(bg);
  for (int c = 0; c < static_cast<int>(bg.num_cells()); ++c) {
    const auto t = bg.triangle(c);
    CHECK(loc.locate((t[0] + t[1] + t[2]) / 3.0) == c);
  }
}

TEST_CASE("interface segments") {
  Mesh bg = gen_rect_grid(0, 0, 1, 1, 4, 4);
  SUBCASE("octagon against brute-force incidences") {
    Mesh sub = gen_annulus({0.52, 0.47}, 0.1, 0.31, 1, 8);
    ConvexPolygon fp = footprint_polygon(sub);
    auto cls = classify_cells(bg, {fp});
    auto segs = interface_segments(sub, bg, cls);
    std::size_t incidences = 0;
    for (int f : sub.facets_with_marker(marker::kLambda))
      for (int c = 0; c < static_cast<int>(bg.num_cells()); ++c)
        if (segment_length_in(bg.triangle(c), sub.vertices()[sub.facets()[f][0]], sub.vertices()[sub.facets()[f][1]]) >
            1e-12)
          ++incidences;
    CHECK(segs.size() == incidences);
    double total = 0.0;
    for (const auto& s : segs) total += s.length;
    double perimeter = 0.0;
    for (std::size_t i = 0; i < fp.vertices.size(); ++i)
      perimeter += (fp.vertices[(i + 1) % fp.vertices.size()] - fp.vertices[i]).norm();
    CHECK(total == doctest::Approx(perimeter).epsilon(1e-10));
    for (const auto& s : segs) {
      // the normal points away from the footprint
      const Vec2 mid = 0.5 * (s.a + s.b);
      CHECK_FALSE(inside_convex(fp, mid + 1e-6 * s.normal));
      CHECK(cls.status[s.background_cell] != CellStatus::Covered);
    }
  }
  SUBCASE("facet inside one cell is not split") {
    Mesh sub = gen_annulus({0.55, 0.4}, 0.002, 0.01, 1, 8);
    auto cls = classify_cells(bg, {footprint_polygon(sub)});
    auto segs = interface_segments(sub, bg, cls);
    CHECK(segs.size() == 8);
  }
}

TEST_CASE("overlap pieces") {
  Mesh bg = gen_rect_grid(0, 0, 1, 1, 4, 4);
  Mesh sub = gen_annulus({0.51, 0.48}, 0.1, 0.33, 3, 24);
  ConvexPolygon fp = footprint_polygon(sub);
  auto cls = classify_cells(bg, {fp});
  auto pieces = overlap_pieces(sub, bg, cls);

  double pieces_area = 0.0;
  std::set<std::pair<int, int>> pairs;
  for (const auto& p : pieces) {
    pieces_area += p.polygon.area();
    pairs.emplace(p.background_cell, p.submesh_cell);
  }
  double hidden = 0.0;
  for (int c = 0; c < static_cast<int>(bg.num_cells()); ++c)
    if (cls.status[c] == CellStatus::Cut) hidden += cls.hidden[c].area();
  CHECK(pieces_area == doctest::Approx(hidden).epsilon(1e-10));
  CHECK(pairs.size() == pieces.size());

  // Monte-Carlo oracle: points in a cut background cell and inside a submesh cell
  testing::Rng rng(5);
  const int n = 1000000;
  int hits = 0;
  std::set<std::pair<int, int>> seen;
  CellLocator bg_loc(bg), sub_loc(sub);
  for (int k = 0; k < n; ++k) {
    const Vec2 p(rng.uniform(), rng.uniform());
    auto c = bg_loc.locate(p, 0.0);
    if (!c || cls.status[*c] != CellStatus::Cut) continue;
    auto s = sub_loc.locate(p, 0.0);
    if (!s) continue;
    ++hits;
    seen.emplace(*c, *s);
  }
  const double frac = pieces_area;
  const double sigma = std::sqrt(frac * (1 - frac) / n);
  CHECK(std::abs(static_cast<double>(hits) / n - frac) <= 3 * sigma);
  for (const auto& pr : seen) CHECK(pairs.count(pr) == 1);
  CHECK(seen.size() <= pairs.size());
}
