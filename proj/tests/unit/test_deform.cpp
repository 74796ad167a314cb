#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mmshape/deform.hpp"
#include "mmshape/errors.hpp"
#include "mmshape/problems.hpp"
#include "support.hpp"

using namespace mmshape;
using std::numbers::pi;

namespace {

GradientDensity circle_density(double r, int n, const std::function<double(const Vec2&)>& g) {
  GradientDensity d;
  for (int k = 0; k < n; ++k) {
    DensityFacet f;
    f.block = 1;
    f.facet = k;
    f.a = r * Vec2(std::cos(2 * pi * k / n), std::sin(2 * pi * k / n));
    f.b = r * Vec2(std::cos(2 * pi * (k + 1) / n), std::sin(2 * pi * (k + 1) / n));
    f.mid = 0.5 * (f.a + f.b);
    f.length = (f.b - f.a).norm();
    f.normal = Vec2(f.b.y() - f.a.y(), f.a.x() - f.b.x()) / f.length;
    f.g = g(f.mid);
    d.facets.push_back(f);
  }
  return d;
}

// Density on the Γ facets of a mesh, normals out of the mesh.
GradientDensity gamma_density(const Mesh& m, const std::function<double(const Vec2&)>& g) {
  GradientDensity d;
  for (int f : m.facets_with_marker(marker::kGamma)) {
    DensityFacet df;
    df.block = 1;
    df.facet = f;
    df.a = m.vertices()[m.facets()[f][0]];
    df.b = m.vertices()[m.facets()[f][1]];
    df.mid = 0.5 * (df.a + df.b);
    df.length = (df.b - df.a).norm();
    const auto t = m.triangle(m.facet_cells(f).front());
    const Vec2 centroid = (t[0] + t[1] + t[2]) / 3.0;
    Vec2 n(df.b.y() - df.a.y(), df.a.x() - df.b.x());
    n /= df.length;
    if (n.dot(df.mid - centroid) < 0) n = -n;
    df.normal = n;
    df.g = g(df.mid);
    d.facets.push_back(df);
  }
  return d;
}

Mesh hole_patch() { return gen_elliptic_patch({0.5, 0.5}, 0.35, {0.5, 0.5}, 0.12, 0.12, 0.0, 10, 64); }

// α ∫∇d:∇d + ∫ d·d for a P1 vector field, with exact element matrices.
double h1_energy(const Mesh& m, const DeformField& d, double alpha) {
  double e = 0.0;
  for (int c = 0; c < static_cast<int>(m.num_cells()); ++c) {
    const auto k = p1_stiffness(m.triangle(c), alpha);
    const auto mm = p1_mass(m.triangle(c));
    const auto& cell = m.cells()[c];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) e += (k[i][j] + mm[i][j]) * d[cell[i]].dot(d[cell[j]]);
  }
  return e;
}

double grad_norm(const Mesh& m, const DeformField& d) {
  double e = 0.0;
  for (int c = 0; c < static_cast<int>(m.num_cells()); ++c) {
    const auto g = p1_gradients(m.triangle(c));
    const auto& cell = m.cells()[c];
    Eigen::Matrix2d j = Eigen::Matrix2d::Zero();
    for (int a = 0; a < 3; ++a) j += d[cell[a]] * g[a].transpose();
    e += m.cell_area(c) * j.squaredNorm();
  }
  return std::sqrt(e);
}

}  // namespace

TEST_CASE("translation representer") {
  Mesh sub = gen_annulus(Vec2::Zero(), 1.0, 2.0, 4, 64);
  const double area = sub.total_area();
  CHECK(riesz_translation(circle_density(1.0, 64, [](const Vec2&) { return 1.3; }), sub, 1).norm() < 1e-14);
  CHECK(riesz_translation(circle_density(1.0, 64, [](const Vec2&) { return 0.0; }), sub, 1).norm() == 0.0);
  Vec2 d = riesz_translation(circle_density(1.0, 4096, [](const Vec2& p) { return p.x() / p.norm(); }), sub, 1);
  CHECK(d.x() == doctest::Approx(-pi / area).epsilon(1e-5));
  CHECK(std::abs(d.y()) < 1e-12);
}

TEST_CASE("rotation representer") {
  Mesh sub = gen_annulus(Vec2::Zero(), 1.0, 2.0, 4, 64);
  CHECK(std::abs(riesz_rotation(circle_density(1.0, 64, [](const Vec2&) { return 2.0; }), sub, 1, Vec2::Zero(), 1.0)) <
        1e-14);
  // g with positive derivative along the rotation field: descent means ω < 0
  auto g = [](const Vec2& p) { return p.x() - 2.0 * p.y(); };
  GradientDensity d = circle_density(1.0, 64, g);
  const Vec2 c(0.3, 0.1);
  const double dj = directional_derivative(d, rotation_field(c));
  REQUIRE(dj > 0.0);
  CHECK(riesz_rotation(d, sub, 1, c, 1.0) < 0.0);
}

TEST_CASE("eikonal distance") {
  SUBCASE("sign and boundary values") {
    Mesh m = hole_patch();
    Vector eps = solve_eikonal(m, marker::kGamma, 25.0);
    CHECK(eps.minCoeff() >= -1e-10);
    for (int f : m.facets_with_marker(marker::kGamma))
      for (int v : m.facets()[f]) CHECK(eps[v] == 0.0);
  }
  SUBCASE("strip against the closed-form profile") {
    // −α ε″ + ε′² = 1, ε(0) = 0, ε′(L) = 0 has ε′ = tanh((L − x)/α)
    const double alpha = 0.2, length = 1.0;
    Mesh grid = gen_rect_grid(0, 0, length, 0.1, 200, 4);
    std::vector<int> markers = grid.facet_marker();
    for (std::size_t f = 0; f < grid.num_facets(); ++f) {
      const auto& e = grid.facets()[f];
      if (grid.vertices()[e[0]].x() == 0.0 && grid.vertices()[e[1]].x() == 0.0) markers[f] = marker::kGamma;
    }
    Mesh strip(grid.vertices(), grid.cells(), grid.cell_region(), grid.facets(), markers);
    Vector eps = solve_eikonal(strip, marker::kGamma, alpha);
    auto exact = [&](double x) {
      return alpha * (std::log(std::cosh(length / alpha)) - std::log(std::cosh((length - x) / alpha)));
    };
    double err = 0.0;
    for (std::size_t v = 0; v < strip.num_vertices(); ++v)
      err = std::max(err, std::abs(eps[v] - exact(strip.vertices()[v].x())));
    CHECK(err <= 1e-3);
  }
}

TEST_CASE("advection deformation") {
  Mesh m = hole_patch();
  Vector eps = solve_eikonal(m, marker::kGamma, 25.0);
  const DeformField zero = solve_advection_deform(m, eps, gamma_density(m, [](const Vec2&) { return 0.0; }), 1, 1e-3);
  CHECK(std::all_of(zero.begin(), zero.end(), [](const Vec2& v) { return v.norm() == 0.0; }));

  GradientDensity d = gamma_density(m, [](const Vec2& p) { return std::sin(5 * p.x()) + 0.5; });
  DeformField field = solve_advection_deform(m, eps, d, 1, 1e-3);
  std::vector<bool> on_gamma;
  DeformField trace = boundary_descent_values(m, d, 1, &on_gamma);
  double max_gamma = 0.0, max_outer = 0.0;
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    if (on_gamma[v]) {
      CHECK((field[v] - trace[v]).norm() <= 1e-10);
      max_gamma = std::max(max_gamma, field[v].norm());
    }
  for (int f : m.facets_with_marker(marker::kLambda))
    for (int v : m.facets()[f]) max_outer = std::max(max_outer, field[v].norm());
  CHECK(max_outer <= max_gamma);

  // some positive step keeps every cell positive
  auto valid = [&](double xi) {
    for (int c = 0; c < static_cast<int>(m.num_cells()); ++c) {
      const auto& cell = m.cells()[c];
      const Vec2 a = m.vertices()[cell[0]] + xi * field[cell[0]];
      const Vec2 b = m.vertices()[cell[1]] + xi * field[cell[1]];
      const Vec2 e = m.vertices()[cell[2]] + xi * field[cell[2]];
      if (!(signed_area(a, b, e) > 0.0)) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 10.0;
  for (int k = 0; k < 60; ++k) (valid(0.5 * (lo + hi)) ? lo : hi) = 0.5 * (lo + hi);
  CHECK(lo > 0.0);
}

TEST_CASE("H1 representer") {
  Mesh m = hole_patch();
  const DeformField zero = h1_riesz(m, gamma_density(m, [](const Vec2&) { return 0.0; }), 1, 1.0);
  CHECK(std::all_of(zero.begin(), zero.end(), [](const Vec2& v) { return v.norm() == 0.0; }));

  GradientDensity d = gamma_density(m, [](const Vec2& p) { return std::cos(3 * p.y()) + p.x(); });
  MultiMeshStack s = build_stack(gen_rect_grid(0, 0, 1, 1, 12, 12), {m});
  DesignSpace space{{BoundaryNodesDesign{0, marker::kGamma, H1Scheme{1.0}}}, 1.0};
  DesignDirection dir = compute_direction(s, space, d);
  const double slope = direction_slope(s, space, d, dir);
  CHECK(slope < 0.0);
  CHECK(slope == doctest::Approx(-h1_energy(m, dir[0].field, 1.0)).epsilon(1e-8));

  DeformField smooth = h1_riesz(m, d, 1, 100.0);
  CHECK(grad_norm(m, smooth) < grad_norm(m, dir[0].field));
}

TEST_CASE("design updates") {
  MultiMeshStack s = make_example_stack(ExampleGeometry{.nx = 16, .ny = 16});
  const Vec2 pivot = ExampleGeometry{}.pivot;
  DesignSpace rot{{RotationDesign{0, pivot}}, 1.0};
  DesignDirection dir{ComponentDirection{0.8, Vec2::Zero(), {}}};

  MultiMeshStack same = apply_design_update(s, rot, dir, 0.0);
  CHECK(same.poses[0].angle == s.poses[0].angle);
  CHECK(same.poses[0].translation == s.poses[0].translation);

  MultiMeshStack r = apply_design_update(s, rot, dir, 0.3);
  CHECK(std::abs(mesh_quality(r.placed[0]) - mesh_quality(s.placed[0])) <= 1e-12);

  MultiMeshStack twice = apply_design_update(apply_design_update(s, rot, dir, 0.2), rot, dir, 0.5);
  MultiMeshStack once = apply_design_update(s, rot, dir, 0.7);
  for (std::size_t v = 0; v < once.placed[0].num_vertices(); ++v)
    CHECK((twice.placed[0].vertices()[v] - once.placed[0].vertices()[v]).norm() <= 1e-12);

  DesignSpace nodes{{BoundaryNodesDesign{0, marker::kGamma, H1Scheme{1.0}}}, 1.0};
  GradientDensity d = gamma_density(s.placed[0], [](const Vec2& p) { return 10 * std::sin(9 * p.x()); });
  DesignDirection big = compute_direction(s, nodes, d);
  const auto before = s.reference[0].vertices();
  CHECK_THROWS_AS(apply_design_update(s, nodes, big, 1e6), InvalidStep);
  CHECK(s.reference[0].vertices() == before);
}

TEST_CASE("mesh quality") {
  const double h = std::sqrt(3.0) / 2;
  Mesh eq({Vec2(0, 0), Vec2(1, 0), Vec2(0.5, h), Vec2(1.5, h)}, {{0, 1, 2}, {1, 3, 2}}, {0, 0}, {}, {});
  CHECK(mesh_quality(eq) == doctest::Approx(1.0).epsilon(1e-14));
  auto verts = eq.vertices();
  verts[3] = Vec2(0.5, h) + 0.5 * (Vec2(1, 0) - Vec2(0.5, h));  // collinear with vertices 1 and 2
  CHECK(mesh_quality(eq.with_vertices(verts)) == doctest::Approx(0.0).epsilon(1e-12));
}
