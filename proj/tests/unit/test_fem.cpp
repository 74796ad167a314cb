#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mmshape/errors.hpp"
#include "mmshape/fem.hpp"
#include "support.hpp"

using namespace mmshape;
using std::numbers::pi;

namespace {

SparseSystem laplace_system(const Mesh& m, const std::function<double(const Vec2&)>& f) {
  Assembler a(static_cast<int>(m.num_vertices()));
  assemble_laplace(a, m, {{region::kFill, 1.0}});
  if (f) assemble_source(a, m, [&](const Vec2& x, int) { return f(x); });
  return SparseSystem{a.matrix(), a.rhs(), {}};
}

double sin_sin(const Vec2& p) { return std::sin(pi * p.x()) * std::sin(pi * p.y()); }

double max_abs(const SparseMatrix& m) {
  double s = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) s = std::max(s, std::abs(it.value()));
  return s;
}

}  // namespace

TEST_CASE("element matrices") {
  const Triangle ref{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  auto k = p1_stiffness(ref, 1.0);
  for (int a = 0; a < 3; ++a) CHECK(std::abs(k[a][0] + k[a][1] + k[a][2]) < 1e-15);

  const Triangle t{Vec2(0.1, 0.2), Vec2(0.9, 0.3), Vec2(0.4, 0.8)};
  const double area = std::abs(signed_area(t[0], t[1], t[2]));
  auto m = p1_mass(t);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(m[a][b] == doctest::Approx(a == b ? area / 6 : area / 12).epsilon(1e-14));
}

TEST_CASE("global assembly properties") {
  Mesh mesh = gen_rect_grid(0, 0, 1, 1, 6, 6);
  const int n = static_cast<int>(mesh.num_vertices());
  Assembler a(n);
  assemble_laplace(a, mesh, {{region::kFill, 2.5}});
  SparseMatrix k = a.matrix();
  CHECK(max_abs(SparseMatrix(k - SparseMatrix(k.transpose()))) == 0.0);

  // linears are discrete harmonic at interior vertices
  Vector u = interpolate(mesh, [](const Vec2& p) { return 0.3 + 2 * p.x() - 1.5 * p.y(); });
  Vector ku = k * u;
  std::vector<bool> boundary(n, false);
  for (const auto& f : mesh.facets()) boundary[f[0]] = boundary[f[1]] = true;
  for (int i = 0; i < n; ++i)
    if (!boundary[i]) {
      CHECK(std::abs(ku[i]) < 1e-12);
      CHECK(std::abs(k.row(i).sum()) < 1e-12);
    }

  Assembler zero(n);
  assemble_mass(zero, mesh, 0.0);
  CHECK(max_abs(zero.matrix()) == 0.0);

  Assembler mass(n);
  assemble_mass(mass, mesh, 3.0);
  SparseMatrix mm = mass.matrix();
  // reaction enters as -c ∫uv: row sums are -c times the vertex dual areas
  Vector dual = Vector::Zero(n);
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c)
    for (int v : mesh.cells()[c]) dual[v] += mesh.cell_area(c) / 3;
  for (int i = 0; i < n; ++i) CHECK(mm.row(i).sum() == doctest::Approx(-3.0 * dual[i]).epsilon(1e-13));
}

TEST_CASE("robin terms") {
  // one boundary edge of length L
  Mesh tri({Vec2(0, 0), Vec2(2, 0), Vec2(0, 1)}, {{0, 1, 2}}, {region::kFill}, {{0, 1}}, {marker::kExterior});
  Assembler a(3);
  assemble_robin(a, tri, marker::kExterior, 1.0, 0.0, 0);
  SparseMatrix r = a.matrix();
  CHECK(r.coeff(0, 0) == doctest::Approx(2.0 / 3));
  CHECK(r.coeff(0, 1) == doctest::Approx(2.0 / 6));
  CHECK(r.coeff(1, 1) == doctest::Approx(2.0 / 3));
  CHECK(a.rhs().norm() == 0.0);

  // no source: the solution is the exterior value
  Mesh mesh = gen_rect_grid(0, 0, 1, 1, 5, 5);
  Assembler b(static_cast<int>(mesh.num_vertices()));
  assemble_laplace(b, mesh, {{region::kFill, 1e3}});
  assemble_robin(b, mesh, marker::kExterior, 1.0, 3.2, 0);
  Vector t = solve_spd(b.matrix(), b.rhs());
  CHECK((t.array() - 3.2).abs().maxCoeff() < 1e-9);
}

TEST_CASE("dirichlet elimination") {
  Mesh mesh = gen_rect_grid(0, 0, 1, 1, 7, 5);
  SUBCASE("zero data leaves free rows alone") {
    SparseSystem sys = laplace_system(mesh, [](const Vec2&) { return 1.0; });
    const Vector before = sys.rhs;
    apply_dirichlet(sys, mesh, marker::kExterior, [](const Vec2&) { return 0.0; });
    for (const auto& [dof, v] : sys.constraints) CHECK(sys.rhs[dof] == 0.0);
    for (int i = 0; i < before.size(); ++i)
      if (!sys.constraints.count(i)) CHECK(sys.rhs[i] == before[i]);
    CHECK(max_abs(SparseMatrix(sys.matrix - SparseMatrix(sys.matrix.transpose()))) == 0.0);
  }
  SUBCASE("constants and linears are reproduced") {
    SparseSystem one = laplace_system(mesh, {});
    apply_dirichlet(one, mesh, marker::kExterior, [](const Vec2&) { return 1.0; });
    CHECK((solve_spd(one).array() - 1.0).abs().maxCoeff() < 1e-10);

    SparseSystem lin = laplace_system(mesh, {});
    apply_dirichlet(lin, mesh, marker::kExterior, [](const Vec2& p) { return p.x(); });
    Vector u = solve_spd(lin);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) CHECK(std::abs(u[v] - mesh.vertices()[v].x()) < 1e-10);
  }
}

TEST_CASE("spd solves") {
  SparseMatrix id(3, 3);
  id.setIdentity();
  Vector b(3);
  b << 1, -2, 3;
  CHECK((solve_spd(id, b) - b).norm() == 0.0);

  SparseMatrix a(2, 2);
  a.insert(0, 0) = 2;
  a.insert(0, 1) = 1;
  a.insert(1, 0) = 1;
  a.insert(1, 1) = 2;
  Vector rhs(2);
  rhs << 3, 3;
  Vector x = solve_spd(a, rhs);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));

  SparseMatrix indef(2, 2);
  indef.insert(0, 0) = 1;
  indef.insert(1, 1) = -1;
  CHECK_THROWS_AS(solve_spd(indef, rhs), SolverError);

  // bitwise deterministic
  Mesh mesh = gen_rect_grid(0, 0, 1, 1, 12, 12);
  SparseSystem s1 = laplace_system(mesh, sin_sin);
  apply_dirichlet(s1, mesh, marker::kExterior, [](const Vec2&) { return 0.0; });
  CHECK((solve_spd(s1) - solve_spd(s1)).norm() == 0.0);
}

TEST_CASE("field evaluation") {
  Mesh mesh = gen_rect_grid(0, 0, 1, 1, 4, 3);
  Vector u = interpolate(mesh, [](const Vec2& p) { return p.x() + 2 * p.y(); });
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const Vec2 g = cell_gradient(mesh, u, c);
    CHECK(g.x() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.y() == doctest::Approx(2.0).epsilon(1e-12));
    const auto& cell = mesh.cells()[c];
    const auto t = mesh.triangle(c);
    CHECK(eval_in_cell(mesh, u, c, (t[0] + t[1] + t[2]) / 3.0) ==
          doctest::Approx((u[cell[0]] + u[cell[1]] + u[cell[2]]) / 3).epsilon(1e-14));
  }
  Vector r = Vector::LinSpaced(static_cast<int>(mesh.num_vertices()), 0.0, 1.0);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    CHECK(*eval_field(mesh, r, mesh.vertices()[v]) == doctest::Approx(r[v]).epsilon(1e-13));
  CHECK_FALSE(eval_field(mesh, r, Vec2(2, 2)).has_value());
}

TEST_CASE("l2 error") {
  Mesh mesh = gen_rect_grid(0, 0, 1, 1, 5, 5);
  auto lin = [](const Vec2& p) { return 1 - p.x() + 3 * p.y(); };
  CHECK(l2_error(mesh, interpolate(mesh, lin), lin) < 1e-12);
  CHECK(l2_error(mesh, Vector::Zero(static_cast<int>(mesh.num_vertices())), [](const Vec2&) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("manufactured sin-sin converges at rate two") {
  std::vector<double> err;
  for (int n : {16, 32, 64, 128}) {
    Mesh mesh = gen_rect_grid(0, 0, 1, 1, n, n);
    SparseSystem sys = laplace_system(mesh, [](const Vec2& p) { return 2 * pi * pi * sin_sin(p); });
    apply_dirichlet(sys, mesh, marker::kExterior, [](const Vec2&) { return 0.0; });
    err.push_back(l2_error(mesh, solve_spd(sys), sin_sin));
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) == doctest::Approx(2.0).epsilon(0.075));
}
