#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "doctest.h"
#include "mmshape/errors.hpp"
#include "mmshape/mesh.hpp"
#include "support.hpp"

using namespace mmshape;
using std::numbers::pi;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mmshape_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

double brute_force_hmax(const Mesh& m) {
  double h = 0.0;
  for (const auto& c : m.cells())
    for (int a = 0; a < 3; ++a)
      h = std::max(h, (m.vertices()[c[a]] - m.vertices()[c[(a + 1) % 3]]).norm());
  return h;
}

}  // namespace

TEST_CASE("rect grid counts and areas") {
  Mesh one = gen_rect_grid(0, 0, 1, 1, 1, 1);
  CHECK(one.num_cells() == 4);
  CHECK(one.num_vertices() == 5);
  CHECK(one.total_area() == doctest::Approx(1.0).epsilon(1e-14));

  Mesh two = gen_rect_grid(0, 0, 1, 1, 2, 2);
  CHECK(two.num_cells() == 16);
  CHECK(two.total_area() == doctest::Approx(1.0).epsilon(1e-14));

  Mesh wide = gen_rect_grid(0, 0, 2, 1, 4, 2);
  CHECK(wide.h_max() == doctest::Approx(brute_force_hmax(wide)).epsilon(1e-14));
  // crisscross: the longest edge of each quarter triangle is the 0.5 quad side
  CHECK(wide.h_max() == doctest::Approx(0.5).epsilon(1e-14));

  CHECK_THROWS_AS(gen_rect_grid(0, 0, 0, 1, 1, 1), InvalidArgument);
}

TEST_CASE("cells are counter-clockwise in every generator") {
  const std::vector<Mesh> meshes{
      gen_rect_grid(0, 0, 1, 1, 5, 3),
      gen_annulus({0.5, 0.5}, 0.2, 0.4, 2, 16),
      gen_elliptic_patch({0.5, 0.5}, 0.3, {0.55, 0.5}, 0.1, 0.04, 0.4, 6, 48),
      gen_disk({0.1, -0.2}, 0.3, 0.05),
      gen_cable_submesh({0.2, 0.1}, 0.2, 0.255, 0.4, 48),
  };
  for (const auto& m : meshes) {
    for (std::size_t c = 0; c < m.num_cells(); ++c) CHECK(m.cell_area(static_cast<int>(c)) > 0.0);
    // cell areas tile the region bounded by the loops
    CHECK(testing::sum_cell_areas(m) == doctest::Approx(testing::loop_area(m)).epsilon(1e-10));
  }
}

TEST_CASE("annulus loops and area") {
  Mesh m = gen_annulus({0.5, 0.5}, 0.2, 0.4, 2, 16);
  auto loops = boundary_loops(m);
  REQUIRE(loops.size() == 2);
  CHECK(std::abs(loops[0].signed_area) != doctest::Approx(std::abs(loops[1].signed_area)));
  const double outer = std::max(std::abs(loops[0].signed_area), std::abs(loops[1].signed_area));
  const double inner = std::min(std::abs(loops[0].signed_area), std::abs(loops[1].signed_area));
  CHECK(outer > inner);
  // inscribed 16-gons: relative error of order (2π/16)²/6
  const double exact = pi * (0.4 * 0.4 - 0.2 * 0.2);
  CHECK(std::abs(m.total_area() - exact) / exact < std::pow(2 * pi / 16, 2) / 6 * 1.01);
  CHECK_THROWS_AS(gen_annulus({0, 0}, 0.2, 0.2, 2, 16), InvalidArgument);
}

TEST_CASE("cable submesh regions and interfaces") {
  const int res = 256;
  Mesh m = gen_cable_submesh({0, 0}, 0.2, 0.255, 0.5, res);
  std::map<int, double> area;
  for (std::size_t c = 0; c < m.num_cells(); ++c) area[m.cell_region()[c]] += m.cell_area(static_cast<int>(c));
  const double tol = std::pow(2 * pi / res, 2);  // chord polygon error, relative
  CHECK(area[region::kMetal] == doctest::Approx(pi * 0.04).epsilon(tol));
  CHECK(area[region::kInsulation] == doctest::Approx(pi * (0.255 * 0.255 - 0.04)).epsilon(2 * tol));
  CHECK(area[region::kFill] == doctest::Approx(pi * (0.25 - 0.255 * 0.255)).epsilon(tol));

  for (int f : m.facets_with_marker(marker::kInnerIface)) {
    const auto& cells = m.facet_cells(f);
    REQUIRE(cells.size() == 2);
    std::set<int> regions{m.cell_region()[cells[0]], m.cell_region()[cells[1]]};
    CHECK(regions == std::set<int>{region::kInsulation, region::kMetal});
  }
  CHECK(boundary_loops(m).size() == 1);
  CHECK_THROWS_AS(gen_cable_submesh({0, 0}, 0.3, 0.2, 0.5, 32), InvalidArgument);
}

TEST_CASE("rigid motions") {
  Mesh m = gen_elliptic_patch({0.5, 0.5}, 0.3, {0.6, 0.5}, 0.1, 0.04, 0.0, 6, 48);
  SUBCASE("identity is bitwise") {
    Mesh same = apply_rigid(m, RigidPose{});
    CHECK(same.vertices() == m.vertices());
  }
  SUBCASE("half turn twice") {
    RigidPose half{pi, Vec2::Zero(), Vec2::Zero()};
    Mesh back = apply_rigid(apply_rigid(m, half), half);
    for (std::size_t i = 0; i < m.num_vertices(); ++i) CHECK((back.vertices()[i] - m.vertices()[i]).norm() < 1e-12);
  }
  SUBCASE("quarter turn keeps areas and radius ratios") {
    Mesh r = apply_rigid(m, RigidPose{pi / 2, Vec2(0.5, 0.5), Vec2(0.1, -0.3)});
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      const int i = static_cast<int>(c);
      CHECK(std::abs(radius_ratio(r, i) - radius_ratio(m, i)) <= 1e-12);
      CHECK(std::abs(r.cell_area(i) - m.cell_area(i)) <= 1e-12 * m.cell_area(i));
    }
  }
  SUBCASE("pose inverse") {
    RigidPose p{0.7, Vec2(0.2, 0.1), Vec2(-0.3, 0.5)};
    const Vec2 x(0.31, -0.77);
    CHECK((p.inverse().apply(p.apply(x)) - x).norm() < 1e-14);
  }
}

TEST_CASE("radius ratio") {
  CHECK(radius_ratio(Triangle{Vec2(0, 0), Vec2(1, 0), Vec2(0.5, std::sqrt(3.0) / 2)}) ==
        doctest::Approx(1.0).epsilon(1e-14));
  const double r = (2 - std::sqrt(2.0)) / 2, big_r = std::sqrt(2.0) / 2;
  CHECK(radius_ratio(Triangle{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}) == doctest::Approx(2 * r / big_r).epsilon(1e-14));
  CHECK(radius_ratio(Triangle{Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)}) == 0.0);
}

TEST_CASE("boundary loops") {
  Mesh grid = gen_rect_grid(0, 0, 1, 1, 3, 3);
  auto loops = boundary_loops(grid);
  REQUIRE(loops.size() == 1);
  for (int mk : loops[0].markers) CHECK(mk == marker::kExterior);

  // every boundary edge visited exactly once
  std::size_t boundary_edges = 0;
  for (std::size_t f = 0; f < grid.num_facets(); ++f)
    if (grid.facet_cells(static_cast<int>(f)).size() == 1) ++boundary_edges;
  CHECK(loops[0].vertices.size() == boundary_edges);
}

TEST_CASE("mesh file round trip and errors") {
  Mesh m = gen_cable_submesh({0.3, -0.1}, 0.2, 0.255, 0.4, 32);
  const auto path = temp_path("cable.mesh");
  write_mesh(m, path);
  CHECK(read_mesh(path) == m);

  {
    std::ofstream out(temp_path("v2.mesh"));
    out << "mmesh 2\nvertices 0\ncells 0\nfacets 0\n";
  }
  CHECK_THROWS_AS(read_mesh(temp_path("v2.mesh")), UnsupportedVersion);

  {
    std::ofstream out(temp_path("truncated.mesh"));
    out << "mmesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 2\n0 1 2 0\n";
  }
  try {
    read_mesh(temp_path("truncated.mesh"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 8);
    CHECK(std::string(e.what()).find("line 8") != std::string::npos);
  }
}

TEST_CASE("reader repairs clockwise cells") {
  const auto path = temp_path("cw.mesh");
  {
    std::ofstream out(path);
    out << "mmesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 2 1 0\nfacets 0\n";
  }
  Mesh m = read_mesh(path);
  CHECK(m.cell_area(0) == doctest::Approx(0.5));
}
