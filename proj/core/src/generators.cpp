#include <cmath>
#include <numbers>

#include "mmshape/errors.hpp"
#include "mmshape/mesh.hpp"

namespace mmshape {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Builder {
  std::vector<Vec2> vertices;
  std::vector<Mesh::Cell> cells;
  std::vector<int> regions;
  std::vector<Mesh::Facet> facets;
  std::vector<int> markers;

  int add_vertex(const Vec2& p) {
    vertices.push_back(p);
    return static_cast<int>(vertices.size()) - 1;
  }
  void add_cell(int a, int b, int c, int reg) {
    if (signed_area(vertices[a], vertices[b], vertices[c]) < 0.0) std::swap(b, c);
    cells.push_back({a, b, c});
    regions.push_back(reg);
  }
  void add_facet(int a, int b, int m) {
    facets.push_back({a, b});
    markers.push_back(m);
  }
  Mesh finish() {
    return Mesh(std::move(vertices), std::move(cells), std::move(regions), std::move(facets), std::move(markers));
  }
};

// Ring of `n` points on a circle; n == 0 denotes the center point.
std::vector<int> add_ring(Builder& b, const Vec2& center, double r, int n) {
  if (n == 0) return {b.add_vertex(center)};
  std::vector<int> ring(n);
  for (int j = 0; j < n; ++j) {
    const double phi = kTwoPi * j / n;
    ring[j] = b.add_vertex(center + r * Vec2(std::cos(phi), std::sin(phi)));
  }
  return ring;
}

// Triangulates the band between two concentric rings by merging them in angle order.
void zip_rings(Builder& b, const std::vector<int>& inner, const std::vector<int>& outer, int reg) {
  const int na = static_cast<int>(inner.size()), nb = static_cast<int>(outer.size());
  if (na == 1) {
    for (int j = 0; j < nb; ++j) b.add_cell(inner[0], outer[j], outer[(j + 1) % nb], reg);
    return;
  }
  int i = 0, j = 0;
  while (i < na || j < nb) {
    const double next_a = static_cast<double>(i + 1) / na;
    const double next_b = static_cast<double>(j + 1) / nb;
    if (j == nb || (i < na && next_a < next_b)) {
      b.add_cell(inner[i], inner[(i + 1) % na], outer[j % nb], reg);
      ++i;
    } else {
      b.add_cell(inner[i % na], outer[(j + 1) % nb], outer[j], reg);
      ++j;
    }
  }
}

void mark_ring(Builder& b, const std::vector<int>& ring, int m) {
  const int n = static_cast<int>(ring.size());
  for (int j = 0; j < n; ++j) b.add_facet(ring[j], ring[(j + 1) % n], m);
}

int ring_count(double r, double h) { return std::max(6, static_cast<int>(std::lround(kTwoPi * r / h))); }

}  // namespace

Mesh gen_rect_grid(double x0, double y0, double x1, double y1, int nx, int ny) {
  if (!(x1 > x0) || !(y1 > y0)) throw InvalidArgument("gen_rect_grid: zero or negative extent");
  if (nx < 1 || ny < 1) throw InvalidArgument("gen_rect_grid: nx and ny must be positive");
  Builder b;
  const double dx = (x1 - x0) / nx, dy = (y1 - y0) / ny;
  auto grid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) b.add_vertex(Vec2(i == nx ? x1 : x0 + i * dx, j == ny ? y1 : y0 + j * dy));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v00 = grid(i, j), v10 = grid(i + 1, j), v11 = grid(i + 1, j + 1), v01 = grid(i, j + 1);
      const Vec2 mid = 0.25 * (b.vertices[v00] + b.vertices[v10] + b.vertices[v11] + b.vertices[v01]);
      const int c = b.add_vertex(mid);
      b.add_cell(v00, v10, c, 0);
      b.add_cell(v10, v11, c, 0);
      b.add_cell(v11, v01, c, 0);
      b.add_cell(v01, v00, c, 0);
    }
  for (int i = 0; i < nx; ++i) {
    b.add_facet(grid(i, 0), grid(i + 1, 0), marker::kExterior);
    b.add_facet(grid(i + 1, ny), grid(i, ny), marker::kExterior);
  }
  for (int j = 0; j < ny; ++j) {
    b.add_facet(grid(nx, j), grid(nx, j + 1), marker::kExterior);
    b.add_facet(grid(0, j + 1), grid(0, j), marker::kExterior);
  }
  return b.finish();
}

Mesh gen_annulus(const Vec2& center, double r_in, double r_out, int n_r, int n_t) {
  if (!(r_in > 0.0) || !(r_out > r_in)) throw InvalidArgument("gen_annulus: need 0 < r_in < r_out");
  if (n_r < 1 || n_t < 8) throw InvalidArgument("gen_annulus: need n_r >= 1 and n_t >= 8");
  return gen_elliptic_patch(center, r_out, center, r_in, r_in, 0.0, n_r, n_t);
}

Mesh gen_elliptic_patch(const Vec2& center, double r_out, const Vec2& hole_center, double a, double b_axis,
                        double hole_angle, int n_r, int n_t) {
  if (!(a > 0.0) || !(b_axis > 0.0)) throw InvalidArgument("gen_elliptic_patch: semi-axes must be positive");
  if (n_r < 1 || n_t < 8) throw InvalidArgument("gen_elliptic_patch: need n_r >= 1 and n_t >= 8");
  const double ca = std::cos(hole_angle), sa = std::sin(hole_angle);
  Builder b;
  for (int i = 0; i <= n_r; ++i) {
    const double t = static_cast<double>(i) / n_r;
    for (int j = 0; j < n_t; ++j) {
      const double phi = kTwoPi * j / n_t;
      const Vec2 local(a * std::cos(phi), b_axis * std::sin(phi));
      const Vec2 inner = hole_center + Vec2(ca * local.x() - sa * local.y(), sa * local.x() + ca * local.y());
      const Vec2 dir(std::cos(phi + hole_angle), std::sin(phi + hole_angle));
      const Vec2 outer = center + r_out * dir;
      if ((inner - center).norm() >= r_out) throw InvalidArgument("gen_elliptic_patch: hole exceeds patch");
      b.add_vertex(i == 0 ? inner : (i == n_r ? outer : Vec2((1.0 - t) * inner + t * outer)));
    }
  }
  auto id = [&](int i, int j) { return i * n_t + (j % n_t); };
  for (int i = 0; i < n_r; ++i)
    for (int j = 0; j < n_t; ++j) {
      // alternate the diagonal so the pattern has no preferred rotation sense
      if ((i + j) % 2 == 0) {
        b.add_cell(id(i, j), id(i + 1, j), id(i + 1, j + 1), region::kFill);
        b.add_cell(id(i, j), id(i + 1, j + 1), id(i, j + 1), region::kFill);
      } else {
        b.add_cell(id(i, j), id(i + 1, j), id(i, j + 1), region::kFill);
        b.add_cell(id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), region::kFill);
      }
    }
  for (int j = 0; j < n_t; ++j) {
    b.add_facet(id(0, j + 1), id(0, j), marker::kGamma);
    b.add_facet(id(n_r, j), id(n_r, j + 1), marker::kLambda);
  }
  return b.finish();
}

Mesh gen_disk(const Vec2& center, double radius, double h) {
  if (!(radius > 0.0) || !(h > 0.0)) throw InvalidArgument("gen_disk: radius and h must be positive");
  Builder b;
  const int m = std::max(1, static_cast<int>(std::ceil(radius / h)));
  std::vector<int> prev = add_ring(b, center, 0.0, 0);
  for (int k = 1; k <= m; ++k) {
    const double r = radius * k / m;
    auto ring = add_ring(b, center, r, ring_count(r, radius / m));
    zip_rings(b, prev, ring, region::kFill);
    prev = std::move(ring);
  }
  mark_ring(b, prev, marker::kExterior);
  return b.finish();
}

Mesh gen_cable_submesh(const Vec2& center, double r_met, double r_iso, double r_halo, int resolution) {
  if (!(r_met > 0.0) || !(r_iso > r_met) || !(r_halo > r_iso))
    throw InvalidArgument("gen_cable_submesh: need 0 < r_met < r_iso < r_halo");
  if (resolution < 8) throw InvalidArgument("gen_cable_submesh: resolution must be at least 8");
  const double h = kTwoPi * r_halo / resolution;
  Builder b;
  std::vector<int> prev = add_ring(b, center, 0.0, 0);
  double r0 = 0.0;
  const struct {
    double r;
    int reg;
    int mark;
  } layers[] = {{r_met, region::kMetal, marker::kInnerIface},
                {r_iso, region::kInsulation, marker::kOuterIface},
                {r_halo, region::kFill, marker::kLambda}};
  for (const auto& layer : layers) {
    const int m = std::max(1, static_cast<int>(std::ceil((layer.r - r0) / h)));
    for (int k = 1; k <= m; ++k) {
      const double r = k == m ? layer.r : r0 + (layer.r - r0) * k / m;
      auto ring = add_ring(b, center, r, ring_count(r, h));
      zip_rings(b, prev, ring, layer.reg);
      prev = std::move(ring);
    }
    mark_ring(b, prev, layer.mark);
    r0 = layer.r;
  }
  return b.finish();
}

Mesh relabel_facets(const Mesh& mesh, int from, int to) {
  std::vector<int> markers = mesh.facet_marker();
  for (int& m : markers)
    if (m == from) m = to;
  return Mesh(mesh.vertices(), mesh.cells(), mesh.cell_region(), mesh.facets(), std::move(markers));
}

}  // namespace mmshape
