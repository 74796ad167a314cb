#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace mmshape {

using Vec2 = Eigen::Vector2d;
using Triangle = std::array<Vec2, 3>;

/// Facet marker vocabulary shared by every problem.
namespace marker {
inline constexpr int kGamma = 1;         // physical hole boundary
inline constexpr int kLambda = 2;        // outer loop of a submesh
inline constexpr int kInnerIface = 3;    // metal / insulation interface
inline constexpr int kOuterIface = 4;    // insulation / fill interface
inline constexpr int kExterior = 10;     // exterior boundary of the domain
}  // namespace marker

namespace region {
inline constexpr int kFill = 0;
inline constexpr int kInsulation = 1;
inline constexpr int kMetal = 2;
}  // namespace region

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);
double signed_area(std::span<const Vec2> polygon);

/// 2D triangle mesh with region tags and marked facets.
///
/// Cells are stored counter-clockwise; the constructor repairs clockwise
/// input by swapping two indices and rejects degenerate cells. After
/// construction the mesh is an immutable value.
class Mesh {
 public:
  using Cell = std::array<int, 3>;
  using Facet = std::array<int, 2>;

  Mesh() = default;
  Mesh(std::vector<Vec2> vertices, std::vector<Cell> cells, std::vector<int> cell_region,
       std::vector<Facet> facets, std::vector<int> facet_marker);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<int>& cell_region() const { return cell_region_; }
  const std::vector<Facet>& facets() const { return facets_; }
  const std::vector<int>& facet_marker() const { return facet_marker_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_cells() const { return cells_.size(); }
  std::size_t num_facets() const { return facets_.size(); }

  Triangle triangle(int cell) const;
  double cell_area(int cell) const;
  double cell_diameter(int cell) const;
  double h_max() const { return h_max_; }
  double total_area() const;

  /// Cells sharing the facet (one for boundary facets, two for interior ones).
  const std::vector<int>& facet_cells(int facet) const { return facet_cells_[facet]; }

  /// Indices of facets carrying `m`.
  std::vector<int> facets_with_marker(int m) const;

  /// Returns a copy with new vertex coordinates and identical connectivity.
  Mesh with_vertices(std::vector<Vec2> vertices) const;

  friend bool operator==(const Mesh& a, const Mesh& b);

 private:
  void build_topology();

  std::vector<Vec2> vertices_;
  std::vector<Cell> cells_;
  std::vector<int> cell_region_;
  std::vector<Facet> facets_;
  std::vector<int> facet_marker_;
  std::vector<std::vector<int>> facet_cells_;
  double h_max_ = 0.0;
};

/// x -> R(angle) (x - center) + center + translation
struct RigidPose {
  double angle = 0.0;
  Vec2 center = Vec2::Zero();
  Vec2 translation = Vec2::Zero();

  Vec2 apply(const Vec2& x) const;
  RigidPose inverse() const;
  bool is_identity() const { return angle == 0.0 && translation.isZero(0.0); }
};

Mesh apply_rigid(const Mesh& mesh, const RigidPose& pose);

/// 2 * inradius / circumradius; 1 for equilateral, 0 for degenerate cells.
double radius_ratio(const Mesh& mesh, int cell);
double radius_ratio(const Triangle& tri);

struct BoundaryLoop {
  std::vector<int> vertices;  // closed: edge k joins vertices[k] and vertices[(k+1) % n]
  std::vector<int> markers;   // marker of edge k, 0 when the edge is unmarked
  double signed_area = 0.0;   // > 0 for outer loops, < 0 for holes
};

/// Oriented boundary loops, each edge traversed with the mesh on its left.
std::vector<BoundaryLoop> boundary_loops(const Mesh& mesh);

// Generators ---------------------------------------------------------------

/// Crisscross grid: every quad is split into four triangles through its centroid.
Mesh gen_rect_grid(double x0, double y0, double x1, double y1, int nx, int ny);

/// Structured polar annulus. Inner loop carries marker 1, outer loop marker 2.
Mesh gen_annulus(const Vec2& center, double r_in, double r_out, int n_r, int n_t);

/// Circular patch of radius `r_out` around `center` with an elliptic hole.
/// The hole is centered at `hole_center` with semi-axes (a, b), major axis along
/// `hole_angle`; its boundary is a polygon with `n_t` vertices (marker 1).
Mesh gen_elliptic_patch(const Vec2& center, double r_out, const Vec2& hole_center, double a, double b,
                        double hole_angle, int n_r, int n_t);

/// Disk of radius `radius` meshed with concentric rings of spacing about `h`.
/// Boundary marker 10, region 0.
Mesh gen_disk(const Vec2& center, double radius, double h);

/// Internal cable: metal core (region 2), insulation (1) and fill halo (0).
/// Facet markers: 3 at r_met, 4 at r_iso, 2 at r_halo. `resolution` is the
/// number of segments on the r_halo circle.
Mesh gen_cable_submesh(const Vec2& center, double r_met, double r_iso, double r_halo, int resolution);

/// Copy of `mesh` with every facet marker `from` replaced by `to`.
Mesh relabel_facets(const Mesh& mesh, int from, int to);

// I/O ----------------------------------------------------------------------

void write_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh read_mesh(const std::filesystem::path& path);

}  // namespace mmshape
