#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "mmshape/mesh.hpp"
#include "mmshape/quadrature.hpp"

namespace mmshape {

/// Absolute tolerance for coordinates of order one.
inline constexpr double kGeomTol = 1e-12;

/// Counter-clockwise convex polygon; empty when the vertex list is empty.
struct ConvexPolygon {
  std::vector<Vec2> vertices;

  bool empty() const { return vertices.size() < 3; }
  double area() const;
  bool contains(const Vec2& p, double tol = kGeomTol) const;
  /// Axis-aligned bounding box as (min, max).
  std::pair<Vec2, Vec2> bounds() const;
};

/// CCW polygon from the submesh's outer loop (marker 2). Throws
/// UnsupportedGeometry when that loop is not convex.
ConvexPolygon footprint_polygon(const Mesh& submesh);

/// Intersection of two convex polygons (Sutherland-Hodgman).
ConvexPolygon clip_convex(const ConvexPolygon& subject, const ConvexPolygon& clipper);
ConvexPolygon clip_triangle(const Triangle& tri, const ConvexPolygon& poly);

/// Fan-triangulated rule of the given degree (1..6) over a convex polygon.
QuadratureRule polygon_quadrature(const ConvexPolygon& poly, int degree);

/// Uniform-bin spatial index over the cells of a mesh.
class CellLocator {
 public:
  explicit CellLocator(const Mesh& mesh);

  /// Lowest-index cell whose closed triangle contains p (barycentric test with slack).
  std::optional<int> locate(const Vec2& p, double tol = kGeomTol) const;
  /// All cells whose closed triangle contains p, ascending.
  std::vector<int> locate_all(const Vec2& p, double tol = kGeomTol) const;
  /// Cells whose bounding box intersects [lo, hi], ascending and unique.
  std::vector<int> candidates(const Vec2& lo, const Vec2& hi) const;

 private:
  const Mesh* mesh_;
  Vec2 origin_ = Vec2::Zero();
  double cell_w_ = 1.0, cell_h_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> bins_;
};

std::optional<int> point_locate(const Mesh& mesh, const Vec2& p);

/// Barycentric containment with absolute slack.
bool triangle_contains(const Triangle& t, const Vec2& p, double tol = kGeomTol);

enum class CellStatus { Uncut, Cut, Covered };

struct Classification {
  std::vector<CellStatus> status;  // per background cell
  std::vector<int> owner;          // owning submesh for Cut/Covered cells, -1 otherwise
  std::vector<ConvexPolygon> hidden;  // K ∩ footprint for Cut cells, empty otherwise

  std::size_t count(CellStatus s) const;
};

/// Classifies background cells against pairwise-disjoint footprints.
///
/// `submeshes` (placed in world coordinates) are optional; when given, a cut
/// cell that touches any non-Λ marked facet of its owner raises
/// UnsupportedConfiguration (the halo is thinner than the cut front).
Classification classify_cells(const Mesh& background, const std::vector<ConvexPolygon>& footprints,
                              const std::vector<const Mesh*>& submeshes = {});

/// Per cut cell quadrature: full-cell rule and hidden-part rule.
struct CutQuadrature {
  int degree = 4;
  std::vector<int> cells;
  std::vector<QuadratureRule> hidden;
  std::vector<QuadratureRule> full;
};

CutQuadrature build_cut_quadrature(const Mesh& background, const Classification& cls, int degree);

struct InterfaceSegment {
  Vec2 a, b;
  Vec2 normal;          // unit, pointing out of the submesh
  int submesh_facet = -1;
  int submesh_cell = -1;
  int background_cell = -1;
  double length = 0.0;
  double h = 0.0;       // (h0 + h1) / 2
};

/// Splits every marker-2 facet of the submesh at background cell edges.
std::vector<InterfaceSegment> interface_segments(const Mesh& submesh, const Mesh& background,
                                                 const Classification& cls, const CellLocator& background_locator);
std::vector<InterfaceSegment> interface_segments(const Mesh& submesh, const Mesh& background,
                                                 const Classification& cls);

struct OverlapPiece {
  ConvexPolygon polygon;
  int background_cell = -1;
  int submesh_cell = -1;
};

/// Hidden part of every cut cell owned by `submesh_index`, tiled by submesh cells.
std::vector<OverlapPiece> overlap_pieces(const Mesh& submesh, const Mesh& background, const Classification& cls,
                                         int submesh_index, const CellLocator& submesh_locator);
std::vector<OverlapPiece> overlap_pieces(const Mesh& submesh, const Mesh& background, const Classification& cls,
                                         int submesh_index = 0);

struct PartitionReport {
  double visible = 0.0;
  double hidden = 0.0;
  double covered = 0.0;
  double total() const { return visible + hidden + covered; }
};

PartitionReport partition_report(const Mesh& background, const Classification& cls);

/// Uncut / cut / covered cells in three fill colours.
void write_classification_svg(const Mesh& background, const Classification& cls,
                              const std::vector<ConvexPolygon>& footprints, const std::filesystem::path& path);

}  // namespace mmshape
