#include "mmshape/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mmshape/errors.hpp"

namespace mmshape {

namespace {

std::uint64_t edge_key(int a, int b) {
  auto lo = static_cast<std::uint64_t>(std::min(a, b));
  auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

using EdgeCells = std::unordered_map<std::uint64_t, std::vector<int>>;

EdgeCells edge_cell_map(const std::vector<Mesh::Cell>& cells) {
  EdgeCells map;
  map.reserve(cells.size() * 2);
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
    const auto& t = cells[c];
    for (int k = 0; k < 3; ++k) map[edge_key(t[k], t[(k + 1) % 3])].push_back(c);
  }
  return map;
}

}  // namespace

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) { return 0.5 * cross(b - a, c - a); }

double signed_area(std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += cross(polygon[i], polygon[(i + 1) % n]);
  return 0.5 * s;
}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<Cell> cells, std::vector<int> cell_region,
           std::vector<Facet> facets, std::vector<int> facet_marker)
    : vertices_(std::move(vertices)),
      cells_(std::move(cells)),
      cell_region_(std::move(cell_region)),
      facets_(std::move(facets)),
      facet_marker_(std::move(facet_marker)) {
  if (cell_region_.size() != cells_.size())
    throw InvalidArgument("mesh: region tag count does not match cell count");
  if (facet_marker_.size() != facets_.size())
    throw InvalidArgument("mesh: facet marker count does not match facet count");
  const int nv = static_cast<int>(vertices_.size());
  for (auto& c : cells_) {
    for (int v : c)
      if (v < 0 || v >= nv) throw InvalidArgument("mesh: cell references a missing vertex");
    const double a = signed_area(vertices_[c[0]], vertices_[c[1]], vertices_[c[2]]);
    if (a == 0.0) throw InvalidArgument("mesh: degenerate cell");
    if (a < 0.0) std::swap(c[1], c[2]);
  }
  for (const auto& f : facets_)
    for (int v : f)
      if (v < 0 || v >= nv) throw InvalidArgument("mesh: facet references a missing vertex");
  build_topology();
}

void Mesh::build_topology() {
  const auto edges = edge_cell_map(cells_);
  facet_cells_.assign(facets_.size(), {});
  for (std::size_t f = 0; f < facets_.size(); ++f) {
    auto it = edges.find(edge_key(facets_[f][0], facets_[f][1]));
    if (it == edges.end()) throw TopologyError("mesh: facet " + std::to_string(f) + " is not a cell edge");
    facet_cells_[f] = it->second;
    const int m = facet_marker_[f];
    const auto& fc = it->second;
    if ((m == marker::kInnerIface || m == marker::kOuterIface) &&
        (fc.size() != 2 || cell_region_[fc[0]] == cell_region_[fc[1]]))
      throw TopologyError("mesh: interface facet " + std::to_string(f) + " does not separate two regions");
    if ((m == marker::kGamma || m == marker::kLambda || m == marker::kExterior) && fc.size() != 1)
      throw TopologyError("mesh: boundary facet " + std::to_string(f) + " is interior");
  }
  h_max_ = 0.0;
  for (int c = 0; c < static_cast<int>(cells_.size()); ++c) h_max_ = std::max(h_max_, cell_diameter(c));
}

Triangle Mesh::triangle(int cell) const {
  const auto& c = cells_[cell];
  return {vertices_[c[0]], vertices_[c[1]], vertices_[c[2]]};
}

double Mesh::cell_area(int cell) const {
  const auto& c = cells_[cell];
  return signed_area(vertices_[c[0]], vertices_[c[1]], vertices_[c[2]]);
}

double Mesh::cell_diameter(int cell) const {
  const auto t = triangle(cell);
  return std::max({(t[1] - t[0]).norm(), (t[2] - t[1]).norm(), (t[0] - t[2]).norm()});
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int c = 0; c < static_cast<int>(cells_.size()); ++c) a += cell_area(c);
  return a;
}

std::vector<int> Mesh::facets_with_marker(int m) const {
  std::vector<int> out;
  for (int f = 0; f < static_cast<int>(facets_.size()); ++f)
    if (facet_marker_[f] == m) out.push_back(f);
  return out;
}

Mesh Mesh::with_vertices(std::vector<Vec2> vertices) const {
  if (vertices.size() != vertices_.size()) throw InvalidArgument("mesh: vertex count mismatch");
  Mesh out = *this;
  out.vertices_ = std::move(vertices);
  out.h_max_ = 0.0;
  for (int c = 0; c < static_cast<int>(out.cells_.size()); ++c)
    out.h_max_ = std::max(out.h_max_, out.cell_diameter(c));
  return out;
}

bool operator==(const Mesh& a, const Mesh& b) {
  return a.vertices_ == b.vertices_ && a.cells_ == b.cells_ && a.cell_region_ == b.cell_region_ &&
         a.facets_ == b.facets_ && a.facet_marker_ == b.facet_marker_;
}

Vec2 RigidPose::apply(const Vec2& x) const {
  if (angle == 0.0) return x + translation;
  const double c = std::cos(angle), s = std::sin(angle);
  const Vec2 d = x - center;
  return Vec2(c * d.x() - s * d.y(), s * d.x() + c * d.y()) + center + translation;
}

RigidPose RigidPose::inverse() const { return RigidPose{-angle, center + translation, -translation}; }

Mesh apply_rigid(const Mesh& mesh, const RigidPose& pose) {
  if (pose.is_identity()) return mesh;
  std::vector<Vec2> v;
  v.reserve(mesh.num_vertices());
  for (const auto& p : mesh.vertices()) v.push_back(pose.apply(p));
  return mesh.with_vertices(std::move(v));
}

double radius_ratio(const Triangle& t) {
  const double a = (t[1] - t[0]).norm(), b = (t[2] - t[1]).norm(), c = (t[0] - t[2]).norm();
  const double area = std::abs(signed_area(t[0], t[1], t[2]));
  const double denom = (a + b + c) * a * b * c;
  if (denom == 0.0) return 0.0;
  return std::clamp(16.0 * area * area / denom, 0.0, 1.0);
}

double radius_ratio(const Mesh& mesh, int cell) { return radius_ratio(mesh.triangle(cell)); }

std::vector<BoundaryLoop> boundary_loops(const Mesh& mesh) {
  const auto edges = edge_cell_map(mesh.cells());
  std::unordered_map<std::uint64_t, int> marker_of;
  for (int f = 0; f < static_cast<int>(mesh.num_facets()); ++f)
    marker_of[edge_key(mesh.facets()[f][0], mesh.facets()[f][1])] = mesh.facet_marker()[f];

  // Directed boundary edges, oriented as in their (CCW) cell.
  std::unordered_map<int, std::vector<int>> next;  // start vertex -> end vertices
  std::size_t n_edges = 0;
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const auto& t = mesh.cells()[c];
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      const auto& owners = edges.at(edge_key(a, b));
      if (owners.size() > 2) throw TopologyError("boundary_loops: non-manifold edge");
      if (owners.size() == 1) {
        next[a].push_back(b);
        ++n_edges;
      }
    }
  }
  for (const auto& [v, outs] : next)
    if (outs.size() != 1) throw TopologyError("boundary_loops: boundary is not a disjoint union of simple loops");

  std::vector<int> starts;
  starts.reserve(next.size());
  for (const auto& [v, outs] : next) starts.push_back(v);
  std::sort(starts.begin(), starts.end());

  std::unordered_map<int, bool> used;
  std::vector<BoundaryLoop> loops;
  std::size_t visited = 0;
  for (int s : starts) {
    if (used[s]) continue;
    BoundaryLoop loop;
    int v = s;
    do {
      used[v] = true;
      loop.vertices.push_back(v);
      auto it = next.find(v);
      if (it == next.end()) throw TopologyError("boundary_loops: open boundary chain");
      const int w = it->second.front();
      auto m = marker_of.find(edge_key(v, w));
      loop.markers.push_back(m == marker_of.end() ? 0 : m->second);
      ++visited;
      v = w;
    } while (v != s && visited <= n_edges);
    if (v != s) throw TopologyError("boundary_loops: open boundary chain");
    std::vector<Vec2> pts;
    pts.reserve(loop.vertices.size());
    for (int i : loop.vertices) pts.push_back(mesh.vertices()[i]);
    loop.signed_area = signed_area(pts);
    loops.push_back(std::move(loop));
  }
  std::sort(loops.begin(), loops.end(),
            [](const BoundaryLoop& a, const BoundaryLoop& b) { return a.signed_area > b.signed_area; });
  return loops;
}

}  // namespace mmshape
