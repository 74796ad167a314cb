#include "mmshape/cutgeom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mmshape/errors.hpp"

namespace mmshape {

namespace {

// Relative area below which a clip result counts as a touch, not a cut.
constexpr double kCutAreaTol = 1e-12;

void dedupe(std::vector<Vec2>& pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& p : pts)
    if (out.empty() || (p - out.back()).norm() > kGeomTol) out.push_back(p);
  while (out.size() > 1 && (out.front() - out.back()).norm() <= kGeomTol) out.pop_back();
  pts = std::move(out);
}

// Keeps the part of `poly` on the left of the directed line a->b.
std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& poly, const Vec2& a, const Vec2& b) {
  const Vec2 e = b - a;
  const double len = e.norm();
  std::vector<Vec2> out;
  if (poly.empty() || len == 0.0) return out;
  out.reserve(poly.size() + 2);
  auto dist = [&](const Vec2& p) { return cross(e, p - a) / len; };
  const std::size_t n = poly.size();
  Vec2 prev = poly[n - 1];
  double d_prev = dist(prev);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& cur = poly[i];
    const double d_cur = dist(cur);
    const bool in_cur = d_cur >= -kGeomTol, in_prev = d_prev >= -kGeomTol;
    if (in_cur != in_prev) {
      const double t = d_prev / (d_prev - d_cur);
      out.push_back(prev + t * (cur - prev));
    }
    if (in_cur) out.push_back(cur);
    prev = cur;
    d_prev = d_cur;
  }
  dedupe(out);
  return out;
}

// Parameter interval of segment a + t (b - a), t in [0,1], inside triangle t.
std::optional<std::pair<double, double>> clip_segment(const Triangle& tri, const Vec2& a, const Vec2& b,
                                                      double tol = kGeomTol) {
  double t0 = 0.0, t1 = 1.0;
  const Vec2 d = b - a;
  for (int k = 0; k < 3; ++k) {
    const Vec2& p = tri[k];
    const Vec2 e = tri[(k + 1) % 3] - p;
    const double len = e.norm();
    const double fa = cross(e, a - p) / len;  // signed distance of a, > 0 inside
    const double fd = cross(e, d) / len;
    if (std::abs(fd) < 1e-300) {
      if (fa < -tol) return std::nullopt;
      continue;
    }
    const double t = (-tol - fa) / fd;
    if (fd > 0.0)
      t0 = std::max(t0, t);
    else
      t1 = std::min(t1, t);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

Vec2 outward_normal(const Mesh& mesh, int cell, int va, int vb) {
  const auto& c = mesh.cells()[cell];
  bool forward = false;
  for (int k = 0; k < 3; ++k)
    if (c[k] == va && c[(k + 1) % 3] == vb) forward = true;
  const Vec2 d = mesh.vertices()[vb] - mesh.vertices()[va];
  Vec2 n(d.y(), -d.x());
  n /= n.norm();
  return forward ? n : Vec2(-n);
}

std::pair<Vec2, Vec2> tri_bounds(const Triangle& t) {
  Vec2 lo = t[0].cwiseMin(t[1]).cwiseMin(t[2]);
  Vec2 hi = t[0].cwiseMax(t[1]).cwiseMax(t[2]);
  return {lo, hi};
}

bool boxes_overlap(const std::pair<Vec2, Vec2>& a, const std::pair<Vec2, Vec2>& b) {
  return a.first.x() <= b.second.x() + kGeomTol && b.first.x() <= a.second.x() + kGeomTol &&
         a.first.y() <= b.second.y() + kGeomTol && b.first.y() <= a.second.y() + kGeomTol;
}

}  // namespace

double ConvexPolygon::area() const { return empty() ? 0.0 : signed_area(vertices); }

bool ConvexPolygon::contains(const Vec2& p, double tol) const {
  if (empty()) return false;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = vertices[(i + 1) % n] - vertices[i];
    if (cross(e, p - vertices[i]) / e.norm() < -tol) return false;
  }
  return true;
}

std::pair<Vec2, Vec2> ConvexPolygon::bounds() const {
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

ConvexPolygon footprint_polygon(const Mesh& submesh) {
  const auto loops = boundary_loops(submesh);
  for (const auto& loop : loops) {
    if (loop.signed_area <= 0.0) continue;
    if (!std::all_of(loop.markers.begin(), loop.markers.end(), [](int m) { return m == marker::kLambda; })) continue;
    ConvexPolygon poly;
    for (int v : loop.vertices) poly.vertices.push_back(submesh.vertices()[v]);
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 e0 = poly.vertices[(i + 1) % n] - poly.vertices[i];
      const Vec2 e1 = poly.vertices[(i + 2) % n] - poly.vertices[(i + 1) % n];
      if (cross(e0, e1) < -kGeomTol * e0.norm() * e1.norm())
        throw UnsupportedGeometry("footprint_polygon: outer loop is not convex");
    }
    return poly;
  }
  throw UnsupportedGeometry("footprint_polygon: submesh has no outer loop marked 2");
}

ConvexPolygon clip_convex(const ConvexPolygon& subject, const ConvexPolygon& clipper) {
  ConvexPolygon out;
  if (subject.empty() || clipper.empty()) return out;
  if (!boxes_overlap(subject.bounds(), clipper.bounds())) return out;
  std::vector<Vec2> cur = subject.vertices;
  const std::size_t n = clipper.vertices.size();
  for (std::size_t i = 0; i < n && cur.size() >= 3; ++i)
    cur = clip_half_plane(cur, clipper.vertices[i], clipper.vertices[(i + 1) % n]);
  if (cur.size() < 3 || signed_area(cur) <= 0.0) return out;
  out.vertices = std::move(cur);
  return out;
}

ConvexPolygon clip_triangle(const Triangle& tri, const ConvexPolygon& poly) {
  ConvexPolygon t;
  t.vertices = {tri[0], tri[1], tri[2]};
  if (signed_area(tri[0], tri[1], tri[2]) < 0.0) std::swap(t.vertices[1], t.vertices[2]);
  // Clip the (usually larger) polygon by the three triangle edges.
  return clip_convex(poly, t);
}

QuadratureRule polygon_quadrature(const ConvexPolygon& poly, int degree) {
  if (degree < 1 || degree > 6) throw InvalidArgument("polygon_quadrature: degree must be in 1..6");
  QuadratureRule rule;
  if (poly.empty() || std::abs(poly.area()) < 1e-14) return rule;
  const auto& v = poly.vertices;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const Triangle fan{v[0], v[i], v[i + 1]};
    if (signed_area(fan[0], fan[1], fan[2]) <= 0.0) continue;
    rule.append(triangle_quadrature(fan, degree));
  }
  return rule;
}

bool triangle_contains(const Triangle& t, const Vec2& p, double tol) {
  for (int k = 0; k < 3; ++k) {
    const Vec2 e = t[(k + 1) % 3] - t[k];
    if (cross(e, p - t[k]) / e.norm() < -tol) return false;
  }
  return true;
}

CellLocator::CellLocator(const Mesh& mesh) : mesh_(&mesh) {
  if (mesh.num_cells() == 0) return;
  Vec2 lo = mesh.vertices().front(), hi = lo;
  for (const auto& v : mesh.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Vec2 ext = (hi - lo).cwiseMax(Vec2::Constant(1e-9));
  const double per_bin = ext.x() * ext.y() / std::max<std::size_t>(1, mesh.num_cells());
  const double side = std::sqrt(per_bin) * 1.5;
  nx_ = std::clamp(static_cast<int>(ext.x() / side) + 1, 1, 4096);
  ny_ = std::clamp(static_cast<int>(ext.y() / side) + 1, 1, 4096);
  origin_ = lo;
  cell_w_ = ext.x() / nx_;
  cell_h_ = ext.y() / ny_;
  bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const auto [blo, bhi] = tri_bounds(mesh.triangle(c));
    const int i0 = std::clamp(static_cast<int>((blo.x() - origin_.x()) / cell_w_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((bhi.x() - origin_.x()) / cell_w_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((blo.y() - origin_.y()) / cell_h_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((bhi.y() - origin_.y()) / cell_h_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) bins_[static_cast<std::size_t>(j) * nx_ + i].push_back(c);
  }
}

std::vector<int> CellLocator::candidates(const Vec2& lo, const Vec2& hi) const {
  std::vector<int> out;
  if (bins_.empty()) return out;
  const double pad = 1e-9;
  const int i0 = std::clamp(static_cast<int>(std::floor((lo.x() - pad - origin_.x()) / cell_w_)), 0, nx_ - 1);
  const int i1 = std::clamp(static_cast<int>(std::floor((hi.x() + pad - origin_.x()) / cell_w_)), 0, nx_ - 1);
  const int j0 = std::clamp(static_cast<int>(std::floor((lo.y() - pad - origin_.y()) / cell_h_)), 0, ny_ - 1);
  const int j1 = std::clamp(static_cast<int>(std::floor((hi.y() + pad - origin_.y()) / cell_h_)), 0, ny_ - 1);
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      const auto& bin = bins_[static_cast<std::size_t>(j) * nx_ + i];
      out.insert(out.end(), bin.begin(), bin.end());
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> CellLocator::locate_all(const Vec2& p, double tol) const {
  std::vector<int> out;
  for (int c : candidates(p, p))
    if (triangle_contains(mesh_->triangle(c), p, tol)) out.push_back(c);
  return out;
}

std::optional<int> CellLocator::locate(const Vec2& p, double tol) const {
  for (int c : candidates(p, p))
    if (triangle_contains(mesh_->triangle(c), p, tol)) return c;
  return std::nullopt;
}

std::optional<int> point_locate(const Mesh& mesh, const Vec2& p) {
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c)
    if (triangle_contains(mesh.triangle(c), p)) return c;
  return std::nullopt;
}

std::size_t Classification::count(CellStatus s) const { return std::count(status.begin(), status.end(), s); }

Classification classify_cells(const Mesh& background, const std::vector<ConvexPolygon>& footprints,
                              const std::vector<const Mesh*>& submeshes) {
  for (std::size_t i = 0; i < footprints.size(); ++i)
    for (std::size_t j = i + 1; j < footprints.size(); ++j)
      if (!clip_convex(footprints[i], footprints[j]).empty())
        throw UnsupportedConfiguration("classify_cells: footprints " + std::to_string(i) + " and " +
                                       std::to_string(j) + " overlap");

  const std::size_t nc = background.num_cells();
  Classification cls;
  cls.status.assign(nc, CellStatus::Uncut);
  cls.owner.assign(nc, -1);
  cls.hidden.assign(nc, {});
  const CellLocator locator(background);

  for (std::size_t f = 0; f < footprints.size(); ++f) {
    const auto& fp = footprints[f];
    const auto [lo, hi] = fp.bounds();
    for (int c : locator.candidates(lo, hi)) {
      const Triangle t = background.triangle(c);
      const double area = background.cell_area(c);
      const bool inside = fp.contains(t[0]) && fp.contains(t[1]) && fp.contains(t[2]);
      ConvexPolygon hidden;
      if (!inside) {
        hidden = clip_triangle(t, fp);
        if (hidden.area() <= kCutAreaTol * area) continue;
      }
      if (cls.owner[c] >= 0)
        throw UnsupportedConfiguration("classify_cells: background cell " + std::to_string(c) +
                                       " touches two footprints");
      cls.owner[c] = static_cast<int>(f);
      // a cell with a vertex outside stays cut however thin its visible sliver is,
      // so every piece of the submesh boundary keeps a non-covered partner cell
      if (inside) {
        cls.status[c] = CellStatus::Covered;
      } else {
        cls.status[c] = CellStatus::Cut;
        cls.hidden[c] = std::move(hidden);
      }
    }
  }

  // Halo rule: the cut front may not reach hole or material interfaces of its owner.
  for (std::size_t s = 0; s < submeshes.size() && s < footprints.size(); ++s) {
    const Mesh& sub = *submeshes[s];
    std::vector<int> guarded;
    for (int f = 0; f < static_cast<int>(sub.num_facets()); ++f)
      if (sub.facet_marker()[f] != marker::kLambda) guarded.push_back(f);
    if (guarded.empty()) continue;
    for (int c = 0; c < static_cast<int>(nc); ++c) {
      if (cls.status[c] != CellStatus::Cut || cls.owner[c] != static_cast<int>(s)) continue;
      const Triangle t = background.triangle(c);
      const auto box = tri_bounds(t);
      for (int f : guarded) {
        const Vec2& a = sub.vertices()[sub.facets()[f][0]];
        const Vec2& b = sub.vertices()[sub.facets()[f][1]];
        if (!boxes_overlap(box, {a.cwiseMin(b), a.cwiseMax(b)})) continue;
        if (clip_segment(t, a, b))
          throw UnsupportedConfiguration(
              "classify_cells: halo thinner than cut front (cut cell " + std::to_string(c) +
              " reaches a marked facet of submesh " + std::to_string(s) +
              "; the halo should be at least three background cells wide)");
      }
    }
  }
  return cls;
}

CutQuadrature build_cut_quadrature(const Mesh& background, const Classification& cls, int degree) {
  CutQuadrature q;
  q.degree = degree;
  for (int c = 0; c < static_cast<int>(background.num_cells()); ++c) {
    if (cls.status[c] != CellStatus::Cut) continue;
    q.cells.push_back(c);
    q.full.push_back(triangle_quadrature(background.triangle(c), degree));
    q.hidden.push_back(polygon_quadrature(cls.hidden[c], degree));
  }
  return q;
}

std::vector<InterfaceSegment> interface_segments(const Mesh& submesh, const Mesh& background,
                                                 const Classification& cls, const CellLocator& locator) {
  std::vector<InterfaceSegment> out;
  const double h = 0.5 * (background.h_max() + submesh.h_max());
  for (int f = 0; f < static_cast<int>(submesh.num_facets()); ++f) {
    if (submesh.facet_marker()[f] != marker::kLambda) continue;
    const int va = submesh.facets()[f][0], vb = submesh.facets()[f][1];
    const Vec2& a = submesh.vertices()[va];
    const Vec2& b = submesh.vertices()[vb];
    const int sub_cell = submesh.facet_cells(f).front();
    const Vec2 n = outward_normal(submesh, sub_cell, va, vb);
    const double len = (b - a).norm();
    const auto cands = locator.candidates(a.cwiseMin(b), a.cwiseMax(b));

    std::vector<double> ts{0.0, 1.0};
    for (int c : cands)
      if (auto iv = clip_segment(background.triangle(c), a, b, 0.0)) {
        ts.push_back(std::clamp(iv->first, 0.0, 1.0));
        ts.push_back(std::clamp(iv->second, 0.0, 1.0));
      }
    std::sort(ts.begin(), ts.end());
    std::vector<double> breaks;
    for (double t : ts)
      if (breaks.empty() || (t - breaks.back()) * len > kGeomTol) breaks.push_back(t);
    if (breaks.back() < 1.0) breaks.back() = 1.0;

    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
      const Vec2 p0 = a + breaks[k] * (b - a);
      const Vec2 p1 = a + breaks[k + 1] * (b - a);
      const Vec2 mid = 0.5 * (p0 + p1);
      int chosen = -1;
      bool only_covered = false;
      for (int c : cands) {
        if (!triangle_contains(background.triangle(c), mid, 1e-10)) continue;
        if (cls.status[c] == CellStatus::Covered) {
          only_covered = true;
          continue;
        }
        chosen = c;
        break;
      }
      if (chosen < 0) {
        if (only_covered)
          throw ConsistencyError("interface_segments: segment midpoint lies in a covered background cell");
        throw UnsupportedConfiguration("interface_segments: submesh boundary leaves the background mesh");
      }
      InterfaceSegment seg;
      seg.a = p0;
      seg.b = p1;
      seg.normal = n;
      seg.submesh_facet = f;
      seg.submesh_cell = sub_cell;
      seg.background_cell = chosen;
      seg.length = (p1 - p0).norm();
      seg.h = h;
      out.push_back(seg);
    }
  }
  return out;
}

std::vector<InterfaceSegment> interface_segments(const Mesh& submesh, const Mesh& background,
                                                 const Classification& cls) {
  return interface_segments(submesh, background, cls, CellLocator(background));
}

std::vector<OverlapPiece> overlap_pieces(const Mesh& submesh, const Mesh& background, const Classification& cls,
                                         int submesh_index, const CellLocator& locator) {
  std::vector<OverlapPiece> out;
  for (int c = 0; c < static_cast<int>(background.num_cells()); ++c) {
    if (cls.status[c] != CellStatus::Cut || cls.owner[c] != submesh_index) continue;
    const ConvexPolygon& hidden = cls.hidden[c];
    const auto [lo, hi] = hidden.bounds();
    double sum = 0.0;
    for (int s : locator.candidates(lo, hi)) {
      ConvexPolygon piece = clip_triangle(submesh.triangle(s), hidden);
      if (piece.empty()) continue;
      sum += piece.area();
      out.push_back({std::move(piece), c, s});
    }
    const double target = hidden.area();
    if (std::abs(sum - target) > 1e-8 * std::max(target, 1e-300) && std::abs(sum - target) > 1e-15)
      throw ConsistencyError("overlap_pieces: pieces of background cell " + std::to_string(c) +
                             " do not tile its hidden part");
  }
  return out;
}

std::vector<OverlapPiece> overlap_pieces(const Mesh& submesh, const Mesh& background, const Classification& cls,
                                         int submesh_index) {
  return overlap_pieces(submesh, background, cls, submesh_index, CellLocator(submesh));
}

PartitionReport partition_report(const Mesh& background, const Classification& cls) {
  PartitionReport r;
  for (int c = 0; c < static_cast<int>(background.num_cells()); ++c) {
    const double a = background.cell_area(c);
    switch (cls.status[c]) {
      case CellStatus::Uncut:
        r.visible += a;
        break;
      case CellStatus::Cut: {
        const double h = cls.hidden[c].area();
        r.hidden += h;
        r.visible += a - h;
        break;
      }
      case CellStatus::Covered:
        r.covered += a;
        break;
    }
  }
  return r;
}

void write_classification_svg(const Mesh& background, const Classification& cls,
                              const std::vector<ConvexPolygon>& footprints, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  Vec2 lo = background.vertices().front(), hi = lo;
  for (const auto& v : background.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double scale = 800.0 / std::max(hi.x() - lo.x(), hi.y() - lo.y());
  auto px = [&](const Vec2& p) {
    return std::to_string((p.x() - lo.x()) * scale) + "," + std::to_string((hi.y() - p.y()) * scale);
  };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (hi.x() - lo.x()) * scale << "\" height=\""
      << (hi.y() - lo.y()) * scale << "\">\n";
  for (int c = 0; c < static_cast<int>(background.num_cells()); ++c) {
    const char* fill = cls.status[c] == CellStatus::Uncut ? "#dde8f5"
                       : cls.status[c] == CellStatus::Cut ? "#f5c26b"
                                                          : "#9a9a9a";
    const auto t = background.triangle(c);
    out << "<polygon points=\"" << px(t[0]) << ' ' << px(t[1]) << ' ' << px(t[2]) << "\" fill=\"" << fill
        << "\" stroke=\"black\" stroke-width=\"0.3\"/>\n";
  }
  for (const auto& fp : footprints) {
    out << "<polygon points=\"";
    for (const auto& v : fp.vertices) out << px(v) << ' ';
    out << "\" fill=\"none\" stroke=\"red\" stroke-width=\"1\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace mmshape
