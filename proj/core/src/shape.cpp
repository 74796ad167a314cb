#include "mmshape/shape.hpp"

#include <cmath>
#include <map>

#include "mmshape/errors.hpp"

namespace mmshape {

namespace {

// Unit normal of facet (a, b) pointing away from `cell`.
Vec2 normal_out_of(const Mesh& mesh, int cell, int facet) {
  const auto& e = mesh.facets()[facet];
  const Vec2& a = mesh.vertices()[e[0]];
  const Vec2& b = mesh.vertices()[e[1]];
  Vec2 n(b.y() - a.y(), a.x() - b.x());
  n.normalize();
  Vec2 centroid = Vec2::Zero();
  for (int v : mesh.cells()[cell]) centroid += mesh.vertices()[v];
  centroid /= 3.0;
  if (n.dot(centroid - a) > 0.0) n = -n;
  return n;
}

DensityFacet make_facet(const Mesh& mesh, int block, int facet, const Vec2& normal) {
  DensityFacet d;
  d.block = block;
  d.facet = facet;
  d.a = mesh.vertices()[mesh.facets()[facet][0]];
  d.b = mesh.vertices()[mesh.facets()[facet][1]];
  d.mid = 0.5 * (d.a + d.b);
  d.normal = normal;
  d.length = (d.b - d.a).norm();
  return d;
}

}  // namespace

GradientDensity& GradientDensity::operator+=(const GradientDensity& other) {
  if (empty()) {
    *this = other;
    return *this;
  }
  if (other.facets.size() != facets.size())
    throw InvalidArgument("GradientDensity: cannot add densities on different boundaries");
  for (std::size_t k = 0; k < facets.size(); ++k) {
    if (facets[k].block != other.facets[k].block || facets[k].facet != other.facets[k].facet)
      throw InvalidArgument("GradientDensity: cannot add densities on different boundaries");
    facets[k].g += other.facets[k].g;
  }
  return *this;
}

GradientDensity GradientDensity::scaled(double factor) const {
  GradientDensity out = *this;
  for (auto& f : out.facets) f.g *= factor;
  return out;
}

void GradientDensity::append(const GradientDensity& other) {
  facets.insert(facets.end(), other.facets.begin(), other.facets.end());
}

double GradientDensity::max_abs() const {
  double m = 0.0;
  for (const auto& f : facets) m = std::max(m, std::abs(f.g));
  return m;
}

namespace {

// Boundary fluxes λ∂ₙu of the state and adjoint recovered from the residuals of
// their discrete equations, restricted to the cells accepted by `side`. With n
// pointing out of those cells, the residual row of vertex i equals ∫ λ∂ₙu φᵢ
// over the facets, which is solved for a continuous P1 flux on the facets.
struct RecoveredFlux {
  std::map<int, int> local;  // mesh vertex -> flux index
  Vector state, adjoint;
};

RecoveredFlux recover_fluxes(const Mesh& mesh, const ProblemSpec& spec, const Vector& t, const Vector& l,
                             const std::vector<int>& facets, const std::function<bool(int)>& side) {
  RecoveredFlux out;
  for (int f : facets)
    for (int v : mesh.facets()[f]) out.local.emplace(v, 0);
  int k = 0;
  for (auto& [v, i] : out.local) i = k++;

  const auto& verts = mesh.vertices();
  const auto& cells = mesh.cells();
  Vector rt = Vector::Zero(k), rl = Vector::Zero(k);
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
    const int reg = mesh.cell_region()[c];
    if (!side(reg)) continue;
    const auto& cell = cells[c];
    bool touches = false;
    for (int v : cell) touches = touches || out.local.count(v) > 0;
    if (!touches) continue;
    const Triangle tri{verts[cell[0]], verts[cell[1]], verts[cell[2]]};
    auto stiff = p1_stiffness(tri, spec.lambda(reg));
    if (spec.reaction != 0.0) {
      const auto mass = p1_mass(tri);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) stiff[i][j] -= spec.reaction * mass[i][j];
    }
    const QuadratureRule rule = triangle_quadrature(tri, spec.source_degree);
    for (int i = 0; i < 3; ++i) {
      const auto it = out.local.find(cell[i]);
      if (it == out.local.end()) continue;
      double at = 0.0, al = 0.0;
      for (int j = 0; j < 3; ++j) {
        at += stiff[i][j] * t[cell[j]];
        al += stiff[i][j] * l[cell[j]];
      }
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec2& p = rule.points[q];
        const auto bc = barycentric(tri, p);
        double tq = 0.0;
        for (int j = 0; j < 3; ++j) tq += bc[j] * t[cell[j]];
        const double fq = spec.source ? spec.source(p, reg) : 0.0;
        at -= rule.weights[q] * fq * bc[i];
        al += rule.weights[q] * spec.integrand_derivative(tq) * bc[i];
      }
      rt[it->second] += at;
      rl[it->second] += al;
    }
  }

  Triplets trip;
  for (int f : facets) {
    const auto& e = mesh.facets()[f];
    const int a = out.local.at(e[0]);
    const int b = out.local.at(e[1]);
    const double len = (verts[e[1]] - verts[e[0]]).norm();
    trip.emplace_back(a, a, len / 3.0);
    trip.emplace_back(b, b, len / 3.0);
    trip.emplace_back(a, b, len / 6.0);
    trip.emplace_back(b, a, len / 6.0);
  }
  SparseMatrix mg(k, k);
  mg.setFromTriplets(trip.begin(), trip.end());
  const SpdFactorization fac(mg);
  out.state = fac.solve(rt);
  out.adjoint = fac.solve(rl);
  return out;
}

// (1/len) ∫ σ τ over a facet for P1 σ, τ with end values (sa, sb), (ta, tb).
double facet_product_mean(double sa, double sb, double ta, double tb) {
  return (sa * ta + sb * tb) / 3.0 + (sa * tb + sb * ta) / 6.0;
}

}  // namespace

GradientDensity density_dirichlet_example(const MultiMeshStack& stack, const ProblemSpec& spec, const Field& state,
                                          const Field& adjoint, int block, int gamma_marker) {
  if (adjoint.size() != state.size() || state.size() != stack.dofs.size())
    throw InvalidArgument("density_dirichlet_example: state and adjoint must be solved on this stack");
  if (block < 1 || block > stack.num_submeshes())
    throw InvalidArgument("density_dirichlet_example: the boundary must lie on a submesh");
  const Mesh& mesh = stack.mesh(block);
  const auto facets = mesh.facets_with_marker(gamma_marker);
  if (facets.empty()) throw InvalidArgument("density_dirichlet_example: no facets carry the boundary marker");

  const Vector t = block_values(stack, state, block);
  const Vector l = block_values(stack, adjoint, block);
  const RecoveredFlux flux = recover_fluxes(mesh, spec, t, l, facets, [](int) { return true; });

  GradientDensity out;
  for (int f : facets) {
    const int cell = mesh.facet_cells(f).front();
    DensityFacet d = make_facet(mesh, block, f, normal_out_of(mesh, cell, f));
    const int a = flux.local.at(mesh.facets()[f][0]);
    const int b = flux.local.at(mesh.facets()[f][1]);
    const double prod = facet_product_mean(flux.state[a], flux.state[b], flux.adjoint[a], flux.adjoint[b]);
    const double t_mid = 0.5 * (t[mesh.facets()[f][0]] + t[mesh.facets()[f][1]]);
    d.g = spec.integrand(t_mid) - prod / spec.lambda(mesh.cell_region()[cell]);
    out.facets.push_back(d);
  }
  return out;
}

GradientDensity density_multicable(const MultiMeshStack& stack, const ProblemSpec& spec, const Field& state,
                                   const Field& adjoint, int block) {
  if (adjoint.size() != state.size() || state.size() != stack.dofs.size())
    throw InvalidArgument("density_multicable: state and adjoint must be solved on this stack");
  if (block < 1 || block > stack.num_submeshes())
    throw InvalidArgument("density_multicable: the interfaces must lie on a submesh");
  const Mesh& mesh = stack.mesh(block);
  const Vector t = block_values(stack, state, block);
  const Vector l = block_values(stack, adjoint, block);
  GradientDensity out;
  for (int mk : {marker::kInnerIface, marker::kOuterIface}) {
    const int outer_region = mk == marker::kInnerIface ? region::kInsulation : region::kFill;
    const auto facets = mesh.facets_with_marker(mk);
    if (facets.empty()) continue;
    const RecoveredFlux flux =
        recover_fluxes(mesh, spec, t, l, facets, [outer_region](int reg) { return reg == outer_region; });
    for (int f : facets) {
      const auto& cells = mesh.facet_cells(f);
      if (cells.size() != 2 || mesh.cell_region()[cells[0]] == mesh.cell_region()[cells[1]])
        throw TopologyError("density_multicable: interface facet does not separate two regions");
      const int cp = mesh.cell_region()[cells[0]] == outer_region ? cells[0] : cells[1];
      const int cm = cp == cells[0] ? cells[1] : cells[0];
      if (mesh.cell_region()[cp] != outer_region)
        throw TopologyError("density_multicable: unexpected regions at an interface facet");
      const double lp = spec.lambda(mesh.cell_region()[cp]);
      const double lm = spec.lambda(mesh.cell_region()[cm]);

      DensityFacet d = make_facet(mesh, block, f, normal_out_of(mesh, cp, f));
      const int va = mesh.facets()[f][0], vb = mesh.facets()[f][1];
      const int a = flux.local.at(va), b = flux.local.at(vb);
      // λ∂ₙT and λ∂ₙp are continuous across the interface, ∂ₙT jumps with 1/λ
      const double flux_prod = facet_product_mean(flux.state[a], flux.state[b], flux.adjoint[a], flux.adjoint[b]);
      const double tan_t = (t[vb] - t[va]) / d.length;
      const double tan_p = (l[vb] - l[va]) / d.length;
      const double p_mid = 0.5 * (l[va] + l[vb]);

      const double f_p = spec.source ? spec.source(d.mid, mesh.cell_region()[cp]) : 0.0;
      const double f_m = spec.source ? spec.source(d.mid, mesh.cell_region()[cm]) : 0.0;
      // c is uniform, so ⟦−cTp⟧ vanishes; only the source jumps
      const double volume_jump = -(f_p - f_m) * p_mid;
      const double flux_term = -flux_prod * (1.0 / lp - 1.0 / lm);
      const double tangential = (lp - lm) * tan_p * tan_t;
      d.g = volume_jump + flux_term + tangential;
      out.facets.push_back(d);
    }
  }
  if (out.empty()) throw InvalidArgument("density_multicable: submesh has no material interfaces");
  return out;
}

GeometricValues geometric_functionals(const Mesh& mesh, int gamma_marker, const GeometricTargets& targets,
                                      double domain_area, int block) {
  const auto facets = mesh.facets_with_marker(gamma_marker);
  if (facets.empty()) throw InvalidArgument("geometric_functionals: no boundary facets with the marker");
  std::map<int, int> degree;
  for (int f : facets)
    for (int v : mesh.facets()[f]) ++degree[v];
  for (const auto& [v, d] : degree)
    if (d != 2) throw TopologyError("geometric_functionals: obstacle boundary is not a closed polyline");

  GeometricValues out;
  std::vector<DensityFacet> fs;
  double area = 0.0;
  Vec2 moment = Vec2::Zero();
  const double s = 0.5 / std::sqrt(3.0);
  for (int f : facets) {
    const int cell = mesh.facet_cells(f).front();
    DensityFacet d = make_facet(mesh, block, f, normal_out_of(mesh, cell, f));
    const Vec2 n_obstacle = -d.normal;
    area += 0.5 * d.length * d.mid.dot(n_obstacle);
    // ∫_O x dA = ∮ x²/2 n_x dS, two-point Gauss is exact for the quadratic
    for (double t : {0.5 - s, 0.5 + s}) {
      const Vec2 p = d.a + t * (d.b - d.a);
      moment.x() += 0.25 * d.length * p.x() * p.x() * n_obstacle.x();
      moment.y() += 0.25 * d.length * p.y() * p.y() * n_obstacle.y();
    }
    fs.push_back(d);
  }
  if (!(area > 0.0)) throw TopologyError("geometric_functionals: obstacle boundary encloses no area");
  out.obstacle_area = area;
  out.centroid = moment / area;
  out.fluid_area = domain_area - area;

  const double dv = out.fluid_area - targets.fluid_area;
  const Vec2 dc = out.centroid - targets.centroid;
  out.j_volume = targets.gamma_volume * dv * dv;
  out.j_cx = targets.gamma_centroid * dc.x() * dc.x();
  out.j_cy = targets.gamma_centroid * dc.y() * dc.y();
  for (auto& d : fs) {
    const Vec2 rel = out.centroid - d.mid;
    d.g = 2.0 * targets.gamma_volume * dv +
          2.0 * targets.gamma_centroid * (dc.x() * rel.x() + dc.y() * rel.y()) / area;
  }
  out.density.facets = std::move(fs);
  return out;
}

double directional_derivative(const GradientDensity& density, const VectorFunction& s) {
  double sum = 0.0;
  for (const auto& f : density.facets) sum += f.length * s(f.mid).dot(f.normal) * f.g;
  return sum;
}

double directional_derivative(const GradientDensity& density, const VectorFunction& s, int block) {
  double sum = 0.0;
  for (const auto& f : density.facets)
    if (f.block == block) sum += f.length * s(f.mid).dot(f.normal) * f.g;
  return sum;
}

VectorFunction rotation_field(const Vec2& c) {
  return [c](const Vec2& p) { return Vec2(-(p.y() - c.y()), p.x() - c.x()); };
}

VectorFunction constant_field(const Vec2& v) {
  return [v](const Vec2&) { return v; };
}

namespace {

double fit_slope(const std::vector<TaylorRow>& rows, bool second) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    const double v = second ? r.r1 : r.r0;
    if (v > 0.0 && r.eps > 0.0) pts.emplace_back(std::log(r.eps), std::log(v));
  }
  if (pts.size() < 2) return std::nan("");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxy / sxx;
}

}  // namespace

double TaylorReport::fitted_rate1() const { return fit_slope(rows, true); }
double TaylorReport::fitted_rate0() const { return fit_slope(rows, false); }

std::vector<double> default_taylor_steps() {
  std::vector<double> eps;
  for (int k = 0; k <= 5; ++k) eps.push_back(0.1 * std::ldexp(1.0, -k));
  return eps;
}

TaylorReport taylor_test(const std::function<double(double)>& j_of_eps, double j0, double dj,
                         const std::vector<double>& eps) {
  if (eps.size() < 4) throw InvalidArgument("taylor_test: need at least four step sizes");
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(eps[k] > 0.0)) throw InvalidArgument("taylor_test: step sizes must be positive");
    if (k > 0 && !(eps[k] < eps[k - 1])) throw InvalidArgument("taylor_test: step sizes must decrease");
  }
  TaylorReport rep;
  rep.j0 = j0;
  rep.dj = dj;
  for (double e : eps) {
    double j = 0.0;
    try {
      j = j_of_eps(e);
    } catch (const std::exception& ex) {
      rep.error = ex.what();
      break;
    }
    rep.rows.push_back({e, std::abs(j - j0), std::abs(j - j0 - e * dj)});
  }
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    const auto& a = rep.rows[k - 1];
    const auto& b = rep.rows[k];
    const double le = std::log(a.eps / b.eps);
    rep.rate0.push_back(std::log(a.r0 / b.r0) / le);
    rep.rate1.push_back(std::log(a.r1 / b.r1) / le);
  }
  return rep;
}

}  // namespace mmshape
