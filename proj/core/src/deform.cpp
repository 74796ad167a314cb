#include "mmshape/deform.hpp"

#include <cmath>

#include "mmshape/errors.hpp"

namespace mmshape {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int component_submesh(const DesignComponent& c) {
  return std::visit([](const auto& d) { return d.submesh; }, c);
}

Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

// Scalar P1 operator α K + M (mass weight `m`), no boundary terms.
SparseMatrix diffusion_mass(const Mesh& mesh, double alpha, double m) {
  Assembler a(static_cast<int>(mesh.num_vertices()));
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const Triangle t = mesh.triangle(c);
    auto k = alpha > 0.0 ? p1_stiffness(t, alpha) : std::array<std::array<double, 3>, 3>{};
    const auto mm = p1_mass(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) k[i][j] += m * mm[i][j];
    a.add_symmetric(mesh.cells()[c], k);
  }
  return a.matrix();
}

}  // namespace

void DesignSpace::validate(const MultiMeshStack& stack) const {
  if (!(alpha >= 0.0)) throw InvalidArgument("DesignSpace: alpha must be non-negative");
  for (const auto& c : components) {
    const int s = component_submesh(c);
    if (s < 0 || s >= stack.num_submeshes()) throw InvalidArgument("DesignSpace: submesh index out of range");
    if (const auto* b = std::get_if<BoundaryNodesDesign>(&c)) {
      if (const auto* h = std::get_if<H1Scheme>(&b->scheme); h && !(h->alpha >= 0.0))
        throw InvalidArgument("DesignSpace: H1 alpha must be non-negative");
      if (const auto* e = std::get_if<EikonalAdvectScheme>(&b->scheme); e && (!(e->alpha0 >= 0.0) || !(e->alpha1 >= 0.0)))
        throw InvalidArgument("DesignSpace: eikonal parameters must be non-negative");
    }
  }
}

Vec2 riesz_translation(const GradientDensity& density, const Mesh& submesh, int block) {
  const double area = submesh.total_area();
  if (!(area > 0.0)) throw InvalidArgument("riesz_translation: submesh has zero area");
  Vec2 s = Vec2::Zero();
  for (const auto& f : density.facets)
    if (f.block == block) s += f.length * f.g * f.normal;
  return -s / area;
}

double riesz_rotation(const GradientDensity& density, const Mesh& submesh, int block, const Vec2& center,
                      double alpha) {
  double second_moment = 0.0;
  for (int c = 0; c < static_cast<int>(submesh.num_cells()); ++c)
    second_moment += triangle_quadrature(submesh.triangle(c), 2).integrate([&](const Vec2& p) {
      return (p - center).squaredNorm();
    });
  const double denom = 2.0 * alpha * submesh.total_area() + second_moment;
  if (!(denom > 0.0)) throw InvalidArgument("riesz_rotation: zero normalization");
  return -directional_derivative(density, rotation_field(center), block) / denom;
}

Vector solve_eikonal(const Mesh& mesh, int gamma_marker, double alpha1) {
  if (!(alpha1 > 0.0)) throw InvalidArgument("solve_eikonal: alpha1 must be positive");
  const int n = static_cast<int>(mesh.num_vertices());
  if (mesh.facets_with_marker(gamma_marker).empty())
    throw InvalidArgument("solve_eikonal: no facets carry the boundary marker");
  Vector eps = Vector::Zero(n);
  double diff = 0.0;
  for (int it = 0; it < 100; ++it) {
    Assembler a(n);
    for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
      const Triangle t = mesh.triangle(c);
      const auto g = p1_gradients(t);
      const auto& cell = mesh.cells()[c];
      const Vec2 w = eps[cell[0]] * g[0] + eps[cell[1]] * g[1] + eps[cell[2]] * g[2];
      const double area = mesh.cell_area(c);
      const auto k = p1_stiffness(t, alpha1);
      // |∇ε|² ≈ 2 ∇ε_old·∇ε − |∇ε_old|²
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) a.add(cell[i], cell[j], k[i][j] + 2.0 * w.dot(g[j]) * area / 3.0);
        a.add_rhs(cell[i], (1.0 + w.squaredNorm()) * area / 3.0);
      }
    }
    SparseSystem sys{a.matrix(), a.rhs(), {}};
    apply_dirichlet(sys, mesh, gamma_marker, [](const Vec2&) { return 0.0; });
    const Vector next = solve_general(sys.matrix, sys.rhs);
    diff = (next - eps).cwiseAbs().maxCoeff();
    eps = next;
    if (diff < 1e-8) return eps;
  }
  throw SolverError("solve_eikonal: fixed-point iteration did not converge", diff);
}

DeformField boundary_descent_values(const Mesh& mesh, const GradientDensity& density, int block,
                                    std::vector<bool>* on_boundary) {
  const int n = static_cast<int>(mesh.num_vertices());
  std::vector<Vec2> sum(n, Vec2::Zero());
  std::vector<double> weight(n, 0.0);
  for (const auto& f : density.facets) {
    if (f.block != block) continue;
    for (int v : mesh.facets()[f.facet]) {
      sum[v] -= f.length * f.g * f.normal;
      weight[v] += f.length;
    }
  }
  DeformField out(n, Vec2::Zero());
  if (on_boundary) on_boundary->assign(n, false);
  for (int v = 0; v < n; ++v)
    if (weight[v] > 0.0) {
      out[v] = sum[v] / weight[v];
      if (on_boundary) (*on_boundary)[v] = true;
    }
  return out;
}

DeformField solve_advection_deform(const Mesh& mesh, const Vector& eps, const GradientDensity& density, int block,
                                   double alpha0) {
  const int n = static_cast<int>(mesh.num_vertices());
  if (eps.size() != n) throw InvalidArgument("solve_advection_deform: eikonal field size mismatch");
  std::vector<bool> fixed;
  const DeformField bc = boundary_descent_values(mesh, density, block, &fixed);

  Assembler a(n);
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const Triangle t = mesh.triangle(c);
    const auto g = p1_gradients(t);
    const auto& cell = mesh.cells()[c];
    const Vec2 ge = eps[cell[0]] * g[0] + eps[cell[1]] * g[1] + eps[cell[2]] * g[2];
    const double area = mesh.cell_area(c);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        a.add(cell[i], cell[j], alpha0 * area * g[i].dot(g[j]) + ge.dot(g[i]) * area / 3.0);
  }
  const SparseMatrix base = a.matrix();
  DeformField out(n, Vec2::Zero());
  for (int k = 0; k < 2; ++k) {
    SparseSystem sys{base, Vector::Zero(n), {}};
    for (int v = 0; v < n; ++v)
      if (fixed[v]) sys.constraints[v] = bc[v][k];
    apply_dirichlet(sys);
    const Vector d = solve_general(sys.matrix, sys.rhs);
    for (int v = 0; v < n; ++v) out[v][k] = d[v];
  }
  return out;
}

DeformField h1_riesz(const Mesh& mesh, const GradientDensity& density, int block, double alpha) {
  if (!(alpha >= 0.0)) throw InvalidArgument("h1_riesz: alpha must be non-negative");
  const int n = static_cast<int>(mesh.num_vertices());
  const SparseMatrix a = diffusion_mass(mesh, alpha, 1.0);
  Vector bx = Vector::Zero(n), by = Vector::Zero(n);
  for (const auto& f : density.facets) {
    if (f.block != block) continue;
    for (int v : mesh.facets()[f.facet]) {
      bx[v] -= 0.5 * f.length * f.g * f.normal.x();
      by[v] -= 0.5 * f.length * f.g * f.normal.y();
    }
  }
  const SpdFactorization fac(a);
  const Vector dx = fac.solve(bx), dy = fac.solve(by);
  DeformField out(n);
  for (int v = 0; v < n; ++v) out[v] = Vec2(dx[v], dy[v]);
  return out;
}

DesignDirection compute_direction(const MultiMeshStack& stack, const DesignSpace& space,
                                  const GradientDensity& density) {
  space.validate(stack);
  DesignDirection dir;
  for (const auto& comp : space.components) {
    ComponentDirection cd;
    const int block = component_submesh(comp) + 1;
    const Mesh& sub = stack.mesh(block);
    std::visit(Overloaded{
                   [&](const RotationDesign& r) { cd.omega = riesz_rotation(density, sub, block, r.center, space.alpha); },
                   [&](const TranslationDesign&) { cd.translation = riesz_translation(density, sub, block); },
                   [&](const BoundaryNodesDesign& b) {
                     if (const auto* h = std::get_if<H1Scheme>(&b.scheme)) {
                       cd.field = h1_riesz(sub, density, block, h->alpha);
                     } else {
                       const auto& e = std::get<EikonalAdvectScheme>(b.scheme);
                       const Vector eps = solve_eikonal(sub, b.gamma_marker, e.alpha1);
                       cd.field = solve_advection_deform(sub, eps, density, block, e.alpha0);
                     }
                   }},
               comp);
    dir.push_back(std::move(cd));
  }
  return dir;
}

double direction_slope(const MultiMeshStack& stack, const DesignSpace& space, const GradientDensity& density,
                       const DesignDirection& direction) {
  if (direction.size() != space.components.size()) throw InvalidArgument("direction_slope: size mismatch");
  double slope = 0.0;
  for (std::size_t k = 0; k < direction.size(); ++k) {
    const auto& comp = space.components[k];
    const int block = component_submesh(comp) + 1;
    const auto& cd = direction[k];
    std::visit(Overloaded{[&](const RotationDesign& r) {
                            slope += cd.omega * directional_derivative(density, rotation_field(r.center), block);
                          },
                          [&](const TranslationDesign&) {
                            slope += directional_derivative(density, constant_field(cd.translation), block);
                          },
                          [&](const BoundaryNodesDesign&) {
                            const Mesh& sub = stack.mesh(block);
                            for (const auto& f : density.facets) {
                              if (f.block != block) continue;
                              const auto& e = sub.facets()[f.facet];
                              const Vec2 s = 0.5 * (cd.field[e[0]] + cd.field[e[1]]);
                              slope += f.length * s.dot(f.normal) * f.g;
                            }
                          }},
               comp);
  }
  return slope;
}

MultiMeshStack apply_design_update(const MultiMeshStack& stack, const DesignSpace& space,
                                   const DesignDirection& direction, double xi) {
  if (direction.size() != space.components.size()) throw InvalidArgument("apply_design_update: size mismatch");
  if (xi == 0.0) return stack;
  std::vector<RigidPose> poses = stack.poses;
  std::vector<Mesh> reference = stack.reference;
  for (std::size_t k = 0; k < direction.size(); ++k) {
    const auto& comp = space.components[k];
    const int s = component_submesh(comp);
    const auto& cd = direction[k];
    RigidPose& pose = poses[s];
    std::visit(Overloaded{[&](const RotationDesign& r) {
                            const double delta = xi * cd.omega;
                            const Vec2 moved = pose.center + pose.translation - r.center;
                            pose.translation = rotate(moved, delta) + r.center - pose.center;
                            pose.angle += delta;
                          },
                          [&](const TranslationDesign&) { pose.translation += xi * cd.translation; },
                          [&](const BoundaryNodesDesign&) {
                            const Mesh& ref = reference[s];
                            if (cd.field.size() != ref.num_vertices())
                              throw InvalidArgument("apply_design_update: displacement size mismatch");
                            std::vector<Vec2> v = ref.vertices();
                            for (std::size_t i = 0; i < v.size(); ++i) v[i] += rotate(xi * cd.field[i], -pose.angle);
                            Mesh moved = ref.with_vertices(std::move(v));
                            for (int c = 0; c < static_cast<int>(moved.num_cells()); ++c) {
                              const Triangle t = moved.triangle(c);
                              if (!(signed_area(t[0], t[1], t[2]) > 0.0))
                                throw InvalidStep("apply_design_update: step inverts cell " + std::to_string(c));
                            }
                            reference[s] = std::move(moved);
                          }},
               comp);
  }
  return build_stack(stack.background, std::move(reference), std::move(poses));
}

double mesh_quality(const Mesh& mesh) {
  double q = 1.0;
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) q = std::min(q, radius_ratio(mesh, c));
  return mesh.num_cells() == 0 ? 0.0 : q;
}

}  // namespace mmshape
