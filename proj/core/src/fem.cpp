#include "mmshape/fem.hpp"

#include <cmath>
#include <set>

#include "mmshape/errors.hpp"

namespace mmshape {

DofMap::DofMap(std::vector<std::vector<bool>> active) : active_(std::move(active)) {
  offsets_.reserve(active_.size());
  for (const auto& block : active_) {
    offsets_.push_back(size_);
    size_ += static_cast<int>(block.size());
  }
}

DofMap DofMap::single(const Mesh& mesh) { return DofMap({std::vector<bool>(mesh.num_vertices(), true)}); }

std::vector<int> DofMap::inactive_dofs() const {
  std::vector<int> out;
  for (int b = 0; b < num_blocks(); ++b)
    for (int v = 0; v < block_size(b); ++v)
      if (!active_[b][v]) out.push_back(offsets_[b] + v);
  return out;
}

std::array<Vec2, 3> p1_gradients(const Triangle& t) {
  const double two_a = cross(t[1] - t[0], t[2] - t[0]);
  std::array<Vec2, 3> g;
  for (int k = 0; k < 3; ++k) {
    const Vec2& p = t[(k + 1) % 3];
    const Vec2& q = t[(k + 2) % 3];
    g[k] = Vec2(p.y() - q.y(), q.x() - p.x()) / two_a;
  }
  return g;
}

std::array<double, 3> barycentric(const Triangle& t, const Vec2& p) {
  const double two_a = cross(t[1] - t[0], t[2] - t[0]);
  const double l1 = cross(t[2] - t[1], p - t[1]) / two_a;
  const double l2 = cross(t[0] - t[2], p - t[2]) / two_a;
  return {l1, l2, 1.0 - l1 - l2};
}

SparseMatrix Assembler::matrix() const {
  SparseMatrix m(size_, size_);
  m.setFromTriplets(triplets_.begin(), triplets_.end());
  return m;
}

std::array<std::array<double, 3>, 3> p1_stiffness(const Triangle& tri, double conductivity) {
  const auto g = p1_gradients(tri);
  const double area = signed_area(tri[0], tri[1], tri[2]);
  std::array<std::array<double, 3>, 3> k{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) k[a][b] = conductivity * area * g[a].dot(g[b]);
  return k;
}

std::array<std::array<double, 3>, 3> p1_mass(const Triangle& tri) {
  const double area = signed_area(tri[0], tri[1], tri[2]);
  std::array<std::array<double, 3>, 3> m{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m[a][b] = area * (a == b ? 1.0 / 6.0 : 1.0 / 12.0);
  return m;
}

namespace {

std::array<int, 3> cell_dofs(const Mesh& mesh, int c, int offset) {
  const auto& t = mesh.cells()[c];
  return {t[0] + offset, t[1] + offset, t[2] + offset};
}

}  // namespace

void assemble_laplace(Assembler& asm_, const Mesh& mesh, const std::map<int, double>& conductivity, int offset,
                      const CellFilter& include) {
  for (const auto& [reg, lam] : conductivity)
    if (!(lam > 0.0)) throw InvalidArgument("assemble_laplace: conductivity must be positive");
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    if (include && !include(c)) continue;
    auto it = conductivity.find(mesh.cell_region()[c]);
    if (it == conductivity.end()) throw InvalidArgument("assemble_laplace: no conductivity for region");
    asm_.add_symmetric(cell_dofs(mesh, c, offset), p1_stiffness(mesh.triangle(c), it->second));
  }
}

void assemble_mass(Assembler& asm_, const Mesh& mesh, double c, int offset, const CellFilter& include) {
  if (c == 0.0) return;
  for (int k = 0; k < static_cast<int>(mesh.num_cells()); ++k) {
    if (include && !include(k)) continue;
    auto m = p1_mass(mesh.triangle(k));
    for (auto& row : m)
      for (auto& v : row) v *= -c;
    asm_.add_symmetric(cell_dofs(mesh, k, offset), m);
  }
}

void assemble_source(Assembler& asm_, const Mesh& mesh, const std::function<double(const Vec2&, int)>& f, int degree,
                     int offset, const CellFilter& include) {
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    if (include && !include(c)) continue;
    const Triangle tri = mesh.triangle(c);
    const int reg = mesh.cell_region()[c];
    const auto rule = triangle_quadrature(tri, degree);
    const auto dofs = cell_dofs(mesh, c, offset);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double fv = f(rule.points[q], reg) * rule.weights[q];
      if (fv == 0.0) continue;
      const auto lam = barycentric(tri, rule.points[q]);
      for (int a = 0; a < 3; ++a) asm_.add_rhs(dofs[a], fv * lam[a]);
    }
  }
}

void assemble_robin(Assembler& asm_, const Mesh& mesh, int m, double alpha, double t_ex, int offset) {
  for (int f : mesh.facets_with_marker(m)) {
    const auto& e = mesh.facets()[f];
    const double len = (mesh.vertices()[e[1]] - mesh.vertices()[e[0]]).norm();
    const std::array<int, 2> dofs{e[0] + offset, e[1] + offset};
    asm_.add_symmetric(dofs, std::array<std::array<double, 2>, 2>{
                                 {{alpha * len / 3.0, alpha * len / 6.0}, {alpha * len / 6.0, alpha * len / 3.0}}});
    if (t_ex != 0.0) {
      asm_.add_rhs(dofs[0], t_ex * len / 2.0);
      asm_.add_rhs(dofs[1], t_ex * len / 2.0);
    }
  }
}

void add_dirichlet(SparseSystem& sys, const Mesh& mesh, int m, const ScalarFunction& g, int offset) {
  for (int f : mesh.facets_with_marker(m))
    for (int v : mesh.facets()[f]) sys.constraints[v + offset] = g(mesh.vertices()[v]);
}

void apply_dirichlet(SparseSystem& sys) {
  const int n = static_cast<int>(sys.matrix.rows());
  std::vector<char> fixed(n, 0);
  Vector value = Vector::Zero(n);
  for (const auto& [dof, v] : sys.constraints) {
    fixed[dof] = 1;
    value[dof] = v;
  }
  for (int row = 0; row < n; ++row) {
    for (SparseMatrix::InnerIterator it(sys.matrix, row); it; ++it) {
      const int col = static_cast<int>(it.col());
      if (fixed[row]) {
        it.valueRef() = row == col ? 1.0 : 0.0;
      } else if (fixed[col]) {
        sys.rhs[row] -= it.value() * value[col];
        it.valueRef() = 0.0;
      }
    }
  }
  for (const auto& [dof, v] : sys.constraints) {
    if (sys.matrix.coeff(dof, dof) != 1.0) sys.matrix.coeffRef(dof, dof) = 1.0;
    sys.rhs[dof] = v;
  }
}

void apply_dirichlet(SparseSystem& sys, const Mesh& mesh, int m, const ScalarFunction& g, int offset) {
  add_dirichlet(sys, mesh, m, g, offset);
  apply_dirichlet(sys);
}

std::optional<double> eval_field(const Mesh& mesh, const Vector& field, const Vec2& p, int offset) {
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    const Triangle t = mesh.triangle(c);
    const auto lam = barycentric(t, p);
    if (lam[0] >= -1e-12 && lam[1] >= -1e-12 && lam[2] >= -1e-12) return eval_in_cell(mesh, field, c, p, offset);
  }
  return std::nullopt;
}

double eval_in_cell(const Mesh& mesh, const Vector& field, int cell, const Vec2& p, int offset) {
  const auto lam = barycentric(mesh.triangle(cell), p);
  const auto& t = mesh.cells()[cell];
  return lam[0] * field[t[0] + offset] + lam[1] * field[t[1] + offset] + lam[2] * field[t[2] + offset];
}

Vec2 cell_gradient(const Mesh& mesh, const Vector& field, int cell, int offset) {
  const auto g = p1_gradients(mesh.triangle(cell));
  const auto& t = mesh.cells()[cell];
  return field[t[0] + offset] * g[0] + field[t[1] + offset] * g[1] + field[t[2] + offset] * g[2];
}

Vector interpolate(const Mesh& mesh, const ScalarFunction& f) {
  Vector v(mesh.num_vertices());
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) v[static_cast<Eigen::Index>(i)] = f(mesh.vertices()[i]);
  return v;
}

double l2_error(const Mesh& mesh, const Vector& field, const ScalarFunction& exact, int degree, int offset,
                const CellFilter& include) {
  if (degree < 2) throw InvalidArgument("l2_error: quadrature degree must be at least 2");
  double s = 0.0;
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) {
    if (include && !include(c)) continue;
    const auto rule = triangle_quadrature(mesh.triangle(c), degree);
    s += rule.integrate([&](const Vec2& p) {
      const double e = eval_in_cell(mesh, field, c, p, offset) - exact(p);
      return e * e;
    });
  }
  return std::sqrt(s);
}

}  // namespace mmshape
