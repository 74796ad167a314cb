#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mmshape/mesh.hpp"
#include "mmshape/quadrature.hpp"

namespace mmshape {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Triplets = std::vector<Eigen::Triplet<double>>;
using ScalarFunction = std::function<double(const Vec2&)>;

/// Global numbering of P1 vertex dofs, one contiguous block per mesh.
class DofMap {
 public:
  DofMap() = default;
  /// `active[b][v]` flags vertex v of block b as active.
  explicit DofMap(std::vector<std::vector<bool>> active);
  static DofMap single(const Mesh& mesh);

  int num_blocks() const { return static_cast<int>(offsets_.size()); }
  int offset(int block) const { return offsets_[block]; }
  int size() const { return size_; }
  int block_size(int block) const { return static_cast<int>(active_[block].size()); }
  int dof(int block, int vertex) const { return offsets_[block] + vertex; }
  bool active(int block, int vertex) const { return active_[block][vertex]; }
  std::vector<int> inactive_dofs() const;

 private:
  std::vector<int> offsets_;
  std::vector<std::vector<bool>> active_;
  int size_ = 0;
};

/// Coefficient vector over all dofs of a DofMap.
using Field = Vector;

struct SparseSystem {
  SparseMatrix matrix;
  Vector rhs;
  std::map<int, double> constraints;  // dof -> prescribed value
};

/// Gradients of the three P1 basis functions on a triangle (constant per cell).
std::array<Vec2, 3> p1_gradients(const Triangle& tri);
/// Barycentric coordinates of p with respect to tri.
std::array<double, 3> barycentric(const Triangle& tri, const Vec2& p);

/// Accumulates element contributions into triplets.
class Assembler {
 public:
  explicit Assembler(int size) : size_(size), rhs_(Vector::Zero(size)) {}

  void add(int i, int j, double v) { triplets_.emplace_back(i, j, v); }
  /// Adds a symmetric dense block: entries (i, j) and (j, i) in the same order.
  template <std::size_t N>
  void add_symmetric(const std::array<int, N>& dofs, const std::array<std::array<double, N>, N>& block) {
    for (std::size_t a = 0; a < N; ++a) {
      triplets_.emplace_back(dofs[a], dofs[a], block[a][a]);
      for (std::size_t b = a + 1; b < N; ++b) {
        triplets_.emplace_back(dofs[a], dofs[b], block[a][b]);
        triplets_.emplace_back(dofs[b], dofs[a], block[a][b]);
      }
    }
  }
  void add_rhs(int i, double v) { rhs_[i] += v; }

  int size() const { return size_; }
  Vector& rhs() { return rhs_; }
  const Triplets& triplets() const { return triplets_; }
  SparseMatrix matrix() const;

 private:
  int size_;
  Triplets triplets_;
  Vector rhs_;
};

/// Restricts a single-mesh kernel to selected cells.
using CellFilter = std::function<bool(int cell)>;

/// ∫ λ ∇u·∇v over every cell of `mesh` (dofs offset by `offset`).
void assemble_laplace(Assembler& asm_, const Mesh& mesh, const std::map<int, double>& conductivity, int offset = 0,
                      const CellFilter& include = {});
/// Adds -c ∫ u v (reaction term of a(u,v) - c(u,v)).
void assemble_mass(Assembler& asm_, const Mesh& mesh, double c, int offset = 0, const CellFilter& include = {});
/// ∫ f v with a quadrature rule of the given degree.
void assemble_source(Assembler& asm_, const Mesh& mesh, const std::function<double(const Vec2&, int region)>& f,
                     int degree = 4, int offset = 0, const CellFilter& include = {});
/// Robin term: ∫ u v dS on the matrix and ∫ t_ex v dS on the right-hand side over `m`-marked facets.
void assemble_robin(Assembler& asm_, const Mesh& mesh, int m, double alpha, double t_ex, int offset = 0);

/// 3x3 stiffness and mass matrices of one cell.
std::array<std::array<double, 3>, 3> p1_stiffness(const Triangle& tri, double conductivity);
std::array<std::array<double, 3>, 3> p1_mass(const Triangle& tri);

/// Records Dirichlet values g at the vertices of `m`-marked facets.
void add_dirichlet(SparseSystem& sys, const Mesh& mesh, int m, const ScalarFunction& g, int offset = 0);
/// Symmetric elimination of every recorded constraint.
void apply_dirichlet(SparseSystem& sys);
/// Convenience: record and eliminate in one step.
void apply_dirichlet(SparseSystem& sys, const Mesh& mesh, int m, const ScalarFunction& g, int offset = 0);

struct SolverOptions {
  double rel_tol = 1e-10;
  /// Iteration cap; 0 selects 20 * sqrt(n).
  int max_iterations = 0;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. Throws SolverError on breakdown,
/// negative curvature or when the iteration cap is reached.
Vector solve_spd(const SparseMatrix& a, const Vector& b, const SolverOptions& opts = {}, SolveStats* stats = nullptr);
Field solve_spd(const SparseSystem& sys, const SolverOptions& opts = {}, SolveStats* stats = nullptr);

/// Sparse LDLᵀ factorization of a symmetric positive definite matrix, reusable
/// for several right-hand sides. Throws SolverError when a pivot is not positive.
class SpdFactorization {
 public:
  explicit SpdFactorization(const SparseMatrix& a);
  ~SpdFactorization();
  SpdFactorization(SpdFactorization&&) noexcept;
  SpdFactorization& operator=(SpdFactorization&&) noexcept;

  /// Solve with up to three refinement steps; throws unless the normwise
  /// backward error ‖A x − b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞) is at most rel_tol.
  Vector solve(const Vector& b, double rel_tol = 1e-10) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Sparse LU solve for non-symmetric systems; residual-checked.
Vector solve_general(const SparseMatrix& a, const Vector& b, double rel_tol = 1e-10);

/// Smallest Ritz value of a symmetric matrix after `steps` Lanczos iterations.
double smallest_ritz_value(const SparseMatrix& a, int steps = 50);

/// Barycentric interpolation of a P1 field (block offset `offset`).
std::optional<double> eval_field(const Mesh& mesh, const Vector& field, const Vec2& p, int offset = 0);
double eval_in_cell(const Mesh& mesh, const Vector& field, int cell, const Vec2& p, int offset = 0);
Vec2 cell_gradient(const Mesh& mesh, const Vector& field, int cell, int offset = 0);

/// P1 interpolant of f on the mesh vertices.
Vector interpolate(const Mesh& mesh, const ScalarFunction& f);

/// √∫(u_h − u)² with a quadrature rule of the given degree (at least 2).
double l2_error(const Mesh& mesh, const Vector& field, const ScalarFunction& exact, int degree = 4, int offset = 0,
                const CellFilter& include = {});

}  // namespace mmshape
