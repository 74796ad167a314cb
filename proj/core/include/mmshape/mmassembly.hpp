#pragma once

#include <functional>
#include <map>
#include <vector>

#include "mmshape/cutgeom.hpp"
#include "mmshape/fem.hpp"
#include "mmshape/mesh.hpp"

namespace mmshape {

struct NitscheParams {
  double beta0 = 4.0;  // interface penalty
  double beta1 = 4.0;  // overlap stabilization

  void validate() const;
};

struct BoundaryCondition {
  enum class Kind { Dirichlet, Robin };
  Kind kind = Kind::Dirichlet;
  ScalarFunction value;  // Dirichlet data g(x)
  double t_ex = 0.0;     // Robin: λ ∂T/∂n + (T − t_ex) = 0

  static BoundaryCondition dirichlet(ScalarFunction g) { return {Kind::Dirichlet, std::move(g), 0.0}; }
  static BoundaryCondition robin(double t_ex) { return {Kind::Robin, {}, t_ex}; }
};

enum class FunctionalKind { L2Squared, Lq };

/// Scalar elliptic problem −∇·(λ∇T) − cT = f with per-marker boundary data.
struct ProblemSpec {
  std::map<int, double> conductivity{{region::kFill, 1.0}};
  std::function<double(const Vec2&, int region)> source;
  double reaction = 0.0;
  std::map<int, BoundaryCondition> bcs;
  FunctionalKind functional = FunctionalKind::L2Squared;
  double q = 2.0;
  int source_degree = 4;

  double lambda(int region) const;
  /// j(T) and j'(T) of the functional integrand.
  double integrand(double t) const;
  double integrand_derivative(double t) const;
};

/// Background mesh plus pairwise disjoint submeshes placed by rigid poses.
///
/// Block 0 of the dof map is the background; block i + 1 is submesh i.
struct MultiMeshStack {
  Mesh background;
  std::vector<Mesh> reference;  // submeshes in their own frame
  std::vector<RigidPose> poses;
  std::vector<Mesh> placed;     // submeshes in world coordinates
  std::vector<ConvexPolygon> footprints;
  Classification classification;
  CutQuadrature cut_quadrature;
  std::vector<std::vector<InterfaceSegment>> segments;
  std::vector<std::vector<OverlapPiece>> overlaps;
  DofMap dofs;

  int num_submeshes() const { return static_cast<int>(placed.size()); }
  int num_blocks() const { return num_submeshes() + 1; }
  const Mesh& mesh(int block) const { return block == 0 ? background : placed[block - 1]; }
  /// Background cells that enter volume integrals.
  bool background_active(int cell) const { return classification.status[cell] != CellStatus::Covered; }
};

/// Builds every derived structure. Zero submeshes gives a single-mesh stack.
MultiMeshStack build_stack(Mesh background, std::vector<Mesh> reference, std::vector<RigidPose> poses = {});
/// Same stack with new poses (or new reference meshes), rebuilt from scratch.
MultiMeshStack rebuild_stack(const MultiMeshStack& stack, std::vector<RigidPose> poses);
MultiMeshStack rebuild_stack(const MultiMeshStack& stack, std::vector<Mesh> reference, std::vector<RigidPose> poses);

/// Calls `fn(block, cell, point, weight)` for a quadrature of every visible
/// region. Cut background cells contribute full-cell points and hidden-part
/// points with negated weights.
using VisibleQuadratureFn = std::function<void(int block, int cell, const Vec2& p, double w)>;
void for_each_visible_point(const MultiMeshStack& stack, int degree, const VisibleQuadratureFn& fn);

/// ∫ over the visible domain of `fn` evaluated per (block, cell, point).
double integrate_visible(const MultiMeshStack& stack, int degree,
                         const std::function<double(int block, int cell, const Vec2& p)>& fn);

/// Value of a stacked field at a point of a given block/cell.
double eval_block(const MultiMeshStack& stack, const Field& u, int block, int cell, const Vec2& p);
Vec2 gradient_block(const MultiMeshStack& stack, const Field& u, int block, int cell);
/// Coefficients of one block.
Vector block_values(const MultiMeshStack& stack, const Field& u, int block);

/// Stiffness, reaction and source over visible parts (subtraction rule on cut cells).
void assemble_visible_volume(Assembler& asm_, const MultiMeshStack& stack, const ProblemSpec& spec,
                             bool with_source = true);

struct InterfaceTerms {
  bool consistency = true;  // the two flux terms
  bool penalty = true;      // β₀ λ / h ⟦T⟧⟦v⟧
};
void assemble_interface_penalty(Assembler& asm_, const MultiMeshStack& stack, const ProblemSpec& spec,
                                const NitscheParams& params, InterfaceTerms terms = {});
void assemble_overlap_stab(Assembler& asm_, const MultiMeshStack& stack, const ProblemSpec& spec,
                           const NitscheParams& params);

/// Full state system with boundary conditions applied and inactive dofs pinned.
SparseSystem assemble_state(const MultiMeshStack& stack, const ProblemSpec& spec, const NitscheParams& params);
/// Adjoint system: same matrix, rhs −∫ j'(T) v, homogeneous boundary data.
SparseSystem assemble_adjoint(const MultiMeshStack& stack, const ProblemSpec& spec, const NitscheParams& params,
                              const Field& state);

struct StateAdjoint {
  Field state;
  Field adjoint;
  double functional = 0.0;
};

Field solve_state(const MultiMeshStack& stack, const ProblemSpec& spec, const NitscheParams& params);
/// State, functional value and (when requested) adjoint with one factorization.
StateAdjoint solve_state_adjoint(const MultiMeshStack& stack, const ProblemSpec& spec, const NitscheParams& params,
                                 bool with_adjoint = true);

double eval_functional(const MultiMeshStack& stack, const ProblemSpec& spec, const Field& state);

/// √∫_visible (u_h − u)².
double l2_error(const MultiMeshStack& stack, const Field& u, const ScalarFunction& exact, int degree = 4);

/// Interpolant of f on every block (inactive dofs included).
Field interpolate(const MultiMeshStack& stack, const ScalarFunction& f);

}  // namespace mmshape
