#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "mmshape/mmassembly.hpp"
#include "mmshape/shape.hpp"

namespace mmshape {

/// Rigid rotation of one submesh about a fixed world point.
struct RotationDesign {
  int submesh = 0;
  Vec2 center = Vec2::Zero();
};

/// Rigid translation of one submesh. `anchor` is a reference-frame point (the
/// cable center) whose world position is constrained to |x| ≤ r_max when set.
struct TranslationDesign {
  int submesh = 0;
  Vec2 anchor = Vec2::Zero();
  std::optional<double> r_max;
};

struct H1Scheme {
  double alpha = 1.0;
};

struct EikonalAdvectScheme {
  double alpha0 = 1e-3;
  double alpha1 = 25.0;
};

/// Free movement of the submesh vertices, driven by the density on `gamma_marker`.
struct BoundaryNodesDesign {
  int submesh = 0;
  int gamma_marker = marker::kGamma;
  std::variant<H1Scheme, EikonalAdvectScheme> scheme = H1Scheme{};
};

using DesignComponent = std::variant<RotationDesign, TranslationDesign, BoundaryNodesDesign>;

/// The set of allowed deformations; every component acts on its own submesh.
struct DesignSpace {
  std::vector<DesignComponent> components;
  /// Smoothing weight α of the H¹ inner product used for the rigid representers.
  double alpha = 1.0;

  void validate(const MultiMeshStack& stack) const;
};

/// Per-vertex displacement of one submesh (world frame).
using DeformField = std::vector<Vec2>;

struct ComponentDirection {
  double omega = 0.0;            // rotation rate
  Vec2 translation = Vec2::Zero();
  DeformField field;             // boundary-node displacement
};

using DesignDirection = std::vector<ComponentDirection>;

/// d = −(1/|Ω̂|) ∫_Γ n g dS over the density facets of `block`.
Vec2 riesz_translation(const GradientDensity& density, const Mesh& submesh, int block);

/// ω = −D(s_rot) / (2α|Ω̂| + ∫ |x − c|² dx).
double riesz_rotation(const GradientDensity& density, const Mesh& submesh, int block, const Vec2& center,
                      double alpha);

/// Smoothed eikonal distance: −α₁Δε + |∇ε|² = 1, ε = 0 on `gamma_marker`.
Vector solve_eikonal(const Mesh& submesh, int gamma_marker, double alpha1);

/// ∫ α₀∇d·∇s + d ∇ε·∇s = 0 with d = −g n on Γ, per component.
DeformField solve_advection_deform(const Mesh& submesh, const Vector& eps, const GradientDensity& density, int block,
                                   double alpha0);

/// ∫ α∇d:∇s + d·s = −dJ[s] over the submesh.
DeformField h1_riesz(const Mesh& submesh, const GradientDensity& density, int block, double alpha);

/// Vertex values of −g n on the density facets of `block` (length-weighted average at shared vertices).
DeformField boundary_descent_values(const Mesh& submesh, const GradientDensity& density, int block,
                                    std::vector<bool>* on_boundary = nullptr);

/// Descent direction of every design component.
DesignDirection compute_direction(const MultiMeshStack& stack, const DesignSpace& space,
                                  const GradientDensity& density);

/// dJ along a direction: Σ over components of ∫ s·n g.
double direction_slope(const MultiMeshStack& stack, const DesignSpace& space, const GradientDensity& density,
                       const DesignDirection& direction);

/// New stack after a step ξ along `direction`. Throws InvalidStep when a
/// deformed cell loses positive area; the input stack is never modified.
MultiMeshStack apply_design_update(const MultiMeshStack& stack, const DesignSpace& space,
                                   const DesignDirection& direction, double xi);

/// Minimum radius ratio over all cells.
double mesh_quality(const Mesh& mesh);

}  // namespace mmshape
