#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mmshape/mmassembly.hpp"

namespace mmshape {

using VectorFunction = std::function<Vec2(const Vec2&)>;

/// One facet of the boundary carrying a shape gradient density.
struct DensityFacet {
  int block = 0;  // stack block of the mesh owning the facet
  int facet = -1;
  Vec2 a, b;
  Vec2 mid;
  Vec2 normal;  // unit; dJ[s] = ∫ s·normal g dS
  double length = 0.0;
  double g = 0.0;
};

/// Facet-piecewise-constant density g with dJ[s] = ∫ s·n g dS.
struct GradientDensity {
  std::vector<DensityFacet> facets;

  bool empty() const { return facets.empty(); }
  /// Facet-wise sum; both densities must live on the same facets.
  GradientDensity& operator+=(const GradientDensity& other);
  GradientDensity scaled(double factor) const;
  /// Concatenates the facets of another density (e.g. a second submesh).
  void append(const GradientDensity& other);
  double max_abs() const;
};

/// Density of J = ∫ j(T) for a Dirichlet hole boundary: j(T) − (n·∇λ)(n·∇T),
/// with n the outward normal of the physical domain (pointing into the hole).
GradientDensity density_dirichlet_example(const MultiMeshStack& stack, const ProblemSpec& spec, const Field& state,
                                          const Field& adjoint, int block = 1, int gamma_marker = marker::kGamma);

/// Interface density on the material interfaces (markers 3 and 4) of one submesh:
/// ⟦−cTp − fp⟧ − λ⁺ ∂ₙp⁺ ⟦∂ₙT⟧ + ⟦λ⟧ ∇_Γp⁺·∇_ΓT⁺ with ⟦ψ⟧ = ψ⁺ − ψ⁻, "+" the
/// outer material. The stored normal points from "+" into "−".
GradientDensity density_multicable(const MultiMeshStack& stack, const ProblemSpec& spec, const Field& state,
                                   const Field& adjoint, int block);

/// Geometric penalty functionals of the obstacle enclosed by a closed boundary.
struct GeometricTargets {
  double fluid_area = 0.0;    // |Ω₀|
  Vec2 centroid = Vec2::Zero();  // (Cx0, Cy0) of the obstacle
  double gamma_volume = 0.0;
  double gamma_centroid = 0.0;
};

struct GeometricValues {
  double j_volume = 0.0;
  double j_cx = 0.0;
  double j_cy = 0.0;
  double fluid_area = 0.0;
  double obstacle_area = 0.0;
  Vec2 centroid = Vec2::Zero();  // obstacle centroid
  GradientDensity density;

  double total() const { return j_volume + j_cx + j_cy; }
};

/// `mesh` holds the obstacle boundary as `gamma_marker` facets; `domain_area`
/// is the area enclosed by the exterior boundary. Normals point out of the fluid.
GeometricValues geometric_functionals(const Mesh& mesh, int gamma_marker, const GeometricTargets& targets,
                                      double domain_area, int block = 1);

/// Σ len (s(mid)·n) g over all facets.
double directional_derivative(const GradientDensity& density, const VectorFunction& s);
/// Same, restricted to the facets of one block.
double directional_derivative(const GradientDensity& density, const VectorFunction& s, int block);

/// Rotation generator about c: s(p) = (−(p_y − c_y), p_x − c_x).
VectorFunction rotation_field(const Vec2& center);
VectorFunction constant_field(const Vec2& v);

struct TaylorRow {
  double eps = 0.0;
  double r0 = 0.0;  // |J(ε) − J(0)|
  double r1 = 0.0;  // |J(ε) − J(0) − ε dJ|
};

struct TaylorReport {
  double j0 = 0.0;
  double dj = 0.0;
  std::vector<TaylorRow> rows;
  std::vector<double> rate0;  // successive log ratios
  std::vector<double> rate1;
  std::string error;          // non-empty when an evaluation failed

  /// Least-squares slope of log r1 against log ε.
  double fitted_rate1() const;
  double fitted_rate0() const;
};

/// Default step list 1e-1 · 2⁻ᵏ, k = 0..5.
std::vector<double> default_taylor_steps();

/// Taylor remainders of a scalar design perturbation J(ε). Evaluation errors
/// end the sweep and are recorded in the report.
TaylorReport taylor_test(const std::function<double(double eps)>& j_of_eps, double j0, double dj,
                         const std::vector<double>& eps = default_taylor_steps());

}  // namespace mmshape
