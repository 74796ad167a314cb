#pragma once

#include <vector>

#include "mmshape/deform.hpp"
#include "mmshape/mmassembly.hpp"
#include "mmshape/optim.hpp"
#include "mmshape/shape.hpp"

namespace mmshape {

// Rotating elliptic obstacle ----------------------------------------------

/// Rectangle background with a circular patch around the pivot p that holds
/// an elliptic hole. At angle 0 the hole center sits at p + offset with its
/// major axis along offset.
struct ExampleGeometry {
  Vec2 lower{0.0, 0.0};
  Vec2 upper{1.0, 1.0};
  int nx = 40;
  int ny = 40;
  Vec2 pivot{0.55, 0.43};
  double patch_radius = 0.33;
  Vec2 hole_offset{0.15, 0.0};
  double semi_major = 0.12;
  double semi_minor = 0.04;
  int patch_rings = 12;
  int patch_segments = 96;
  double initial_angle = 0.0;  // radians
};

MultiMeshStack make_example_stack(const ExampleGeometry& g);
/// −ΔT = x sin x cos y, T = 1 on the hole, T = 0 outside; J = ∫ T².
ProblemSpec example_spec();

class RotationProblem : public DesignProblem {
 public:
  RotationProblem(ProblemSpec spec, NitscheParams params, Vec2 pivot, double alpha = 1.0);
  const DesignSpace& design() const override { return space_; }
  double functional(const MultiMeshStack& stack) const override;
  Evaluation evaluate(const MultiMeshStack& stack) const override;
  const ProblemSpec& spec() const { return spec_; }
  const NitscheParams& params() const { return params_; }

 private:
  ProblemSpec spec_;
  NitscheParams params_;
  DesignSpace space_;
};

// Cables in a cable --------------------------------------------------------

struct CableCoefficients {
  double lambda_fill = 0.08;
  double lambda_insulation = 0.19;
  double lambda_metal = 40.0;
  double f_metal = 50.0;
  double reaction = 0.04;
  double t_ex = 3.2;
  double q = 3.0;
};

struct CableGeometry {
  double radius = 1.2;           // outer cable radius
  double r_metal = 0.2;
  double insulation = 0.055;
  double r_halo = 0.30;
  int resolution = 72;           // segments on the halo circle
  double background_h = 0.02;
  std::vector<Vec2> centers{{0.0, 0.45}, {-0.4, -0.15}, {0.2, -0.4}};

  /// Largest admissible center distance: radius − r_halo − background_h.
  double r_max() const { return radius - r_halo - background_h; }
};

MultiMeshStack make_cable_stack(const CableGeometry& g);
ProblemSpec cable_spec(const CableCoefficients& c);

class MultiCableProblem : public DesignProblem {
 public:
  MultiCableProblem(ProblemSpec spec, NitscheParams params, const CableGeometry& geometry);
  const DesignSpace& design() const override { return space_; }
  double functional(const MultiMeshStack& stack) const override;
  Evaluation evaluate(const MultiMeshStack& stack) const override;
  const ProblemSpec& spec() const { return spec_; }
  const NitscheParams& params() const { return params_; }

 private:
  ProblemSpec spec_;
  NitscheParams params_;
  DesignSpace space_;
};

// Geometric penalties only ----------------------------------------------

struct ToyGeometry {
  int n = 32;                    // background cells per side of the unit square
  Vec2 center{0.45, 0.52};
  double r_obstacle = 0.15;
  double r_patch = 0.32;
  int patch_rings = 10;
  int patch_segments = 96;
};

MultiMeshStack make_toy_stack(const ToyGeometry& g);

class GeometricToyProblem : public DesignProblem {
 public:
  GeometricToyProblem(GeometricTargets targets, DesignSpace space);
  const DesignSpace& design() const override { return space_; }
  double functional(const MultiMeshStack& stack) const override;
  Evaluation evaluate(const MultiMeshStack& stack) const override;
  void set_penalty_scale(double scale) override { scale_ = scale; }
  GeometricValues values(const MultiMeshStack& stack) const;

 private:
  GeometricTargets targets_;
  DesignSpace space_;
  double scale_ = 1.0;
};

}  // namespace mmshape
