#include "mmshape/problems.hpp"

#include <cmath>

#include "mmshape/errors.hpp"

namespace mmshape {

MultiMeshStack make_example_stack(const ExampleGeometry& g) {
  Mesh background = gen_rect_grid(g.lower.x(), g.lower.y(), g.upper.x(), g.upper.y(), g.nx, g.ny);
  const double hole_angle = std::atan2(g.hole_offset.y(), g.hole_offset.x());
  Mesh patch = gen_elliptic_patch(g.pivot, g.patch_radius, g.pivot + g.hole_offset, g.semi_major, g.semi_minor,
                                  hole_angle, g.patch_rings, g.patch_segments);
  RigidPose pose{g.initial_angle, g.pivot, Vec2::Zero()};
  return build_stack(std::move(background), {std::move(patch)}, {pose});
}

ProblemSpec example_spec() {
  ProblemSpec s;
  s.conductivity = {{region::kFill, 1.0}};
  s.source = [](const Vec2& p, int) { return p.x() * std::sin(p.x()) * std::cos(p.y()); };
  s.bcs[marker::kGamma] = BoundaryCondition::dirichlet([](const Vec2&) { return 1.0; });
  s.bcs[marker::kExterior] = BoundaryCondition::dirichlet([](const Vec2&) { return 0.0; });
  s.functional = FunctionalKind::L2Squared;
  return s;
}

RotationProblem::RotationProblem(ProblemSpec spec, NitscheParams params, Vec2 pivot, double alpha)
    : spec_(std::move(spec)), params_(params) {
  space_.components.push_back(RotationDesign{0, pivot});
  space_.alpha = alpha;
}

double RotationProblem::functional(const MultiMeshStack& stack) const {
  return solve_state_adjoint(stack, spec_, params_, false).functional;
}

Evaluation RotationProblem::evaluate(const MultiMeshStack& stack) const {
  const StateAdjoint sa = solve_state_adjoint(stack, spec_, params_, true);
  return {sa.functional, density_dirichlet_example(stack, spec_, sa.state, sa.adjoint, 1, marker::kGamma)};
}

MultiMeshStack make_cable_stack(const CableGeometry& g) {
  if (g.centers.empty()) throw InvalidArgument("make_cable_stack: at least one cable required");
  Mesh background = gen_disk(Vec2::Zero(), g.radius, g.background_h);
  std::vector<Mesh> subs;
  std::vector<RigidPose> poses;
  for (const auto& c : g.centers) {
    if (c.norm() > g.r_max() + 1e-12)
      throw InvalidArgument("make_cable_stack: cable center outside the admissible disk");
    subs.push_back(gen_cable_submesh(Vec2::Zero(), g.r_metal, g.r_metal + g.insulation, g.r_halo, g.resolution));
    poses.push_back(RigidPose{0.0, Vec2::Zero(), c});
  }
  return build_stack(std::move(background), std::move(subs), std::move(poses));
}

ProblemSpec cable_spec(const CableCoefficients& c) {
  ProblemSpec s;
  s.conductivity = {{region::kFill, c.lambda_fill}, {region::kInsulation, c.lambda_insulation},
                    {region::kMetal, c.lambda_metal}};
  const double f = c.f_metal;
  s.source = [f](const Vec2&, int reg) { return reg == region::kMetal ? f : 0.0; };
  s.reaction = c.reaction;
  s.bcs[marker::kExterior] = BoundaryCondition::robin(c.t_ex);
  s.functional = FunctionalKind::Lq;
  s.q = c.q;
  return s;
}

MultiCableProblem::MultiCableProblem(ProblemSpec spec, NitscheParams params, const CableGeometry& geometry)
    : spec_(std::move(spec)), params_(params) {
  for (int i = 0; i < static_cast<int>(geometry.centers.size()); ++i)
    space_.components.push_back(TranslationDesign{i, Vec2::Zero(), geometry.r_max()});
}

double MultiCableProblem::functional(const MultiMeshStack& stack) const {
  return solve_state_adjoint(stack, spec_, params_, false).functional;
}

Evaluation MultiCableProblem::evaluate(const MultiMeshStack& stack) const {
  const StateAdjoint sa = solve_state_adjoint(stack, spec_, params_, true);
  Evaluation ev{sa.functional, {}};
  for (int i = 0; i < stack.num_submeshes(); ++i)
    ev.density.append(density_multicable(stack, spec_, sa.state, sa.adjoint, i + 1));
  return ev;
}

MultiMeshStack make_toy_stack(const ToyGeometry& g) {
  Mesh background = gen_rect_grid(0.0, 0.0, 1.0, 1.0, g.n, g.n);
  Mesh patch = gen_annulus(g.center, g.r_obstacle, g.r_patch, g.patch_rings, g.patch_segments);
  return build_stack(std::move(background), {std::move(patch)});
}

GeometricToyProblem::GeometricToyProblem(GeometricTargets targets, DesignSpace space)
    : targets_(targets), space_(std::move(space)) {}

GeometricValues GeometricToyProblem::values(const MultiMeshStack& stack) const {
  GeometricTargets t = targets_;
  t.gamma_volume *= scale_;
  t.gamma_centroid *= scale_;
  int submesh = 0;
  if (!space_.components.empty())
    submesh = std::visit([](const auto& c) { return c.submesh; }, space_.components.front());
  return geometric_functionals(stack.placed[submesh], marker::kGamma, t, stack.background.total_area(), submesh + 1);
}

double GeometricToyProblem::functional(const MultiMeshStack& stack) const { return values(stack).total(); }

Evaluation GeometricToyProblem::evaluate(const MultiMeshStack& stack) const {
  GeometricValues v = values(stack);
  return {v.total(), std::move(v.density)};
}

}  // namespace mmshape
