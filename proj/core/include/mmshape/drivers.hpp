#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmshape/config.hpp"

namespace mmshape {

/// Command line overrides shared by the drivers.
struct DriverFlags {
  std::optional<int> levels;                // convergence: number of meshes
  std::optional<std::vector<double>> eps;   // taylor: step list
  std::optional<double> from_deg, to_deg;   // sweep range
  std::optional<int> steps;                 // sweep samples
};

/// Files written by a driver plus the numbers of its summary.json.
struct RunArtifacts {
  std::vector<std::filesystem::path> files;
  std::map<std::string, double> values;
  std::map<std::string, std::string> text;
};

struct ProblemSetup {
  std::unique_ptr<DesignProblem> problem;
  MultiMeshStack stack;
};

/// Problem object and initial stack of a configuration.
ProblemSetup make_problem(const RunConfig& cfg);

/// Largest boundary displacement produced by a unit step along `direction`
/// (rotation: |ω| times the largest Γ radius about the center).
double direction_displacement(const MultiMeshStack& stack, const DesignSpace& space, const DesignDirection& direction);

/// J, state/adjoint fields and the gradient density of the initial design.
RunArtifacts cmd_solve(const RunConfig& cfg, const DriverFlags& flags = {});
/// Steepest descent (penalty continuation for the geometric toy).
RunArtifacts cmd_optimize(const RunConfig& cfg, const DriverFlags& flags = {});
/// Taylor test along the steepest-descent direction. Each ε is the largest
/// boundary displacement of the step; default 0.1·2⁻ᵏ, k = 0..5.
RunArtifacts cmd_taylor(const RunConfig& cfg, const DriverFlags& flags = {});
/// J over a uniform grid of rotation angles (rotation example only).
RunArtifacts cmd_sweep(const RunConfig& cfg, const DriverFlags& flags = {});
/// Manufactured sin(πx)sin(πy) study on the single or overlapping unit-square mesh.
RunArtifacts cmd_convergence(const RunConfig& cfg, const DriverFlags& flags = {});

}  // namespace mmshape
