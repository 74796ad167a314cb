#pragma once

#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "mmshape/mmassembly.hpp"
#include "mmshape/optim.hpp"
#include "mmshape/problems.hpp"

namespace mmshape {

enum class ProblemKind { ExampleRotation, Multicable, GeometricToy };

std::string to_string(ProblemKind kind);

/// Deformation scheme of the geometric toy's obstacle boundary.
enum class ToyScheme { EikonalAdvect, H1 };

struct ToySettings {
  ToyGeometry geometry;
  // grow the obstacle to radius 0.18 and move it to the square's center
  GeometricTargets targets{1.0 - std::numbers::pi * 0.18 * 0.18, Vec2(0.5, 0.5), 100.0, 100.0};
  ToyScheme scheme = ToyScheme::EikonalAdvect;
  double h1_alpha = 1.0;
  int penalty_stages = 5;
  double penalty_factor = 2.0;
};

enum class ConvergenceMode { SingleMesh, MultiMesh };

struct ConvergenceSettings {
  ConvergenceMode mode = ConvergenceMode::MultiMesh;
  int base_n = 16;
  int levels = 4;  // base mesh plus three refinements
  double patch_radius = 0.27;
  double patch_angle = 0.3;  // radians
  Vec2 patch_shift{0.013, 0.007};
};

struct RunConfig {
  ProblemKind problem = ProblemKind::ExampleRotation;
  ExampleGeometry example;
  CableGeometry cable;
  CableCoefficients coefficients;
  ToySettings toy;
  ConvergenceSettings convergence;
  NitscheParams nitsche;
  double riesz_alpha = 1.0;      // rigid-motion representer weight
  double alpha0 = 1e-3;          // advection diffusion
  double alpha1 = 25.0;          // eikonal smoothing
  OptimizerOptions optimizer;
  std::filesystem::path out_dir = "out";
  bool write_vtk = true;

  void validate() const;  // throws ConfigError
};

/// INI-style `key = value` under [problem] [meshes] [nitsche] [deform]
/// [optimizer] [output]. Unknown sections or keys and duplicate keys are
/// errors; missing keys keep their defaults.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_string(const std::string& text);

}  // namespace mmshape
