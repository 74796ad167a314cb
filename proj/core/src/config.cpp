#include "mmshape/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "mmshape/errors.hpp"

namespace mmshape {

namespace pt = boost::property_tree;

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::ExampleRotation: return "example_rotation";
    case ProblemKind::Multicable: return "multicable";
    case ProblemKind::GeometricToy: return "geometric_toy";
  }
  return "unknown";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  if (trim(v.substr(used)) != "" || !std::isfinite(d)) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return d;
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v, char sep) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(to_double(key, trim(item)));
  return out;
}

Vec2 to_point(const std::string& key, const std::string& v) {
  const auto xs = to_list(key, v, ',');
  if (xs.size() != 2) throw ConfigError(key + ": expected 'x, y', got '" + v + "'");
  return {xs[0], xs[1]};
}

std::vector<Vec2> to_points(const std::string& key, const std::string& v) {
  std::vector<Vec2> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!trim(item).empty()) out.push_back(to_point(key, item));
  if (out.empty()) throw ConfigError(key + ": expected 'x, y; x, y; ...'");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

template <typename F>
Setter num(F f) {
  return [f](RunConfig& c, const std::string& k, const std::string& v) { f(c) = to_double(k, v); };
}
template <typename F>
Setter integer(F f) {
  return [f](RunConfig& c, const std::string& k, const std::string& v) { f(c) = to_int(k, v); };
}
template <typename F>
Setter point(F f) {
  return [f](RunConfig& c, const std::string& k, const std::string& v) { f(c) = to_point(k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      // problem
      {"problem.type",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "example_rotation") c.problem = ProblemKind::ExampleRotation;
         else if (v == "multicable") c.problem = ProblemKind::Multicable;
         else if (v == "geometric_toy") c.problem = ProblemKind::GeometricToy;
         else throw ConfigError(k + ": unknown problem '" + v + "'");
       }},
      {"problem.q", num([](RunConfig& c) -> double& { return c.coefficients.q; })},
      {"problem.reaction", num([](RunConfig& c) -> double& { return c.coefficients.reaction; })},
      {"problem.t_ex", num([](RunConfig& c) -> double& { return c.coefficients.t_ex; })},
      {"problem.lambda_fill", num([](RunConfig& c) -> double& { return c.coefficients.lambda_fill; })},
      {"problem.lambda_insulation", num([](RunConfig& c) -> double& { return c.coefficients.lambda_insulation; })},
      {"problem.lambda_metal", num([](RunConfig& c) -> double& { return c.coefficients.lambda_metal; })},
      {"problem.f_metal", num([](RunConfig& c) -> double& { return c.coefficients.f_metal; })},
      {"problem.target_area", num([](RunConfig& c) -> double& { return c.toy.targets.fluid_area; })},
      {"problem.target_centroid", point([](RunConfig& c) -> Vec2& { return c.toy.targets.centroid; })},
      {"problem.gamma_volume", num([](RunConfig& c) -> double& { return c.toy.targets.gamma_volume; })},
      {"problem.gamma_centroid", num([](RunConfig& c) -> double& { return c.toy.targets.gamma_centroid; })},
      {"problem.penalty_stages", integer([](RunConfig& c) -> int& { return c.toy.penalty_stages; })},
      {"problem.penalty_factor", num([](RunConfig& c) -> double& { return c.toy.penalty_factor; })},
      // meshes: rotation example
      {"meshes.nx", integer([](RunConfig& c) -> int& { return c.example.nx; })},
      {"meshes.ny", integer([](RunConfig& c) -> int& { return c.example.ny; })},
      {"meshes.lower", point([](RunConfig& c) -> Vec2& { return c.example.lower; })},
      {"meshes.upper", point([](RunConfig& c) -> Vec2& { return c.example.upper; })},
      {"meshes.pivot", point([](RunConfig& c) -> Vec2& { return c.example.pivot; })},
      {"meshes.hole_offset", point([](RunConfig& c) -> Vec2& { return c.example.hole_offset; })},
      {"meshes.semi_major", num([](RunConfig& c) -> double& { return c.example.semi_major; })},
      {"meshes.semi_minor", num([](RunConfig& c) -> double& { return c.example.semi_minor; })},
      {"meshes.patch_radius", num([](RunConfig& c) -> double& { return c.example.patch_radius; })},
      {"meshes.patch_rings", integer([](RunConfig& c) -> int& { return c.example.patch_rings; })},
      {"meshes.patch_segments", integer([](RunConfig& c) -> int& { return c.example.patch_segments; })},
      {"meshes.initial_angle_deg",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.example.initial_angle = to_double(k, v) * std::numbers::pi / 180.0;
       }},
      // meshes: multicable
      {"meshes.cable_radius", num([](RunConfig& c) -> double& { return c.cable.radius; })},
      {"meshes.r_metal", num([](RunConfig& c) -> double& { return c.cable.r_metal; })},
      {"meshes.insulation", num([](RunConfig& c) -> double& { return c.cable.insulation; })},
      {"meshes.r_halo", num([](RunConfig& c) -> double& { return c.cable.r_halo; })},
      {"meshes.resolution", integer([](RunConfig& c) -> int& { return c.cable.resolution; })},
      {"meshes.background_h", num([](RunConfig& c) -> double& { return c.cable.background_h; })},
      {"meshes.centers",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.cable.centers = to_points(k, v); }},
      // meshes: geometric toy
      {"meshes.toy_n", integer([](RunConfig& c) -> int& { return c.toy.geometry.n; })},
      {"meshes.obstacle_center", point([](RunConfig& c) -> Vec2& { return c.toy.geometry.center; })},
      {"meshes.r_obstacle", num([](RunConfig& c) -> double& { return c.toy.geometry.r_obstacle; })},
      {"meshes.r_patch", num([](RunConfig& c) -> double& { return c.toy.geometry.r_patch; })},
      {"meshes.toy_rings", integer([](RunConfig& c) -> int& { return c.toy.geometry.patch_rings; })},
      {"meshes.toy_segments", integer([](RunConfig& c) -> int& { return c.toy.geometry.patch_segments; })},
      // meshes: convergence study
      {"meshes.convergence_mode",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "single") c.convergence.mode = ConvergenceMode::SingleMesh;
         else if (v == "multimesh") c.convergence.mode = ConvergenceMode::MultiMesh;
         else throw ConfigError(k + ": expected single or multimesh, got '" + v + "'");
       }},
      {"meshes.convergence_base_n", integer([](RunConfig& c) -> int& { return c.convergence.base_n; })},
      {"meshes.convergence_levels", integer([](RunConfig& c) -> int& { return c.convergence.levels; })},
      // nitsche
      {"nitsche.beta0", num([](RunConfig& c) -> double& { return c.nitsche.beta0; })},
      {"nitsche.beta1", num([](RunConfig& c) -> double& { return c.nitsche.beta1; })},
      // deform
      {"deform.alpha", num([](RunConfig& c) -> double& { return c.riesz_alpha; })},
      {"deform.alpha0", num([](RunConfig& c) -> double& { return c.alpha0; })},
      {"deform.alpha1", num([](RunConfig& c) -> double& { return c.alpha1; })},
      {"deform.h1_alpha", num([](RunConfig& c) -> double& { return c.toy.h1_alpha; })},
      {"deform.toy_scheme",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "eikonal") c.toy.scheme = ToyScheme::EikonalAdvect;
         else if (v == "h1") c.toy.scheme = ToyScheme::H1;
         else throw ConfigError(k + ": expected eikonal or h1, got '" + v + "'");
       }},
      // optimizer
      {"optimizer.c1", num([](RunConfig& c) -> double& { return c.optimizer.c1; })},
      {"optimizer.backtrack", num([](RunConfig& c) -> double& { return c.optimizer.backtrack; })},
      {"optimizer.initial_step", num([](RunConfig& c) -> double& { return c.optimizer.initial_step; })},
      {"optimizer.max_backtracks", integer([](RunConfig& c) -> int& { return c.optimizer.max_backtracks; })},
      {"optimizer.max_iterations", integer([](RunConfig& c) -> int& { return c.optimizer.max_iterations; })},
      {"optimizer.tol", num([](RunConfig& c) -> double& { return c.optimizer.tol; })},
      // output
      {"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
      {"output.vtk",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.write_vtk = to_bool(k, v); }},
  };
  return table;
}

// Line of `key` inside [section] for error messages; 0 when not found.
int locate(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line, current;
  for (int n = 1; std::getline(in, line); ++n) {
    const std::string t = trim(line);
    if (t.size() > 1 && t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
    } else if (current == section) {
      const auto eq = t.find('=');
      if (eq != std::string::npos && trim(t.substr(0, eq)) == key) return n;
    }
  }
  return 0;
}

std::string at_line(const std::string& text, const std::string& section, const std::string& key) {
  const int n = locate(text, section, key);
  return n > 0 ? "line " + std::to_string(n) + ": " : "";
}

constexpr const char* kSections[] = {"problem", "meshes", "nitsche", "deform", "optimizer", "output"};

bool known_section(const std::string& name) {
  return std::find(std::begin(kSections), std::end(kSections), name) != std::end(kSections);
}

// The INI reader drops empty sections, so headers are checked on the raw text.
void check_section_headers(const std::string& text) {
  std::istringstream in(text);
  int n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    const std::string t = trim(line);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']') continue;
    const std::string name = trim(t.substr(1, t.size() - 2));
    if (!known_section(name)) throw ConfigError("line " + std::to_string(n) + ": unknown section [" + name + "]");
  }
}

RunConfig from_tree(const pt::ptree& tree, const std::string& text) {
  check_section_headers(text);
  RunConfig cfg;
  for (const auto& [name, section] : tree) {
    if (!known_section(name)) {
      if (section.empty()) throw ConfigError("key '" + name + "' outside of a section");
      throw ConfigError("unknown section [" + name + "]");
    }
    for (const auto& [key, value] : section) {
      const std::string full = name + "." + key;
      const auto it = setters().find(full);
      if (it == setters().end())
        throw ConfigError(at_line(text, name, key) + "unknown key '" + key + "' in section [" + name + "]");
      try {
        it->second(cfg, full, trim(value.data()));
      } catch (const ConfigError& e) {
        throw ConfigError(at_line(text, name, key) + e.what());
      }
    }
  }
  cfg.validate();
  return cfg;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void RunConfig::validate() const {
  try {
    nitsche.validate();
    optimizer.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  require(example.nx >= 2 && example.ny >= 2, "meshes.nx/ny must be at least 2");
  require(example.upper.x() > example.lower.x() && example.upper.y() > example.lower.y(),
          "meshes.upper must lie above and right of meshes.lower");
  require(example.semi_major > 0.0 && example.semi_minor > 0.0, "meshes.semi_major/semi_minor must be positive");
  require(example.patch_radius > example.hole_offset.norm() + example.semi_major,
          "meshes.patch_radius must enclose the hole");
  require(example.patch_rings >= 1 && example.patch_segments >= 8, "meshes.patch_rings/patch_segments too small");

  require(coefficients.q > 1.0, "problem.q must exceed 1");
  require(coefficients.lambda_fill > 0.0 && coefficients.lambda_insulation > 0.0 && coefficients.lambda_metal > 0.0,
          "problem.lambda_* must be positive");
  require(cable.radius > 0.0 && cable.background_h > 0.0, "meshes.cable_radius/background_h must be positive");
  require(0.0 < cable.r_metal && cable.insulation > 0.0 && cable.r_metal + cable.insulation < cable.r_halo,
          "meshes: need 0 < r_metal < r_metal + insulation < r_halo");
  require(cable.resolution >= 8, "meshes.resolution must be at least 8");
  require(cable.r_max() > 0.0, "meshes.r_halo leaves no room inside the cable");
  require(!cable.centers.empty(), "meshes.centers must list at least one cable");
  for (const auto& c : cable.centers)
    require(c.norm() <= cable.r_max() + 1e-12, "meshes.centers: center outside the admissible disk");

  require(toy.geometry.n >= 2, "meshes.toy_n must be at least 2");
  require(0.0 < toy.geometry.r_obstacle && toy.geometry.r_obstacle < toy.geometry.r_patch,
          "meshes: need 0 < r_obstacle < r_patch");
  require(toy.targets.gamma_volume >= 0.0 && toy.targets.gamma_centroid >= 0.0, "problem.gamma_* must be >= 0");
  require(toy.penalty_stages >= 1 && toy.penalty_factor > 0.0, "problem.penalty_stages/penalty_factor invalid");
  require(toy.h1_alpha > 0.0, "deform.h1_alpha must be positive");

  require(convergence.base_n >= 2 && convergence.levels >= 2, "meshes.convergence_base_n/levels too small");
  require(riesz_alpha > 0.0 && alpha0 > 0.0 && alpha1 > 0.0, "deform.alpha/alpha0/alpha1 must be positive");
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  return from_tree(tree, text);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_string(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace mmshape
