#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mmshape/drivers.hpp"
#include "mmshape/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void print_summary(const mmshape::RunArtifacts& art) {
  for (const auto& [k, v] : art.text) std::printf("%-24s %s\n", k.c_str(), v.c_str());
  for (const auto& [k, v] : art.values) std::printf("%-24s %.10g\n", k.c_str(), v);
  for (const auto& f : art.files) std::printf("wrote %s\n", f.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape optimization on overlapping meshes"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  mmshape::DriverFlags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
  };

  auto* solve = app.add_subcommand("solve", "solve state and adjoint, write fields and the gradient density");
  auto* optimize = app.add_subcommand("optimize", "run steepest descent on the configured design");
  auto* taylor = app.add_subcommand("taylor", "Taylor test along the steepest-descent direction");
  auto* sweep = app.add_subcommand("sweep", "functional over rotation angles");
  auto* convergence = app.add_subcommand("convergence", "manufactured-solution convergence study");
  for (auto* s : {solve, optimize, taylor, sweep, convergence}) add_common(s);

  taylor->add_option_function<std::vector<double>>(
      "--eps", [&](const std::vector<double>& v) { flags.eps = v; }, "decreasing step list (boundary displacement)")
      ->delimiter(',');
  sweep->add_option_function<double>("--from", [&](double v) { flags.from_deg = v; }, "first angle in degrees");
  sweep->add_option_function<double>("--to", [&](double v) { flags.to_deg = v; }, "end angle in degrees (excluded)");
  sweep->add_option_function<int>("--steps", [&](int v) { flags.steps = v; }, "number of samples");
  convergence->add_option_function<int>("--levels", [&](int v) { flags.levels = v; }, "number of meshes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    mmshape::RunConfig cfg = mmshape::parse_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    mmshape::RunArtifacts art;
    if (*solve) art = mmshape::cmd_solve(cfg, flags);
    else if (*optimize) art = mmshape::cmd_optimize(cfg, flags);
    else if (*taylor) art = mmshape::cmd_taylor(cfg, flags);
    else if (*sweep) art = mmshape::cmd_sweep(cfg, flags);
    else art = mmshape::cmd_convergence(cfg, flags);
    print_summary(art);
    return 0;
  } catch (const mmshape::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mmshape::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mmshape::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
