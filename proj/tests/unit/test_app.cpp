#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mmshape/drivers.hpp"
#include "mmshape/errors.hpp"
#include "mmshape/output.hpp"
#include "mmshape/problems.hpp"

using namespace mmshape;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mmshape_app_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("config defaults and validation") {
  RunConfig cfg = parse_config_string("[nitsche]\n");
  CHECK(cfg.nitsche.beta0 == 4.0);
  CHECK(cfg.nitsche.beta1 == 4.0);
  CHECK(cfg.alpha0 == 1e-3);
  CHECK(cfg.alpha1 == 25.0);
  CHECK(cfg.coefficients.reaction == 0.04);
  CHECK(cfg.coefficients.t_ex == 3.2);
  CHECK(cfg.coefficients.q == 3.0);
  CHECK(cfg.coefficients.lambda_fill == 0.08);
  CHECK(cfg.coefficients.lambda_insulation == 0.19);
  CHECK(cfg.coefficients.lambda_metal == 40.0);
  CHECK(cfg.coefficients.f_metal == 50.0);
  CHECK(cfg.cable.radius == 1.2);
  CHECK(cfg.cable.r_metal == 0.2);
  CHECK(cfg.cable.insulation == 0.055);
  CHECK(cfg.optimizer.tol == 1e-6);

  CHECK_THROWS_AS(parse_config_string("[nitsche]\nbeta0 = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[nitsche]\nbeta2 = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[solver]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[nitsche]\nbeta0 = 4\nbeta0 = 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[optimizer]\ntol = fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_config(std::filesystem::path("/nonexistent/config.ini")), ConfigError);

  try {
    parse_config_string("[problem]\ntype = multicable\n\n[meshes]\nnx = 4\nbogus = 1\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 6") != std::string::npos);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
}

TEST_CASE("q reaches the functional") {
  RunConfig cfg = parse_config_string("[problem]\ntype = multicable\nq = 3\n\n[meshes]\nbackground_h = 0.04\n"
                                      "resolution = 24\nr_halo = 0.35\ncenters = 0, 0\n");
  ProblemSetup setup = make_problem(cfg);
  auto* cable = dynamic_cast<MultiCableProblem*>(setup.problem.get());
  REQUIRE(cable != nullptr);
  CHECK(cable->spec().functional == FunctionalKind::Lq);
  CHECK(cable->spec().q == 3.0);
  CHECK(cable->spec().integrand(2.0) == doctest::Approx(8.0 / 3));
}

TEST_CASE("CSV round trip") {
  History h;
  h.labels = {"angle_deg_0"};
  h.entries.push_back({0, 0.1 + 0.2, -1.0 / 3.0, 0.0, 1, 0.7236, {1e-300}});
  h.entries.push_back({1, 5e-324, std::nan(""), 2.0, 3, 0.7236, {-123456.789012345678}});
  const auto path = scratch("csv") / "history.csv";
  write_csv(history_table(h), path);
  Table t = read_csv(path);
  Table ref = history_table(h);
  REQUIRE(t.header == ref.header);
  REQUIRE(t.rows.size() == ref.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.rows[r].size(); ++c) {
      if (std::isnan(ref.rows[r][c])) {
        CHECK(std::isnan(t.rows[r][c]));
      } else {
        CHECK(t.rows[r][c] == ref.rows[r][c]);
      }
    }
  const auto text = lines_of(path);
  CHECK(text.front() == "iteration,J,slope,xi,evals,min_quality,angle_deg_0");
  CHECK_THROWS_AS(write_csv(t, "/proc/no/such/dir/x.csv"), IoError);
}

TEST_CASE("VTK output") {
  Mesh m = gen_rect_grid(0, 0, 1, 1, 3, 2);
  const auto path = scratch("vtk") / "ones.vtk";
  write_vtk(m, path, {{"T", std::vector<double>(m.num_vertices(), 1.0)}});
  const auto text = lines_of(path);
  std::size_t cells = 0, i = 0;
  for (; i < text.size(); ++i)
    if (text[i].rfind("CELLS ", 0) == 0) {
      std::istringstream(text[i].substr(6)) >> cells;
      break;
    }
  CHECK(cells == m.num_cells());
  for (i = 0; i < text.size(); ++i)
    if (text[i] == "SCALARS T double 1") break;
  REQUIRE(i + 1 + m.num_vertices() < text.size() + 1);
  for (std::size_t k = 0; k < m.num_vertices(); ++k) CHECK(std::stod(text[i + 2 + k]) == 1.0);
  CHECK_THROWS_AS(write_vtk(m, path, {{"bad", {1.0}}}), InvalidArgument);
}

TEST_CASE("convergence driver") {
  RunConfig cfg = parse_config_string("[meshes]\nconvergence_mode = multimesh\n[output]\nvtk = false\n");
  cfg.out_dir = scratch("convergence");
  RunArtifacts art = cmd_convergence(cfg);
  for (const auto& f : art.files) CHECK(std::filesystem::exists(f));
  Table t = read_csv(cfg.out_dir / "convergence.csv");
  const auto rate = t.column("rate");
  REQUIRE(t.rows.size() == 4);
  for (std::size_t r = t.rows.size() - 2; r < t.rows.size(); ++r)
    CHECK(t.rows[r][rate] == doctest::Approx(2.0).epsilon(0.1));

  std::ifstream in(cfg.out_dir / "summary.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j.at("command") == "convergence");
  CHECK(j.at("rate_last").get<double>() == doctest::Approx(art.values.at("rate_last")));
}

TEST_CASE("sweep and optimizer agree on the example") {
  RunConfig cfg = parse_config_string("[problem]\ntype = example_rotation\n[output]\nvtk = false\n");
  cfg.out_dir = scratch("sweep");
  RunArtifacts sweep = cmd_sweep(cfg);
  Table t = read_csv(cfg.out_dir / "sweep.csv");
  CHECK(t.rows.size() == 72);
  CHECK(t.rows.front()[t.column("theta_deg")] == 0.0);

  cfg.out_dir = scratch("optimize");
  RunArtifacts opt = cmd_optimize(cfg);
  for (const auto& f : opt.files) CHECK(std::filesystem::exists(f));
  const double theta = opt.values.at("angle_deg");
  double gap = std::abs(theta - sweep.values.at("min_theta_deg"));
  gap = std::min(gap, 360.0 - gap);
  CHECK(gap <= 15.0);
  Table h = read_csv(cfg.out_dir / "history.csv");
  CHECK(h.rows.size() == static_cast<std::size_t>(opt.values.at("iterations")) + 1);

  RunConfig toy = parse_config_string("[problem]\ntype = geometric_toy\n");
  CHECK_THROWS_AS(cmd_sweep(toy), ConfigError);
}

TEST_CASE("solve driver is reproducible") {
  RunConfig cfg = parse_config_string("[meshes]\nnx = 16\nny = 16\n[output]\nvtk = true\n");
  cfg.out_dir = scratch("solve_a");
  RunArtifacts a = cmd_solve(cfg);
  cfg.out_dir = scratch("solve_b");
  RunArtifacts b = cmd_solve(cfg);
  CHECK(a.values.at("J") == b.values.at("J"));
  CHECK(lines_of(a.files.front()) == lines_of(b.files.front()));
}
