#include "mmshape/drivers.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "json.hpp"
#include "mmshape/errors.hpp"
#include "mmshape/output.hpp"

namespace mmshape {

namespace {

using Clock = std::chrono::steady_clock;

double to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

double wrap_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  return w < 0.0 ? w + 360.0 : w;
}

ProblemSpec pde_spec(const RunConfig& cfg) {
  return cfg.problem == ProblemKind::Multicable ? cable_spec(cfg.coefficients) : example_spec();
}

DesignSpace toy_design(const RunConfig& cfg) {
  DesignSpace space;
  BoundaryNodesDesign b{0, marker::kGamma, H1Scheme{cfg.toy.h1_alpha}};
  if (cfg.toy.scheme == ToyScheme::EikonalAdvect) b.scheme = EikonalAdvectScheme{cfg.alpha0, cfg.alpha1};
  space.components.push_back(b);
  space.alpha = cfg.riesz_alpha;
  return space;
}

void prepare_out(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out_dir.string() + ": " + ec.message());
}

void write_summary(const RunConfig& cfg, const std::string& command, RunArtifacts& art, Clock::time_point start) {
  art.values["wall_time_s"] = std::chrono::duration<double>(Clock::now() - start).count();
  nlohmann::json j;
  j["command"] = command;
  j["problem"] = to_string(cfg.problem);
  for (const auto& [k, v] : art.text) j[k] = v;
  for (const auto& [k, v] : art.values) j[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  std::vector<std::string> files;
  for (const auto& f : art.files) files.push_back(f.string());
  const auto path = cfg.out_dir / "summary.json";
  files.push_back(path.string());
  j["files"] = files;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  art.files.push_back(path);
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// Background and submesh VTK files, optionally with state and adjoint.
void write_stack_vtk(const RunConfig& cfg, const MultiMeshStack& stack, const std::string& prefix,
                     const Field* state, const Field* adjoint, RunArtifacts& art) {
  if (!cfg.write_vtk) return;
  for (int b = 0; b < stack.num_blocks(); ++b) {
    std::vector<PointScalars> ps;
    if (state) ps.push_back({"T", to_std(block_values(stack, *state, b))});
    if (adjoint) ps.push_back({"adjoint", to_std(block_values(stack, *adjoint, b))});
    std::vector<CellScalars> cs;
    if (b == 0) {
      std::vector<double> status;
      for (CellStatus s : stack.classification.status) status.push_back(static_cast<double>(s));
      cs.push_back({"status", status});
    }
    const auto path = cfg.out_dir / (prefix + (b == 0 ? "_background" : "_submesh" + std::to_string(b)) + ".vtk");
    write_vtk(stack.mesh(b), path, ps, {}, cs);
    art.files.push_back(path);
  }
}

void write_meshes(const RunConfig& cfg, const MultiMeshStack& stack, const std::string& prefix, RunArtifacts& art) {
  for (int b = 0; b < stack.num_blocks(); ++b) {
    const auto path = cfg.out_dir / (prefix + (b == 0 ? "_background" : "_submesh" + std::to_string(b)) + ".mesh");
    write_mesh(stack.mesh(b), path);
    art.files.push_back(path);
  }
}

void record_design(const RunConfig& cfg, const MultiMeshStack& stack, const DesignSpace& space, RunArtifacts& art) {
  const auto labels = design_labels(space);
  const auto params = design_parameters(stack, space);
  for (std::size_t i = 0; i < labels.size(); ++i) art.values[labels[i]] = params[i];
  if (cfg.problem == ProblemKind::ExampleRotation) art.values["angle_deg"] = wrap_deg(params.at(0));
  if (cfg.problem == ProblemKind::Multicable && params.size() == 6) {
    const Vec2 c[3] = {{params[0], params[1]}, {params[2], params[3]}, {params[4], params[5]}};
    for (int i = 0; i < 3; ++i) {
      const Vec2 a = c[(i + 1) % 3] - c[i];
      const Vec2 b = c[(i + 2) % 3] - c[i];
      art.values["triangle_angle_" + std::to_string(i)] = to_deg(std::acos(a.dot(b) / (a.norm() * b.norm())));
    }
  }
}

}  // namespace

ProblemSetup make_problem(const RunConfig& cfg) {
  cfg.validate();
  ProblemSetup s;
  switch (cfg.problem) {
    case ProblemKind::ExampleRotation:
      s.stack = make_example_stack(cfg.example);
      s.problem = std::make_unique<RotationProblem>(example_spec(), cfg.nitsche, cfg.example.pivot, cfg.riesz_alpha);
      break;
    case ProblemKind::Multicable:
      s.stack = make_cable_stack(cfg.cable);
      s.problem = std::make_unique<MultiCableProblem>(cable_spec(cfg.coefficients), cfg.nitsche, cfg.cable);
      break;
    case ProblemKind::GeometricToy:
      s.stack = make_toy_stack(cfg.toy.geometry);
      s.problem = std::make_unique<GeometricToyProblem>(cfg.toy.targets, toy_design(cfg));
      break;
  }
  return s;
}

double direction_displacement(const MultiMeshStack& stack, const DesignSpace& space,
                              const DesignDirection& direction) {
  double m = 0.0;
  for (std::size_t k = 0; k < space.components.size(); ++k) {
    const auto& comp = space.components[k];
    const auto& dir = direction.at(k);
    if (const auto* r = std::get_if<RotationDesign>(&comp)) {
      const Mesh& mesh = stack.placed[r->submesh];
      double radius = 0.0;
      for (int f : mesh.facets_with_marker(marker::kGamma))
        for (int v : mesh.facets()[f]) radius = std::max(radius, (mesh.vertices()[v] - r->center).norm());
      m = std::max(m, std::abs(dir.omega) * radius);
    } else if (std::holds_alternative<TranslationDesign>(comp)) {
      m = std::max(m, dir.translation.norm());
    } else {
      for (const auto& v : dir.field) m = std::max(m, v.norm());
    }
  }
  return m;
}

RunArtifacts cmd_solve(const RunConfig& cfg, const DriverFlags&) {
  const auto start = Clock::now();
  prepare_out(cfg);
  ProblemSetup setup = make_problem(cfg);
  RunArtifacts art;
  const Evaluation ev = setup.problem->evaluate(setup.stack);
  art.values["J"] = ev.j;
  art.values["dofs"] = setup.stack.dofs.size();
  art.values["cut_cells"] = static_cast<double>(setup.stack.classification.count(CellStatus::Cut));
  art.values["covered_cells"] = static_cast<double>(setup.stack.classification.count(CellStatus::Covered));
  if (cfg.problem == ProblemKind::GeometricToy) {
    const auto v = static_cast<GeometricToyProblem&>(*setup.problem).values(setup.stack);
    art.values["fluid_area"] = v.fluid_area;
    art.values["centroid_x"] = v.centroid.x();
    art.values["centroid_y"] = v.centroid.y();
    write_stack_vtk(cfg, setup.stack, "solution", nullptr, nullptr, art);
  } else {
    const StateAdjoint sa = solve_state_adjoint(setup.stack, pde_spec(cfg), cfg.nitsche, true);
    write_stack_vtk(cfg, setup.stack, "solution", &sa.state, &sa.adjoint, art);
  }
  const auto dpath = cfg.out_dir / "density.csv";
  write_csv(density_table(ev.density), dpath);
  art.files.push_back(dpath);
  record_design(cfg, setup.stack, setup.problem->design(), art);
  write_summary(cfg, "solve", art, start);
  return art;
}

RunArtifacts cmd_optimize(const RunConfig& cfg, const DriverFlags&) {
  const auto start = Clock::now();
  prepare_out(cfg);
  ProblemSetup setup = make_problem(cfg);
  RunArtifacts art;
  std::vector<OptimizationResult> runs;
  if (cfg.problem == ProblemKind::GeometricToy)
    runs = penalty_continuation(*setup.problem, setup.stack, cfg.toy.penalty_stages, cfg.toy.penalty_factor,
                                cfg.optimizer);
  else
    runs.push_back(steepest_descent(*setup.problem, setup.stack, cfg.optimizer));

  int iterations = 0, evals = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto path =
        cfg.out_dir / (runs.size() == 1 ? std::string("history.csv") : "history_stage" + std::to_string(k) + ".csv");
    write_csv(history_table(runs[k].history), path);
    art.files.push_back(path);
    iterations += static_cast<int>(runs[k].history.entries.size()) - 1;
    evals += runs[k].history.total_evals;
  }
  const History& first = runs.front().history;
  const History& last = runs.back().history;
  art.values["iterations"] = iterations;
  art.values["evaluations"] = evals;
  if (!first.entries.empty()) art.values["J_initial"] = first.entries.front().j;
  if (!last.entries.empty()) {
    art.values["J_final"] = last.entries.back().j;
    art.values["min_quality"] = last.entries.back().min_quality;
  }
  art.text["stop_reason"] = last.stop_reason;
  if (!last.error.empty()) art.text["message"] = last.error;

  const MultiMeshStack& final_stack = runs.back().stack;
  record_design(cfg, final_stack, setup.problem->design(), art);
  if (cfg.problem == ProblemKind::GeometricToy) {
    const auto v = static_cast<GeometricToyProblem&>(*setup.problem).values(final_stack);
    art.values["fluid_area"] = v.fluid_area;
    art.values["fluid_area_rel_error"] = (v.fluid_area - cfg.toy.targets.fluid_area) / cfg.toy.targets.fluid_area;
    art.values["centroid_x"] = v.centroid.x();
    art.values["centroid_y"] = v.centroid.y();
    write_stack_vtk(cfg, final_stack, "final", nullptr, nullptr, art);
  } else if (last.stop_reason != "error") {
    const StateAdjoint sa = solve_state_adjoint(final_stack, pde_spec(cfg), cfg.nitsche, false);
    write_stack_vtk(cfg, final_stack, "final", &sa.state, nullptr, art);
  }
  write_meshes(cfg, final_stack, "final", art);
  write_summary(cfg, "optimize", art, start);
  for (const auto& r : runs)
    if (r.history.stop_reason == "error") throw Error("optimization aborted: " + r.history.error);
  return art;
}

RunArtifacts cmd_taylor(const RunConfig& cfg, const DriverFlags& flags) {
  const auto start = Clock::now();
  prepare_out(cfg);
  ProblemSetup setup = make_problem(cfg);
  const DesignSpace& space = setup.problem->design();
  RunArtifacts art;

  const Evaluation ev = setup.problem->evaluate(setup.stack);
  const DesignDirection dir = compute_direction(setup.stack, space, ev.density);
  const double slope = direction_slope(setup.stack, space, ev.density, dir);
  const double scale = direction_displacement(setup.stack, space, dir);
  if (!(scale > 0.0)) throw Error("taylor: the steepest-descent direction vanishes at the initial design");

  const std::vector<double> eps = flags.eps.value_or(default_taylor_steps());
  std::vector<double> steps;
  for (double e : eps) steps.push_back(e / scale);
  const MultiMeshStack& stack = setup.stack;
  DesignProblem& problem = *setup.problem;
  TaylorReport rep = taylor_test(
      [&](double e) { return problem.functional(apply_design_update(stack, space, dir, e)); }, ev.j, slope, steps);
  // report in displacement units
  for (auto& row : rep.rows) row.eps *= scale;
  rep.dj = slope / scale;

  const auto path = cfg.out_dir / "taylor.csv";
  write_csv(taylor_table(rep), path);
  art.files.push_back(path);
  art.values["J"] = ev.j;
  art.values["dJ"] = rep.dj;
  art.values["displacement_per_unit_step"] = scale;
  if (rep.rows.size() >= 2) {
    art.values["fitted_rate0"] = rep.fitted_rate0();
    art.values["fitted_rate1"] = rep.fitted_rate1();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double r : rep.rate1) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    art.values["min_rate1"] = lo;
    art.values["max_rate1"] = hi;
  }
  if (!rep.error.empty()) art.text["message"] = rep.error;
  write_summary(cfg, "taylor", art, start);
  if (!rep.error.empty()) throw Error("taylor: " + rep.error);
  return art;
}

RunArtifacts cmd_sweep(const RunConfig& cfg, const DriverFlags& flags) {
  const auto start = Clock::now();
  if (cfg.problem != ProblemKind::ExampleRotation) throw ConfigError("sweep: only the rotation example has an angle");
  const double from = flags.from_deg.value_or(0.0);
  const double to = flags.to_deg.value_or(360.0);
  const int steps = flags.steps.value_or(72);
  if (steps < 1 || !(to > from)) throw ConfigError("sweep: need --steps >= 1 and --to > --from");
  prepare_out(cfg);
  ProblemSetup setup = make_problem(cfg);
  RunArtifacts art;

  Table t;
  t.header = {"theta_deg", "J"};
  double best = std::numeric_limits<double>::infinity(), best_theta = from, worst = -best;
  for (int k = 0; k < steps; ++k) {
    const double theta = from + (to - from) * k / steps;
    const RigidPose pose{theta * std::numbers::pi / 180.0, cfg.example.pivot, Vec2::Zero()};
    const double j = setup.problem->functional(rebuild_stack(setup.stack, std::vector<RigidPose>{pose}));
    t.rows.push_back({theta, j});
    if (j < best) {
      best = j;
      best_theta = theta;
    }
    worst = std::max(worst, j);
  }
  const auto path = cfg.out_dir / "sweep.csv";
  write_csv(t, path);
  art.files.push_back(path);
  art.values["min_theta_deg"] = wrap_deg(best_theta);
  art.values["min_J"] = best;
  art.values["max_J"] = worst;
  write_summary(cfg, "sweep", art, start);
  return art;
}

RunArtifacts cmd_convergence(const RunConfig& cfg, const DriverFlags& flags) {
  const auto start = Clock::now();
  const ConvergenceSettings& c = cfg.convergence;
  const int levels = flags.levels.value_or(c.levels);
  if (levels < 2) throw ConfigError("convergence: need at least two levels");
  prepare_out(cfg);
  RunArtifacts art;

  const double pi = std::numbers::pi;
  const ScalarFunction exact = [pi](const Vec2& p) { return std::sin(pi * p.x()) * std::sin(pi * p.y()); };
  const auto source = [pi](const Vec2& p, int) {
    return 2.0 * pi * pi * std::sin(pi * p.x()) * std::sin(pi * p.y());
  };

  Table t;
  t.header = {"n", "h", "l2_error", "rate"};
  double prev_err = 0.0, prev_h = 0.0;
  double min_rate = std::numeric_limits<double>::infinity();
  for (int k = 0; k < levels; ++k) {
    const int n = c.base_n << k;
    const double h = 1.0 / n;
    double err = 0.0;
    if (c.mode == ConvergenceMode::SingleMesh) {
      const Mesh mesh = gen_rect_grid(0.0, 0.0, 1.0, 1.0, n, n);
      Assembler a(static_cast<int>(mesh.num_vertices()));
      assemble_laplace(a, mesh, {{region::kFill, 1.0}});
      assemble_source(a, mesh, source);
      SparseSystem sys{a.matrix(), a.rhs(), {}};
      apply_dirichlet(sys, mesh, marker::kExterior, [](const Vec2&) { return 0.0; });
      err = l2_error(mesh, solve_spd(sys), exact);
    } else {
      const Vec2 mid(0.5, 0.5);
      Mesh patch = relabel_facets(gen_disk(mid, c.patch_radius, h), marker::kExterior, marker::kLambda);
      const MultiMeshStack stack = build_stack(gen_rect_grid(0.0, 0.0, 1.0, 1.0, n, n), {std::move(patch)},
                                               {RigidPose{c.patch_angle, mid, c.patch_shift}});
      ProblemSpec spec;
      spec.source = source;
      spec.bcs[marker::kExterior] = BoundaryCondition::dirichlet([](const Vec2&) { return 0.0; });
      err = l2_error(stack, solve_state(stack, spec, cfg.nitsche), exact);
    }
    double rate = std::numeric_limits<double>::quiet_NaN();
    if (k > 0) {
      rate = std::log(prev_err / err) / std::log(prev_h / h);
      min_rate = std::min(min_rate, rate);
      art.values["rate_last"] = rate;
    }
    t.rows.push_back({static_cast<double>(n), h, err, rate});
    prev_err = err;
    prev_h = h;
  }
  const auto path = cfg.out_dir / "convergence.csv";
  write_csv(t, path);
  art.files.push_back(path);
  art.values["rate_min"] = min_rate;
  art.values["l2_error_finest"] = prev_err;
  art.text["mode"] = c.mode == ConvergenceMode::SingleMesh ? "single" : "multimesh";
  write_summary(cfg, "convergence", art, start);
  return art;
}

}  // namespace mmshape
