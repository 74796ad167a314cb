#include "mmshape/optim.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mmshape/errors.hpp"

namespace mmshape {

void OptimizerOptions::validate() const {
  if (!(c1 > 0.0 && c1 < 1.0)) throw InvalidArgument("OptimizerOptions: c1 must lie in (0, 1)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidArgument("OptimizerOptions: backtrack must lie in (0, 1)");
  if (!(initial_step > 0.0)) throw InvalidArgument("OptimizerOptions: initial step must be positive");
  if (!(tol > 0.0)) throw InvalidArgument("OptimizerOptions: tol must be positive");
  if (max_backtracks < 0 || max_iterations < 1) throw InvalidArgument("OptimizerOptions: invalid iteration limits");
}

ArmijoResult armijo(const std::function<double(double)>& eval_j, double j0, double slope, double xi0,
                    const OptimizerOptions& opts, const std::function<double(double)>& predicted) {
  if (!(slope < 0.0)) throw InvalidArgument("armijo: slope must be negative");
  ArmijoResult r;
  double xi = xi0;
  for (int k = 0; k <= opts.max_backtracks; ++k) {
    double j = std::numeric_limits<double>::infinity();
    ++r.evals;
    try {
      j = eval_j(xi);
    } catch (const InvalidStep&) {
    } catch (const UnsupportedConfiguration&) {
    }
    const double pred = predicted ? predicted(xi) : xi * slope;
    if (std::isfinite(j) && j <= j0 + opts.c1 * pred) {
      r.xi = xi;
      r.j = j;
      return r;
    }
    xi *= opts.backtrack;
  }
  throw LineSearchFailure("armijo: no sufficient decrease after " + std::to_string(opts.max_backtracks) +
                          " backtracking steps");
}

DesignDirection project_design(const MultiMeshStack& stack, const DesignSpace& space,
                               const DesignDirection& direction, double xi) {
  DesignDirection out = direction;
  if (xi == 0.0) return out;
  for (std::size_t k = 0; k < space.components.size(); ++k) {
    const auto* t = std::get_if<TranslationDesign>(&space.components[k]);
    if (!t || !t->r_max) continue;
    const Vec2 pos = stack.poses[t->submesh].apply(t->anchor);
    const Vec2 target = pos + xi * direction[k].translation;
    const double r = target.norm();
    if (r <= *t->r_max) continue;
    const Vec2 clipped = target * (*t->r_max / r);
    out[k].translation = (clipped - pos) / xi;
  }
  return out;
}

std::vector<std::string> design_labels(const DesignSpace& space) {
  std::vector<std::string> labels;
  for (const auto& c : space.components) {
    if (const auto* r = std::get_if<RotationDesign>(&c)) {
      labels.push_back("angle_deg_" + std::to_string(r->submesh));
    } else if (const auto* t = std::get_if<TranslationDesign>(&c)) {
      labels.push_back("cx_" + std::to_string(t->submesh));
      labels.push_back("cy_" + std::to_string(t->submesh));
    }
  }
  return labels;
}

std::vector<double> design_parameters(const MultiMeshStack& stack, const DesignSpace& space) {
  std::vector<double> v;
  for (const auto& c : space.components) {
    if (const auto* r = std::get_if<RotationDesign>(&c)) {
      v.push_back(stack.poses[r->submesh].angle * 180.0 / std::numbers::pi);
    } else if (const auto* t = std::get_if<TranslationDesign>(&c)) {
      const Vec2 p = stack.poses[t->submesh].apply(t->anchor);
      v.push_back(p.x());
      v.push_back(p.y());
    }
  }
  return v;
}

double stack_quality(const MultiMeshStack& stack) {
  double q = 1.0;
  for (const auto& m : stack.placed) q = std::min(q, mesh_quality(m));
  return q;
}

namespace {

HistoryEntry make_entry(int it, double j, double slope, double xi, int evals, const MultiMeshStack& s,
                        const DesignSpace& space) {
  return {it, j, slope, xi, evals, stack_quality(s), design_parameters(s, space)};
}

}  // namespace

OptimizationResult steepest_descent(DesignProblem& problem, const MultiMeshStack& start,
                                    const OptimizerOptions& opts) {
  opts.validate();
  const DesignSpace& space = problem.design();
  space.validate(start);
  OptimizationResult res{History{}, start};
  History& h = res.history;
  h.labels = design_labels(space);

  Evaluation ev;
  try {
    ev = problem.evaluate(res.stack);
  } catch (const Error& e) {
    h.error = e.what();
    h.stop_reason = "error";
    return res;
  }
  h.total_evals = 1;
  h.entries.push_back(make_entry(0, ev.j, 0.0, 0.0, h.total_evals, res.stack, space));

  double xi0 = opts.initial_step;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    try {
      const DesignDirection dir = compute_direction(res.stack, space, ev.density);
      const double slope = direction_slope(res.stack, space, ev.density, dir);
      h.entries.back().slope = slope;
      if (!(slope < 0.0)) {
        h.stop_reason = "stationary";
        return res;
      }
      const MultiMeshStack& cur = res.stack;
      auto trial = [&](double xi) {
        return apply_design_update(cur, space, project_design(cur, space, dir, xi), xi);
      };
      auto predicted = [&](double xi) {
        return xi * direction_slope(cur, space, ev.density, project_design(cur, space, dir, xi));
      };
      const ArmijoResult ar = armijo([&](double xi) { return problem.functional(trial(xi)); }, ev.j, slope, xi0,
                                     opts, predicted);
      h.total_evals += ar.evals;
      MultiMeshStack next = trial(ar.xi);
      const double j_prev = ev.j;
      ev = problem.evaluate(next);
      ++h.total_evals;
      res.stack = std::move(next);
      h.entries.push_back(make_entry(it, ev.j, 0.0, ar.xi, h.total_evals, res.stack, space));
      xi0 = 2.0 * ar.xi;
      if (std::abs(ev.j - j_prev) < opts.tol * std::abs(ev.j)) {
        h.stop_reason = "converged";
        return res;
      }
    } catch (const LineSearchFailure& e) {
      h.stop_reason = "converged: no descent";
      h.error = e.what();
      return res;
    } catch (const Error& e) {
      h.stop_reason = "error";
      h.error = e.what();
      return res;
    }
  }
  h.stop_reason = "max iterations";
  return res;
}

std::vector<OptimizationResult> penalty_continuation(DesignProblem& problem, const MultiMeshStack& stack, int stages,
                                                     double factor, const OptimizerOptions& opts) {
  if (stages < 1) throw InvalidArgument("penalty_continuation: need at least one stage");
  if (!(factor > 0.0)) throw InvalidArgument("penalty_continuation: factor must be positive");
  std::vector<OptimizationResult> out;
  out.reserve(stages);
  const MultiMeshStack* cur = &stack;
  double scale = 1.0;
  for (int k = 0; k < stages; ++k) {
    problem.set_penalty_scale(scale);
    out.push_back(steepest_descent(problem, *cur, opts));
    if (out.back().history.stop_reason == "error") break;
    cur = &out.back().stack;
    scale *= factor;
  }
  problem.set_penalty_scale(1.0);
  return out;
}

}  // namespace mmshape
