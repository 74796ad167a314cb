#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mmshape/deform.hpp"
#include "mmshape/mmassembly.hpp"
#include "mmshape/shape.hpp"

namespace mmshape {

struct OptimizerOptions {
  double c1 = 1e-4;
  double backtrack = 0.5;
  double initial_step = 1.0;
  int max_backtracks = 30;
  int max_iterations = 200;
  double tol = 1e-6;

  void validate() const;
};

/// Functional value and shape gradient density of one design.
struct Evaluation {
  double j = 0.0;
  GradientDensity density;
};

/// A reduced functional over the stacks reachable through a design space.
class DesignProblem {
 public:
  virtual ~DesignProblem() = default;
  virtual const DesignSpace& design() const = 0;
  /// Ĵ only (line-search trials).
  virtual double functional(const MultiMeshStack& stack) const = 0;
  /// Ĵ and its density (state, adjoint when needed, sensitivities).
  virtual Evaluation evaluate(const MultiMeshStack& stack) const = 0;
  /// Scales the penalty coefficients; problems without penalties ignore it.
  virtual void set_penalty_scale(double /*scale*/) {}
};

struct ArmijoResult {
  double xi = 0.0;
  double j = 0.0;
  int evals = 0;
};

/// Backtracking from xi0 until J(ξ) ≤ J₀ + c₁ pred(ξ), where pred defaults to
/// ξ·slope. Trials that throw InvalidStep or UnsupportedConfiguration count as
/// rejected. Throws LineSearchFailure after max_backtracks reductions.
ArmijoResult armijo(const std::function<double(double)>& eval_j, double j0, double slope, double xi0,
                    const OptimizerOptions& opts, const std::function<double(double)>& predicted = {});

/// Effective direction after radial projection of constrained translation
/// anchors onto |x| ≤ r_max for the step ξ. Other components pass through.
DesignDirection project_design(const MultiMeshStack& stack, const DesignSpace& space,
                               const DesignDirection& direction, double xi);

/// Design parameters reported in histories: rotation angle in degrees, anchor coordinates.
std::vector<std::string> design_labels(const DesignSpace& space);
std::vector<double> design_parameters(const MultiMeshStack& stack, const DesignSpace& space);

struct HistoryEntry {
  int iteration = 0;
  double j = 0.0;
  double slope = 0.0;  // dĴ along the search direction
  double xi = 0.0;     // accepted step (0 for the initial design)
  int evals = 0;       // cumulative functional evaluations
  double min_quality = 0.0;
  std::vector<double> design;
};

struct History {
  std::vector<std::string> labels;
  std::vector<HistoryEntry> entries;
  std::string stop_reason;
  std::string error;
  int total_evals = 0;
};

struct OptimizationResult {
  History history;
  MultiMeshStack stack;
};

/// Minimum radius ratio over every submesh of the stack.
double stack_quality(const MultiMeshStack& stack);

/// Steepest descent with (projected) Armijo steps.
OptimizationResult steepest_descent(DesignProblem& problem, const MultiMeshStack& stack,
                                    const OptimizerOptions& opts = {});

/// One steepest-descent run per stage with penalty scale factor^k, warm-started.
std::vector<OptimizationResult> penalty_continuation(DesignProblem& problem, const MultiMeshStack& stack,
                                                     int stages, double factor = 2.0,
                                                     const OptimizerOptions& opts = {});

}  // namespace mmshape
