#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "mmshape/cutgeom.hpp"
#include "mmshape/deform.hpp"
#include "mmshape/problems.hpp"

using namespace mmshape;

namespace {

void BM_ClipTriangle(benchmark::State& state) {
  std::vector<Vec2> oct;
  for (int k = 0; k < 8; ++k) {
    const double t = 2 * std::numbers::pi * k / 8;
    oct.emplace_back(0.5 + 0.4 * std::cos(t), 0.5 + 0.4 * std::sin(t));
  }
  const ConvexPolygon poly{oct};
  const Triangle tri{Vec2(0.05, 0.1), Vec2(0.6, 0.2), Vec2(0.3, 0.7)};
  for (auto _ : state) benchmark::DoNotOptimize(clip_triangle(tri, poly));
}
BENCHMARK(BM_ClipTriangle);

void BM_PolygonQuadrature(benchmark::State& state) {
  const ConvexPolygon poly{{Vec2(0, 0), Vec2(1, 0), Vec2(1.2, 0.7), Vec2(0.4, 1.1), Vec2(-0.2, 0.5)}};
  for (auto _ : state) benchmark::DoNotOptimize(polygon_quadrature(poly, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_PolygonQuadrature)->DenseRange(1, 6);

// Stack construction: classification, cut quadrature, interface segments, overlap pieces.
void BM_BuildExampleStack(benchmark::State& state) {
  ExampleGeometry g;
  g.nx = g.ny = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(make_example_stack(g));
}
BENCHMARK(BM_BuildExampleStack)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_RotationEvaluate(benchmark::State& state) {
  ExampleGeometry g;
  g.nx = g.ny = static_cast<int>(state.range(0));
  const MultiMeshStack s = make_example_stack(g);
  const RotationProblem problem(example_spec(), NitscheParams{}, g.pivot);
  for (auto _ : state) benchmark::DoNotOptimize(problem.evaluate(s));
}
BENCHMARK(BM_RotationEvaluate)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_CableEvaluate(benchmark::State& state) {
  const CableGeometry g;
  const MultiMeshStack s = make_cable_stack(g);
  const MultiCableProblem problem(cable_spec(CableCoefficients{}), NitscheParams{}, g);
  for (auto _ : state) benchmark::DoNotOptimize(problem.evaluate(s));
}
BENCHMARK(BM_CableEvaluate)->Unit(benchmark::kMillisecond);

void BM_Eikonal(benchmark::State& state) {
  const Mesh m = make_toy_stack(ToyGeometry{}).placed[0];
  for (auto _ : state) benchmark::DoNotOptimize(solve_eikonal(m, marker::kGamma, 25.0));
}
BENCHMARK(BM_Eikonal)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
