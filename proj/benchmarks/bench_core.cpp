#include <benchmark/benchmark.h>

#include "seg/engine.hpp"
#include "seg/hji.hpp"
#include "seg/session.hpp"
#include "seg/strategies.hpp"
#include "seg/visibility.hpp"

namespace {

using namespace seg;

Scene circle_scene(double fp = 2.0) {
  Scene s;
  s.shapes.push_back(Circle{{0.5, 0.5}, 0.15});
  s.pursuer_speed = fp;
  s.evader_speed = 1.0;
  return s;
}

void BM_SignedDistance(benchmark::State& state) {
  const Grid2D grid(static_cast<int>(state.range(0)));
  const Scene scene = circle_scene();
  for (auto _ : state) benchmark::DoNotOptimize(signed_distance(scene, grid));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_SignedDistance)->RangeMultiplier(2)->Range(32, 256)->Complexity();

void BM_Eikonal(benchmark::State& state) {
  const Grid2D grid(static_cast<int>(state.range(0)));
  const ScalarField phi = signed_distance(circle_scene(), grid);
  const ScalarField speed = obstacle_speed(1.0, phi);
  const std::vector<Cell> src{grid.locate({0.125, 0.5})};
  for (auto _ : state) benchmark::DoNotOptimize(solve_eikonal(speed, src));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_Eikonal)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_ShadowField(benchmark::State& state) {
  const Grid2D grid(static_cast<int>(state.range(0)));
  const ScalarField phi = signed_distance(circle_scene(), grid);
  for (auto _ : state) benchmark::DoNotOptimize(shadow_field(phi, Point{0.125, 0.5}));
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(BM_ShadowField)->RangeMultiplier(2)->Range(32, 256)->Complexity();

void BM_HjiStep(benchmark::State& state) {
  const Grid2D grid(static_cast<int>(state.range(0)));
  const HjiProblem problem(circle_scene(), grid);
  const double dt = problem.cfl_limit();
  ValueFunction4D v(grid);
  for (auto _ : state) {
    v = step_value(problem, v, dt);
    benchmark::DoNotOptimize(v.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.size()));
}
BENCHMARK(BM_HjiStep)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Policy(benchmark::State& state) {
  const Grid2D grid(16);
  const GameContext ctx(load_scene(SEG_SCENES_DIR "/five-obstacles-2v2.json"), grid);
  const GameState s{{grid.locate({0.3, 0.1}), grid.locate({0.7, 0.1})},
                    {grid.locate({0.1, 0.9}), grid.locate({0.9, 0.9})},
                    0};
  const auto kind = static_cast<EvaluatorKind>(state.range(0));
  heuristic_policy(ctx, kind, s);  // warm the caches
  for (auto _ : state) benchmark::DoNotOptimize(heuristic_policy(ctx, kind, s));
  state.SetLabel(to_string(EvaluatorSpec{kind}));
}
BENCHMARK(BM_Policy)
    ->Arg(static_cast<int>(EvaluatorKind::kDistance))
    ->Arg(static_cast<int>(EvaluatorKind::kShadow))
    ->Arg(static_cast<int>(EvaluatorKind::kBlend));

void BM_MctsMove(benchmark::State& state) {
  const Grid2D grid(16);
  const GameContext ctx(load_scene(SEG_SCENES_DIR "/five-obstacles.json"), grid);
  const GameState s = default_start(ctx);
  const Evaluator eval = make_evaluator(ctx, parse_evaluator("blend"));
  mcts::SearchOptions o;
  o.iterations = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(search_pursuer_move(ctx, s, eval, 100, o));
}
BENCHMARK(BM_MctsMove)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
