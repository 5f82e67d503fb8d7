#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "seg/hji.hpp"
#include "seg/strategies.hpp"

namespace seg {
namespace {

Scene circle_scene(int kp = 1, int ke = 1) {
  Scene s;
  s.shapes.push_back(Circle{{0.5, 0.5}, 0.15});
  s.pursuer_speed = 2.0;
  s.evader_speed = 1.0;
  s.pursuers = kp;
  s.evaders = ke;
  return s;
}

double policy_sum(const Policy& p) {
  double t = 0.0;
  for (double w : p.weights) t += w;
  return t;
}

TEST(ValidActions, OpenSpaceNeighbourhoods) {
  const Grid2D grid(16);
  const ScalarField phi = signed_distance(Scene{}, grid);
  const Cell c{8, 8};
  const ActionSet four = valid_actions(c, 1.0, phi, grid.h());
  EXPECT_EQ(four.cells, (std::vector<Cell>{{7, 8}, {8, 7}, {8, 8}, {8, 9}, {9, 8}}));
  const ActionSet only = valid_actions(c, 1.0, phi, 1e-9);
  EXPECT_EQ(only.cells, (std::vector<Cell>{c}));
  const ActionSet eight = valid_actions(c, 1.0, phi, 1.5 * grid.h());
  EXPECT_EQ(eight.cells.size(), 9u);
  const ActionSet corner = valid_actions({0, 0}, 1.0, phi, 1.5 * grid.h());
  EXPECT_EQ(corner.cells, (std::vector<Cell>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
}

TEST(ValidActions, BesideWallsMatchesDijkstra) {
  const Grid2D grid(32);
  Scene s;
  s.shapes.push_back(Rectangle{{0.5, 0.5}, 0.3, 0.05, 0.0});
  s.shapes.push_back(Circle{{0.2, 0.8}, 0.1});
  const ScalarField phi = signed_distance(s, grid);
  for (double speed : {1.0, 2.0}) {
    const ScalarField v = obstacle_speed(speed, phi);
    const double dt = 1.5 * grid.h();
    for (const Point p : {Point{0.5, 0.57}, Point{0.5, 0.43}, Point{0.82, 0.5}, Point{0.2, 0.67},
                          Point{0.34, 0.8}}) {
      const Cell c = grid.locate(p);
      ASSERT_GT(phi(c), 0.0);
      const ActionSet a = valid_actions(c, speed, phi, dt);
      const std::vector<Cell> src{c};
      const auto d = oracle::dijkstra(grid, v.values(), src);
      std::vector<Cell> expected;
      for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        if (phi[idx] > 0.0 && d[idx] <= dt + 1e-12) expected.push_back(grid.cell(idx));
      }
      EXPECT_EQ(a.cells, expected) << "speed " << speed << " at " << p.x << "," << p.y;
      EXPECT_TRUE(std::find(a.cells.begin(), a.cells.end(), c) != a.cells.end());
    }
  }
  EXPECT_THROW(valid_actions(grid.locate({0.5, 0.5}), 1.0, phi, 0.1), std::invalid_argument);
}

TEST(GameContext, JointActionsAreCartesianProduct) {
  const Grid2D grid(16);
  const GameContext ctx(circle_scene(2, 1), grid);
  const GameState s{{{1, 1}, {14, 14}}, {{1, 14}}, 0};
  const auto& a0 = ctx.actions(s.pursuers[0], Team::kPursuer).cells;
  const auto& a1 = ctx.actions(s.pursuers[1], Team::kPursuer).cells;
  const auto joint = ctx.joint_pursuer_actions(s);
  ASSERT_EQ(joint.size(), a0.size() * a1.size());
  for (std::size_t x = 0; x < a0.size(); ++x) {
    for (std::size_t y = 0; y < a1.size(); ++y) {
      EXPECT_EQ(joint[x * a1.size() + y], (JointAction{a0[x], a1[y]}));
    }
  }
  EXPECT_DOUBLE_EQ(ctx.dt(), 1.5 * grid.h());
  EXPECT_THROW(ctx.validate(GameState{{{8, 8}, {1, 1}}, {{1, 14}}, 0}), std::invalid_argument);
  EXPECT_THROW(ctx.validate(GameState{{{1, 1}}, {{1, 14}}, 0}), std::invalid_argument);
}

TEST(DistanceCost, Collapses1v1AndVanishesOnEvader) {
  const Grid2D grid(16);
  const GameContext ctx(circle_scene(), grid);
  const Cell e{3, 12};
  const ScalarField& d = ctx.arrival(e, Team::kPursuer);
  const std::vector<Cell> evaders{e};
  for (const Cell x : {Cell{1, 1}, Cell{14, 8}, Cell{3, 12}}) {
    const std::vector<Cell> p{x};
    EXPECT_NEAR(distance_cost(ctx, p, evaders), d(x), 1e-12);
  }
  const std::vector<Cell> on{e};
  EXPECT_EQ(distance_cost(ctx, on, evaders), 0.0);
}

TEST(DistanceCost, HandInstance2v2) {
  const Grid2D grid(8);
  // Arrival fields from two evaders, only the pursuer cells matter.
  ScalarField d1(grid, 9.0);
  ScalarField d2(grid, 9.0);
  const Cell x1{0, 0};
  const Cell x2{7, 7};
  d1(x1) = 1.0;
  d1(x2) = 4.0;
  d2(x1) = 2.0;
  d2(x2) = 3.0;
  const std::vector<Cell> pursuers{x1, x2};
  const ScalarField* fields[] = {&d1, &d2};
  // Pursuer minima (1, 3), evader minima (1, 2).
  const double expected = 0.5 * std::sqrt(1.0 + 9.0) + 0.5 * std::sqrt(1.0 + 4.0);
  EXPECT_NEAR(distance_cost(pursuers, fields), expected, 1e-12);
}

TEST(DistanceCost, ZeroIffCoLocated) {
  const Grid2D grid(16);
  const GameContext ctx(circle_scene(2, 2), grid);
  const std::vector<Cell> ev{{2, 2}, {13, 13}};
  EXPECT_EQ(distance_cost(ctx, std::vector<Cell>{{13, 13}, {2, 2}}, ev), 0.0);
  EXPECT_GT(distance_cost(ctx, std::vector<Cell>{{2, 2}, {2, 2}}, ev), 0.0);
  EXPECT_GT(distance_cost(ctx, std::vector<Cell>{{2, 3}, {13, 13}}, ev), 0.0);
}

TEST(DistancePolicy, SoftmaxOfNegativeCostAndArgmaxMinimizesTime) {
  const Grid2D grid(16);
  const GameContext ctx(circle_scene(), grid);
  const GameState s{{{2, 8}}, {{12, 3}}, 0};
  const Policy p = distance_policy(ctx, s);
  EXPECT_EQ(p.support, ctx.joint_pursuer_actions(s));
  EXPECT_NEAR(policy_sum(p), 1.0, 1e-9);
  const ScalarField& d = ctx.arrival(s.evaders[0], Team::kPursuer);
  std::vector<double> scores;
  for (const auto& a : p.support) scores.push_back(-d(a[0]));
  const auto expected = softmax(scores);
  std::size_t brute = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_NEAR(p.weights[k], expected[k], 1e-12);
    if (d(p.support[k][0]) < d(p.support[brute][0])) brute = k;
  }
  const std::size_t chosen = argmax_action(p.support, p.weights, s.pursuers);
  EXPECT_EQ(d(p.support[chosen][0]), d(p.support[brute][0]));
}

TEST(Softmax, Examples) {
  const std::vector<double> eq{-0.3, -0.3};
  EXPECT_EQ(softmax(eq), (std::vector<double>{0.5, 0.5}));
  const std::vector<double> costs{-0.0, -std::log(2.0)};
  const auto w = softmax(costs);
  EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-12);
  const std::vector<double> tstar{1.0, 1.0 + std::log(3.0)};
  const auto s = softmax(tstar);
  EXPECT_NEAR(s[0], 0.25, 1e-12);
  EXPECT_NEAR(s[1], 0.75, 1e-12);
  const std::vector<double> a{0.8, 0.2};
  const std::vector<double> b{0.5, 0.5};
  const auto prod = normalized_product(a, b);
  EXPECT_NEAR(prod[0], 0.8, 1e-12);
  EXPECT_NEAR(prod[1], 0.2, 1e-12);
  EXPECT_THROW(softmax(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(normalized_product(a, std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(normalized_product(a, std::vector<double>{0.0, 0.0}), std::invalid_argument);
}

TEST(Softmax, RandomizedAlgebra) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(1, 40);
  std::uniform_real_distribution<double> score(-20.0, 20.0);
  std::uniform_real_distribution<double> shift(-100.0, 100.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = len(rng);
    std::vector<double> a(n), b(n), shifted(n), sum(n);
    const double c = shift(rng);
    for (int k = 0; k < n; ++k) {
      a[k] = score(rng);
      b[k] = score(rng);
      shifted[k] = a[k] + c;
      sum[k] = a[k] + b[k];
    }
    const auto pa = softmax(a);
    const auto pb = softmax(b);
    const auto ps = softmax(shifted);
    const auto blend = normalized_product(pa, pb);
    const auto blend_rev = normalized_product(pb, pa);
    const auto joint = softmax(sum);
    const std::vector<double> uniform(n, 1.0 / n);
    const auto with_uniform = normalized_product(pa, uniform);
    double total = 0.0;
    double total_blend = 0.0;
    for (int k = 0; k < n; ++k) {
      ASSERT_NEAR(pa[k], ps[k], 1e-9);
      ASSERT_NEAR(blend[k], joint[k], 1e-9);
      ASSERT_NEAR(blend[k], blend_rev[k], 1e-9);
      ASSERT_NEAR(with_uniform[k], pa[k], 1e-9);
      ASSERT_GE(pa[k], 0.0);
      total += pa[k];
      total_blend += blend[k];
    }
    ASSERT_NEAR(total, 1.0, 1e-9);
    ASSERT_NEAR(total_blend, 1.0, 1e-9);
  }
}

TEST(TimeToOcclusion, Examples) {
  const Grid2D grid(32);
  const GameContext ctx(circle_scene(2, 1), grid);
  const std::vector<Cell> flank{grid.locate({0.125, 0.5}), grid.locate({0.875, 0.5})};
  EXPECT_EQ(time_to_occlusion(ctx, flank, grid.locate({0.1, 0.1})), kLarge);
  const std::vector<Cell> one{grid.locate({0.125, 0.5})};
  EXPECT_EQ(time_to_occlusion(ctx, one, grid.locate({0.875, 0.5})), 0.0);
  EXPECT_GT(time_to_occlusion(ctx, one, grid.locate({0.2, 0.5})), 0.0);
}

TEST(TimeToOcclusion, MatchesStationaryPursuerValue) {
  const Grid2D grid(16);
  const GameContext ctx(circle_scene(), grid);
  const Cell pc = grid.locate({0.125, 0.5});
  const StationarySolution sol = solve_stationary_pursuer(ctx.phi(), grid.center(pc), 1.0);
  const std::vector<Cell> p{pc};
  double diff = 0.0;
  double total = 0.0;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (!(ctx.phi()[idx] > 0.0)) continue;
    diff += std::abs(time_to_occlusion(ctx, p, grid.cell(idx)) - sol.value[idx]);
    total += sol.value[idx];
  }
  EXPECT_LE(diff / total, 0.05);
}

TEST(TimeToOcclusion, AddingPursuerNeverDecreases) {
  const Grid2D grid(16);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Scene s = oracle::random_scene(500 + seed, 4);
    s.pursuer_speed = 2.0;
    const GameContext ctx(s, grid);
    std::vector<Cell> free;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
      if (ctx.phi()[idx] > 0.0) free.push_back(grid.cell(idx));
    }
    const std::vector<Cell> one{free[0]};
    const std::vector<Cell> two{free[0], free[free.size() / 2]};
    for (std::size_t k = 0; k < free.size(); k += 3) {
      EXPECT_GE(time_to_occlusion(ctx, two, free[k]), time_to_occlusion(ctx, one, free[k]));
    }
  }
}

TEST(ShadowPolicy, CrescentArgmaxMatchesBruteForce) {
  Scene s = load_scene(std::string(SEG_SCENES_DIR) + "/crescents.json");
  s.pursuers = 1;
  s.evaders = 1;
  const Grid2D grid(16);
  const GameContext ctx(s, grid);
  const GameState state{{grid.locate({0.5, 0.2})}, {grid.locate({0.3, 0.4})}, 0};
  ASSERT_FALSE(ctx.is_end_game(state));
  const Policy p = shadow_policy(ctx, state);
  EXPECT_NEAR(policy_sum(p), 1.0, 1e-9);
  const auto& evader_moves = ctx.actions(state.evaders[0], Team::kEvader).cells;
  std::vector<double> tstar;
  for (const auto& a : p.support) {
    double worst = kLarge;
    for (const Cell y : evader_moves) worst = std::min(worst, time_to_occlusion(ctx, a, y));
    EXPECT_EQ(worst, worst_case_time_to_occlusion(ctx, a, state.evaders));
    tstar.push_back(std::min(worst, kShadowExponentClamp));
  }
  const auto expected = softmax(tstar);
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(p.weights[k], expected[k], 1e-12);
  std::size_t brute = 0;
  for (std::size_t k = 1; k < tstar.size(); ++k) {
    if (tstar[k] > tstar[brute]) brute = k;
  }
  const std::size_t chosen = argmax_action(p.support, p.weights, state.pursuers);
  EXPECT_EQ(tstar[chosen], tstar[brute]);
}

TEST(ShadowPolicy, NoShadowsGivesUniform) {
  const Grid2D grid(16);
  Scene empty;
  empty.pursuer_speed = 2.0;
  const GameContext ctx(empty, grid);
  const GameState s{{{3, 3}}, {{10, 10}}, 0};
  const Policy shadow = shadow_policy(ctx, s);
  for (double w : shadow.weights) EXPECT_NEAR(w, 1.0 / shadow.size(), 1e-12);
  const Policy blend = blend_policy(ctx, s);
  const Policy dist = distance_policy(ctx, s);
  for (std::size_t k = 0; k < blend.size(); ++k) EXPECT_NEAR(blend.weights[k], dist.weights[k], 1e-12);
}

TEST(BlendPolicy, IsNormalizedProduct) {
  const Grid2D grid(16);
  const GameContext ctx(circle_scene(), grid);
  const GameState s{{{8, 3}}, {{4, 12}}, 0};
  const Policy b = blend_policy(ctx, s);
  const auto expected = normalized_product(shadow_policy(ctx, s).weights,
                                           distance_policy(ctx, s).weights);
  ASSERT_EQ(b.size(), expected.size());
  for (std::size_t k = 0; k < b.size(); ++k) EXPECT_NEAR(b.weights[k], expected[k], 1e-12);
  const Policy u = uniform_policy(ctx, s);
  EXPECT_EQ(u.support, b.support);
  for (double w : u.weights) EXPECT_DOUBLE_EQ(w, 1.0 / u.size());
}

TEST(EvaderRule, Examples) {
  const Grid2D grid(16);
  const GameContext ctx(circle_scene(), grid);
  // Evader just outside the shadow behind the disk steps into it.
  const Cell p = grid.locate({0.125, 0.5});
  const std::vector<Cell> pv{p};
  Cell start{};
  bool found = false;
  for (std::size_t idx = 0; idx < grid.size() && !found; ++idx) {
    const Cell c = grid.cell(idx);
    if (!ctx.is_free(c) || time_to_occlusion(ctx, pv, c) == 0.0) continue;
    for (const Cell y : ctx.actions(c, Team::kEvader).cells) {
      if (time_to_occlusion(ctx, pv, y) == 0.0) {
        start = c;
        found = true;
        break;
      }
    }
  }
  ASSERT_TRUE(found);
  const JointAction moved = evader_rule(ctx, GameState{{p}, {start}, 0});
  EXPECT_EQ(time_to_occlusion(ctx, pv, moved[0]), 0.0);

  // No shadows anywhere: the tie-break keeps the evader still.
  const GameContext ctx2(circle_scene(2, 1), grid);
  const GameState flanked{{grid.locate({0.125, 0.5}), grid.locate({0.875, 0.5})},
                          {grid.locate({0.2, 0.2})}, 0};
  EXPECT_EQ(evader_rule(ctx2, flanked), flanked.evaders);
}

TEST(EvaderRule, MatchesBruteForceArgmin) {
  const Grid2D grid(16);
  const GameContext ctx(circle_scene(), grid);
  const std::vector<Cell> p{grid.locate({0.2, 0.3})};
  for (std::size_t idx = 0; idx < grid.size(); idx += 5) {
    const Cell e = grid.cell(idx);
    if (!ctx.is_free(e)) continue;
    const GameState s{p, {e}, 0};
    if (ctx.is_end_game(s)) continue;
    Cell best = e;
    double best_t = kLarge * 10;
    double best_d = 1e9;
    for (const Cell y : ctx.actions(e, Team::kEvader).cells) {
      const double t = time_to_occlusion(ctx, p, y);
      const double d = std::hypot(y.i - e.i, y.j - e.j);
      if (t < best_t - 1e-12 || (std::abs(t - best_t) <= 1e-12 &&
                                 (d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && y < best)))) {
        best = y;
        best_t = t;
        best_d = d;
      }
    }
    EXPECT_EQ(evader_rule(ctx, s)[0], best) << "evader at " << e.i << "," << e.j;
  }
}

TEST(ArgmaxAction, TieBreaks) {
  const std::vector<Cell> from{{5, 5}};
  const std::vector<JointAction> support{{{6, 6}}, {{5, 6}}, {{4, 5}}, {{5, 5}}};
  const std::vector<double> flat{0.25, 0.25, 0.25, 0.25};
  EXPECT_EQ(argmax_action(support, flat, from), 3u);
  const std::vector<double> two{0.1, 0.4, 0.4, 0.1};
  // Equal displacement; (4,5) precedes (5,6).
  EXPECT_EQ(argmax_action(support, two, from), 2u);
  const std::vector<double> one{0.7, 0.1, 0.1, 0.1};
  EXPECT_EQ(argmax_action(support, one, from), 0u);
}

TEST(Policies, SupportedOnValidActionsAndComplexityGuard) {
  const Grid2D grid(16);
  const GameContext ctx(circle_scene(2, 2), grid);
  const GameState s{{{2, 2}, {13, 2}}, {{3, 13}, {12, 12}}, 0};
  const auto joint = ctx.joint_pursuer_actions(s);
  const std::size_t before = ctx.eikonal_solves();
  const Policy d = distance_policy(ctx, s);
  // One arrival field per evader, plus one per pursuer for its action set.
  EXPECT_LE(ctx.eikonal_solves() - before, s.evaders.size() + s.pursuers.size());
  for (const Policy& p : {d, shadow_policy(ctx, s), blend_policy(ctx, s), uniform_policy(ctx, s)}) {
    EXPECT_EQ(p.support, joint);
    EXPECT_NEAR(policy_sum(p), 1.0, 1e-9);
  }
  const auto j = policy_to_json(d);
  ASSERT_EQ(j.size(), joint.size());
  EXPECT_EQ(j[0]["action"][1], (nlohmann::json{joint[0][1].i, joint[0][1].j}));
  EXPECT_DOUBLE_EQ(j[0]["weight"].get<double>(), d.weights[0]);
}

}  // namespace
}  // namespace seg
