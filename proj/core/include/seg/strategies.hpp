#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seg/game.hpp"

namespace seg {

/// Probability weights over a team's joint actions.
struct Policy {
  std::vector<JointAction> support;
  std::vector<double> weights;

  std::size_t size() const { return support.size(); }
};

// Softmax of scores (weight proportional to exp(score)); shifted by the max
// score for stability.
std::vector<double> softmax(std::span<const double> scores);

// Elementwise product renormalized to sum 1. Throws on size mismatch or when
// the product vanishes everywhere.
std::vector<double> normalized_product(std::span<const double> a, std::span<const double> b);

// Exponents are clamped here before the shadow softmax so kLarge stays finite.
inline constexpr double kShadowExponentClamp = 50.0;

/// Hausdorff-style sum: half the root-sum-square of each pursuer's nearest
/// evader time plus half the root-sum-square of each evader's nearest
/// pursuer time. `evader_arrivals[j]` is the pursuer-speed arrival field
/// from evader j.
double distance_cost(std::span<const Cell> pursuers,
                     std::span<const ScalarField* const> evader_arrivals);
double distance_cost(const GameContext& ctx, std::span<const Cell> pursuers,
                     std::span<const Cell> evaders);

/// weight(x) proportional to exp(-distance_cost(x, E)).
Policy distance_policy(const GameContext& ctx, const GameState& state);

/// Shortest evader travel time from `evader` into the cells hidden from every
/// pursuer in `pursuers`; kLarge when that set is empty.
double time_to_occlusion(const GameContext& ctx, std::span<const Cell> pursuers, Cell evader);

/// Worst case over the evaders' next moves: min over evaders j and their
/// actions y of time_to_occlusion(x, y).
double worst_case_time_to_occlusion(const GameContext& ctx, std::span<const Cell> pursuers,
                                    std::span<const Cell> evaders);

/// weight(x) proportional to exp(min(t**(x), 50)).
Policy shadow_policy(const GameContext& ctx, const GameState& state);

/// Normalized product of the shadow and distance policies.
Policy blend_policy(const GameContext& ctx, const GameState& state);

/// Uniform weights over the joint pursuer actions.
Policy uniform_policy(const GameContext& ctx, const GameState& state);

/// Each evader independently moves to the action minimizing its
/// time-to-occlusion against the current pursuers. Ties: smallest
/// displacement, then lexicographic cell order.
JointAction evader_rule(const GameContext& ctx, const GameState& state);

/// Index of the largest weight; ties go to the smallest total displacement
/// from `from`, then to the lexicographically smallest action.
std::size_t argmax_action(std::span<const JointAction> support, std::span<const double> weights,
                          std::span<const Cell> from);

nlohmann::json policy_to_json(const Policy& policy);

}  // namespace seg
