#include "seg/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace seg {
namespace {

constexpr double kTieTolerance = 1e-12;

double displacement(Cell a, Cell b) {
  return std::hypot(static_cast<double>(a.i - b.i), static_cast<double>(a.j - b.j));
}

double total_displacement(std::span<const Cell> from, std::span<const Cell> to) {
  double d = 0.0;
  for (std::size_t k = 0; k < from.size() && k < to.size(); ++k) d += displacement(from[k], to[k]);
  return d;
}

std::vector<std::size_t> mask_indices(const std::vector<char>& mask) {
  std::vector<std::size_t> out;
  for (std::size_t idx = 0; idx < mask.size(); ++idx) {
    if (mask[idx]) out.push_back(idx);
  }
  return out;
}

double min_over(const ScalarField& arrival, std::span<const std::size_t> cells) {
  double best = kLarge;
  for (std::size_t idx : cells) best = std::min(best, arrival[idx]);
  return std::min(best, kLarge);
}

}  // namespace

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("softmax of an empty score vector");
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> w(scores.size());
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    w[k] = std::exp(scores[k] - top);
    total += w[k];
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> normalized_product(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("policy supports differ in size");
  std::vector<double> w(a.size());
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    w[k] = a[k] * b[k];
    total += w[k];
  }
  if (!(total > 0.0)) throw std::invalid_argument("policy product vanishes everywhere");
  for (double& x : w) x /= total;
  return w;
}

double distance_cost(std::span<const Cell> pursuers,
                     std::span<const ScalarField* const> evader_arrivals) {
  if (pursuers.empty() || evader_arrivals.empty()) {
    throw std::invalid_argument("distance cost needs players on both teams");
  }
  double to_evaders = 0.0;
  for (const Cell& x : pursuers) {
    double best = kLarge;
    for (const ScalarField* arr : evader_arrivals) best = std::min(best, (*arr)(x));
    to_evaders += best * best;
  }
  double to_pursuers = 0.0;
  for (const ScalarField* arr : evader_arrivals) {
    double best = kLarge;
    for (const Cell& x : pursuers) best = std::min(best, (*arr)(x));
    to_pursuers += best * best;
  }
  return 0.5 * std::sqrt(to_evaders) + 0.5 * std::sqrt(to_pursuers);
}

double distance_cost(const GameContext& ctx, std::span<const Cell> pursuers,
                     std::span<const Cell> evaders) {
  std::vector<const ScalarField*> arrivals;
  for (const Cell& e : evaders) arrivals.push_back(&ctx.arrival(e, Team::kPursuer));
  return distance_cost(pursuers, arrivals);
}

Policy distance_policy(const GameContext& ctx, const GameState& state) {
  Policy policy;
  policy.support = ctx.joint_pursuer_actions(state);
  std::vector<const ScalarField*> arrivals;
  for (const Cell& e : state.evaders) arrivals.push_back(&ctx.arrival(e, Team::kPursuer));
  std::vector<double> scores;
  scores.reserve(policy.support.size());
  for (const JointAction& x : policy.support) scores.push_back(-distance_cost(x, arrivals));
  policy.weights = softmax(scores);
  return policy;
}

double time_to_occlusion(const GameContext& ctx, std::span<const Cell> pursuers, Cell evader) {
  const auto shadow = mask_indices(joint_shadow_mask(ctx.shadows(), pursuers));
  if (shadow.empty()) return kLarge;
  return min_over(ctx.arrival(evader, Team::kEvader), shadow);
}

double worst_case_time_to_occlusion(const GameContext& ctx, std::span<const Cell> pursuers,
                                    std::span<const Cell> evaders) {
  const auto shadow = mask_indices(joint_shadow_mask(ctx.shadows(), pursuers));
  if (shadow.empty()) return kLarge;
  double worst = kLarge;
  for (const Cell& e : evaders) {
    for (const Cell& y : ctx.actions(e, Team::kEvader).cells) {
      worst = std::min(worst, min_over(ctx.arrival(y, Team::kEvader), shadow));
    }
  }
  return worst;
}

Policy shadow_policy(const GameContext& ctx, const GameState& state) {
  Policy policy;
  policy.support = ctx.joint_pursuer_actions(state);
  std::vector<double> scores;
  scores.reserve(policy.support.size());
  for (const JointAction& x : policy.support) {
    scores.push_back(
        std::min(worst_case_time_to_occlusion(ctx, x, state.evaders), kShadowExponentClamp));
  }
  policy.weights = softmax(scores);
  return policy;
}

Policy blend_policy(const GameContext& ctx, const GameState& state) {
  Policy shadow = shadow_policy(ctx, state);
  const Policy distance = distance_policy(ctx, state);
  shadow.weights = normalized_product(shadow.weights, distance.weights);
  return shadow;
}

Policy uniform_policy(const GameContext& ctx, const GameState& state) {
  Policy policy;
  policy.support = ctx.joint_pursuer_actions(state);
  policy.weights.assign(policy.support.size(), 1.0 / static_cast<double>(policy.support.size()));
  return policy;
}

JointAction evader_rule(const GameContext& ctx, const GameState& state) {
  const auto shadow = mask_indices(joint_shadow_mask(ctx.shadows(), state.pursuers));
  JointAction out;
  out.reserve(state.evaders.size());
  for (const Cell& e : state.evaders) {
    const auto& cells = ctx.actions(e, Team::kEvader).cells;
    Cell best = e;
    double best_time = kLarge * 2.0;
    double best_disp = 0.0;
    for (const Cell& y : cells) {
      const double t = shadow.empty() ? kLarge : min_over(ctx.arrival(y, Team::kEvader), shadow);
      const double d = displacement(e, y);
      bool better = false;
      if (t < best_time - kTieTolerance) {
        better = true;
      } else if (std::abs(t - best_time) <= kTieTolerance) {
        better = d < best_disp - kTieTolerance ||
                 (std::abs(d - best_disp) <= kTieTolerance && y < best);
      }
      if (better) {
        best = y;
        best_time = t;
        best_disp = d;
      }
    }
    out.push_back(best);
  }
  return out;
}

std::size_t argmax_action(std::span<const JointAction> support, std::span<const double> weights,
                          std::span<const Cell> from) {
  if (support.empty() || support.size() != weights.size()) {
    throw std::invalid_argument("argmax over an empty or mismatched policy");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < support.size(); ++k) {
    const double scale = std::max(weights[k], weights[best]);
    const double gap = weights[k] - weights[best];
    if (gap > kTieTolerance * scale) {
      best = k;
    } else if (std::abs(gap) <= kTieTolerance * scale) {
      const double dk = total_displacement(from, support[k]);
      const double db = total_displacement(from, support[best]);
      if (dk < db - kTieTolerance ||
          (std::abs(dk - db) <= kTieTolerance && support[k] < support[best])) {
        best = k;
      }
    }
  }
  return best;
}

nlohmann::json policy_to_json(const Policy& policy) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t k = 0; k < policy.size(); ++k) {
    nlohmann::json action = nlohmann::json::array();
    for (const Cell& c : policy.support[k]) action.push_back(to_json(c));
    out.push_back({{"action", action}, {"weight", policy.weights[k]}});
  }
  return out;
}

}  // namespace seg
