#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seg/game.hpp"
#include "seg/mcts.hpp"
#include "seg/strategies.hpp"

namespace seg {

/// Applies the joint pursuer action, lets the evaders answer with
/// evader_rule against the new pursuer positions, and advances the turn.
/// Throws if some pursuer's cell is outside its valid set.
GameState transition(const GameContext& ctx, const GameState& state, const JointAction& action);

/// The pursuit game as seen by the pursuer team: terminal at end-game
/// (value -1) or once `turn >= k_max` (value +1).
class SurveillanceGame {
 public:
  using State = GameState;
  using Action = JointAction;
  using Key = std::vector<int>;

  SurveillanceGame(const GameContext& ctx, int k_max) : ctx_(&ctx), k_max_(k_max) {}

  std::vector<JointAction> actions(const GameState& s) const {
    return ctx_->joint_pursuer_actions(s);
  }
  GameState next(const GameState& s, const JointAction& a) const { return transition(*ctx_, s, a); }
  std::optional<double> terminal_value(const GameState& s) const;
  Key key(const GameState& s) const;

  const GameContext& context() const { return *ctx_; }
  int k_max() const { return k_max_; }

 private:
  const GameContext* ctx_;
  int k_max_;
};

using Evaluator =
    std::function<mcts::Evaluation(const GameState&, std::span<const JointAction>)>;

enum class EvaluatorKind { kDistance, kShadow, kBlend, kUniform, kDirichlet };

struct EvaluatorSpec {
  EvaluatorKind kind = EvaluatorKind::kBlend;
  double alpha = 0.3;  // dirichlet only
};

// Accepts "distance", "shadow", "blend", "uniform", "dirichlet" and
// "dirichlet(<alpha>)".
EvaluatorSpec parse_evaluator(const std::string& text);
std::string to_string(const EvaluatorSpec& spec);

/// Heuristic evaluators return the matching strategy policy with value 0.
/// The dirichlet evaluator draws a fresh Dir(alpha) sample per call from its
/// own generator seeded with `seed`.
Evaluator make_evaluator(const GameContext& ctx, const EvaluatorSpec& spec,
                         std::uint64_t seed = 0);

// Raw strategy policy for a heuristic kind; throws for dirichlet.
Policy heuristic_policy(const GameContext& ctx, EvaluatorKind kind, const GameState& state);

using SurveillanceResult = mcts::SearchResult<JointAction>;

SurveillanceResult search_pursuer_move(const GameContext& ctx, const GameState& state,
                                       const Evaluator& evaluator, int k_max,
                                       const mcts::SearchOptions& options);

// One JSON object per line: iteration, path, depth, leaf value, terminal flag.
std::string trace_to_json_lines(std::span<const mcts::TraceEntry> trace);
std::vector<mcts::TraceEntry> trace_from_json_lines(const std::string& text);

}  // namespace seg
