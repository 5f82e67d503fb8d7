#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seg/game.hpp"
#include "seg/mcts.hpp"
#include "seg/search.hpp"

namespace seg {

enum class ControllerKind { kPolicy, kStay, kMcts };

/// Pursuer controller: argmax of a raw strategy policy, standing still, or
/// MCTS with a heuristic evaluator and argmax of the refined policy.
struct ControllerSpec {
  ControllerKind kind = ControllerKind::kPolicy;
  EvaluatorSpec evaluator;  // policy kind for kPolicy, leaf evaluator for kMcts
  int iterations = 1000;
  double noise_fraction = 0.25;
  double dirichlet_alpha = 0.3;
  double temperature = 1.0;
};

// "distance", "shadow", "blend", "uniform", "stay", "mcts(<evaluator>)" or
// "mcts(<evaluator>,<M>)".
ControllerSpec parse_controller(const std::string& text);
std::string to_string(const ControllerSpec& spec);
nlohmann::json to_json(const ControllerSpec& spec);
// Accepts the string form or {"mcts": {"evaluator", "iterations", "noise",
// "alpha", "tau"}}.
ControllerSpec controller_from_json(const nlohmann::json& j);

std::uint64_t splitmix64(std::uint64_t x);

class Controller {
 public:
  Controller(const GameContext& ctx, ControllerSpec spec, int k_max, std::uint64_t seed);

  JointAction choose(const GameState& state);

  // Root statistics of the last MCTS move, if any.
  const std::optional<SurveillanceResult>& last_search() const { return last_search_; }
  void set_record_trace(bool on) { record_trace_ = on; }

  const ControllerSpec& spec() const { return spec_; }

 private:
  const GameContext* ctx_;
  ControllerSpec spec_;
  int k_max_;
  std::uint64_t seed_;
  Evaluator evaluator_;
  bool record_trace_ = false;
  std::optional<SurveillanceResult> last_search_;
};

enum class GameOutcome { kPursuerWin, kEvaderWin };
std::string to_string(GameOutcome outcome);

struct TurnRecord {
  JointAction pursuer_action;
  GameState state;  // after the evaders' reply
};

struct GameRecord {
  GameState initial;
  std::vector<TurnRecord> turns;
  GameOutcome outcome = GameOutcome::kPursuerWin;
  int k_max = 0;
  double dt = 0.0;
  std::string controller;
  std::uint64_t seed = 0;

  int length() const { return static_cast<int>(turns.size()); }
  const GameState& final_state() const { return turns.empty() ? initial : turns.back().state; }
};

nlohmann::json to_json(const GameRecord& record);
GameRecord game_record_from_json(const nlohmann::json& j);

// Observes each turn as it is played (e.g. to export search traces).
using TurnHook = std::function<void(const TurnRecord&, const Controller&)>;

/// Plays pursuer moves from `controller` against evader_rule until an evader
/// is hidden from every pursuer or `k_max` turns pass. A terminal start gives
/// an empty evader-win record; k_max = 0 gives an empty pursuer-win record.
GameRecord run_game(const GameContext& ctx, const GameState& start, Controller& controller,
                    int k_max, const TurnHook& on_turn = {});
GameRecord run_game(const GameContext& ctx, const GameState& start, const ControllerSpec& spec,
                    int k_max, std::uint64_t seed);

struct SweepOptions {
  // Empty selects the cell containing (1/2, 1/4) for a single pursuer.
  std::vector<Cell> pursuers;
  // Positions of evaders 1.. (evader 0 is swept); size must be k_E - 1.
  std::vector<Cell> fixed_evaders;
  int k_max = 100;
  std::uint64_t seed = 0;
};

struct SweepRow {
  Cell start;
  bool terminal_start = false;
  GameOutcome outcome = GameOutcome::kEvaderWin;
  int turns = 0;
  double time = 0.0;
};

struct SweepResult {
  std::string controller;
  double dt = 0.0;
  std::vector<SweepRow> rows;  // one per free start cell, in cell order
  int filtered = 0;            // terminal starts (not counted as games)

  int games() const;
  int pursuer_wins() const;
  double win_pct() const;
  double mean_time() const;
};

/// Runs one game from every free evader start cell (in parallel). Terminal
/// starts are listed but skipped.
SweepResult run_match_statistics(const GameContext& ctx, const ControllerSpec& spec,
                                 const SweepOptions& options);

// Per-cell game length in turns; 0 at obstacle and terminal-start cells.
ScalarField sweep_slice(const Grid2D& grid, const SweepResult& result);
std::string sweep_csv(const SweepResult& result);
nlohmann::json sweep_summary(const SweepResult& result);

/// Leaf depths in game time (depth x dt) binned per block of search
/// iterations; counts[b][d] is the number of leaves at depth d within block b.
struct LeafDepthHistogram {
  int block_size = 100;
  double dt = 1.0;
  std::vector<std::vector<int>> counts;

  int total() const;
};

LeafDepthHistogram leaf_depth_histogram(std::span<const mcts::TraceEntry> trace, double dt,
                                        int block_size = 100);
nlohmann::json to_json(const LeafDepthHistogram& histogram);

}  // namespace seg
