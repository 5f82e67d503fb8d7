#include "seg/search.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace seg {

GameState transition(const GameContext& ctx, const GameState& state, const JointAction& action) {
  if (action.size() != state.pursuers.size()) {
    throw std::invalid_argument("joint action size does not match the pursuer count");
  }
  for (std::size_t k = 0; k < action.size(); ++k) {
    const auto& cells = ctx.actions(state.pursuers[k], Team::kPursuer).cells;
    if (!std::binary_search(cells.begin(), cells.end(), action[k])) {
      throw std::invalid_argument("pursuer " + std::to_string(k) + " cannot reach [" +
                                  std::to_string(action[k].i) + ", " +
                                  std::to_string(action[k].j) + "] in one turn");
    }
  }
  GameState next;
  next.pursuers = action;
  next.evaders = state.evaders;
  next.turn = state.turn + 1;
  next.evaders = evader_rule(ctx, next);
  return next;
}

std::optional<double> SurveillanceGame::terminal_value(const GameState& s) const {
  if (ctx_->is_end_game(s)) return -1.0;
  if (s.turn >= k_max_) return 1.0;
  return std::nullopt;
}

SurveillanceGame::Key SurveillanceGame::key(const GameState& s) const {
  Key k;
  k.reserve(2 * (s.pursuers.size() + s.evaders.size()) + 1);
  for (const Cell& c : s.pursuers) {
    k.push_back(c.i);
    k.push_back(c.j);
  }
  for (const Cell& c : s.evaders) {
    k.push_back(c.i);
    k.push_back(c.j);
  }
  k.push_back(s.turn);
  return k;
}

EvaluatorSpec parse_evaluator(const std::string& text) {
  if (text == "distance") return {EvaluatorKind::kDistance};
  if (text == "shadow") return {EvaluatorKind::kShadow};
  if (text == "blend") return {EvaluatorKind::kBlend};
  if (text == "uniform") return {EvaluatorKind::kUniform};
  if (text == "dirichlet") return {EvaluatorKind::kDirichlet, 0.3};
  if (text.starts_with("dirichlet(") && text.ends_with(")")) {
    const std::string inner = text.substr(10, text.size() - 11);
    std::size_t used = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(inner, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != inner.size() || !(alpha > 0.0)) {
      throw std::invalid_argument("bad dirichlet parameter in '" + text + "'");
    }
    return {EvaluatorKind::kDirichlet, alpha};
  }
  throw std::invalid_argument("unknown evaluator '" + text +
                              "' (expected distance, shadow, blend, uniform or dirichlet)");
}

std::string to_string(const EvaluatorSpec& spec) {
  switch (spec.kind) {
    case EvaluatorKind::kDistance: return "distance";
    case EvaluatorKind::kShadow: return "shadow";
    case EvaluatorKind::kBlend: return "blend";
    case EvaluatorKind::kUniform: return "uniform";
    case EvaluatorKind::kDirichlet: {
      std::ostringstream out;
      out << "dirichlet(" << spec.alpha << ")";
      return out.str();
    }
  }
  return "unknown";
}

Policy heuristic_policy(const GameContext& ctx, EvaluatorKind kind, const GameState& state) {
  switch (kind) {
    case EvaluatorKind::kDistance: return distance_policy(ctx, state);
    case EvaluatorKind::kShadow: return shadow_policy(ctx, state);
    case EvaluatorKind::kBlend: return blend_policy(ctx, state);
    case EvaluatorKind::kUniform: return uniform_policy(ctx, state);
    case EvaluatorKind::kDirichlet: break;
  }
  throw std::invalid_argument("dirichlet has no deterministic policy");
}

Evaluator make_evaluator(const GameContext& ctx, const EvaluatorSpec& spec, std::uint64_t seed) {
  if (spec.kind == EvaluatorKind::kDirichlet) {
    if (!(spec.alpha > 0.0)) throw std::invalid_argument("dirichlet alpha must be positive");
    struct Sampler {
      std::mutex mutex;
      std::mt19937_64 rng;
    };
    auto sampler = std::make_shared<Sampler>();
    sampler->rng.seed(seed);
    const double alpha = spec.alpha;
    return [sampler, alpha](const GameState&, std::span<const JointAction> actions) {
      std::lock_guard lock(sampler->mutex);
      return mcts::Evaluation{mcts::detail::dirichlet(actions.size(), alpha, sampler->rng), 0.0};
    };
  }
  const EvaluatorKind kind = spec.kind;
  const GameContext* context = &ctx;
  return [context, kind](const GameState& state, std::span<const JointAction> actions) {
    Policy policy = heuristic_policy(*context, kind, state);
    if (policy.size() != actions.size() ||
        !std::equal(actions.begin(), actions.end(), policy.support.begin())) {
      throw std::logic_error("evaluator support differs from the searched action set");
    }
    return mcts::Evaluation{std::move(policy.weights), 0.0};
  };
}

SurveillanceResult search_pursuer_move(const GameContext& ctx, const GameState& state,
                                       const Evaluator& evaluator, int k_max,
                                       const mcts::SearchOptions& options) {
  const SurveillanceGame game(ctx, k_max);
  return mcts::search(game, state, evaluator, options);
}

std::string trace_to_json_lines(std::span<const mcts::TraceEntry> trace) {
  std::string out;
  for (const auto& e : trace) {
    nlohmann::json j;
    j["iteration"] = e.iteration;
    j["path"] = e.path;
    j["depth"] = e.path.size();
    j["value"] = e.leaf_value;
    j["terminal"] = e.terminal;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<mcts::TraceEntry> trace_from_json_lines(const std::string& text) {
  std::vector<mcts::TraceEntry> trace;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      mcts::TraceEntry e;
      e.iteration = j.at("iteration").get<int>();
      e.path = j.at("path").get<std::vector<std::size_t>>();
      e.leaf_value = j.value("value", 0.0);
      e.terminal = j.value("terminal", false);
      trace.push_back(std::move(e));
    } catch (const nlohmann::json::exception& err) {
      throw std::invalid_argument("trace line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return trace;
}

}  // namespace seg
