#include "seg/engine.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <tbb/parallel_for.h>

#include "seg/strategies.hpp"

namespace seg {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

ControllerSpec parse_controller(const std::string& raw) {
  const std::string text = trim(raw);
  ControllerSpec spec;
  if (text == "stay") {
    spec.kind = ControllerKind::kStay;
    return spec;
  }
  if (text.starts_with("mcts(") && text.ends_with(")")) {
    spec.kind = ControllerKind::kMcts;
    const std::string inner = text.substr(5, text.size() - 6);
    // The evaluator may itself contain parentheses, e.g. dirichlet(0.3).
    const auto close = inner.rfind(')');
    const auto comma = inner.find(',', close == std::string::npos ? 0 : close);
    spec.evaluator = parse_evaluator(trim(inner.substr(0, comma)));
    if (comma != std::string::npos) {
      const std::string m = trim(inner.substr(comma + 1));
      std::size_t used = 0;
      int iterations = 0;
      try {
        iterations = std::stoi(m, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != m.size() || iterations < 1) {
        throw std::invalid_argument("bad MCTS iteration count in '" + text + "'");
      }
      spec.iterations = iterations;
    }
    return spec;
  }
  spec.kind = ControllerKind::kPolicy;
  try {
    spec.evaluator = parse_evaluator(text);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("unknown controller '" + text +
                                "' (expected distance, shadow, blend, uniform, stay or "
                                "mcts(<evaluator>,<M>))");
  }
  if (spec.evaluator.kind == EvaluatorKind::kDirichlet) {
    throw std::invalid_argument("dirichlet is only available as an MCTS evaluator");
  }
  return spec;
}

std::string to_string(const ControllerSpec& spec) {
  switch (spec.kind) {
    case ControllerKind::kStay: return "stay";
    case ControllerKind::kPolicy: return to_string(spec.evaluator);
    case ControllerKind::kMcts:
      return "mcts(" + to_string(spec.evaluator) + "," + std::to_string(spec.iterations) + ")";
  }
  return "unknown";
}

nlohmann::json to_json(const ControllerSpec& spec) {
  if (spec.kind != ControllerKind::kMcts) return to_string(spec);
  return {{"mcts",
           {{"evaluator", to_string(spec.evaluator)},
            {"iterations", spec.iterations},
            {"noise", spec.noise_fraction},
            {"alpha", spec.dirichlet_alpha},
            {"tau", spec.temperature}}}};
}

ControllerSpec controller_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_controller(j.get<std::string>());
  if (!j.is_object() || !j.contains("mcts")) {
    throw std::invalid_argument("controller must be a string or {\"mcts\": {...}}");
  }
  const auto& m = j.at("mcts");
  ControllerSpec spec;
  spec.kind = ControllerKind::kMcts;
  spec.evaluator = parse_evaluator(m.value("evaluator", std::string("blend")));
  spec.iterations = m.value("iterations", spec.iterations);
  spec.noise_fraction = m.value("noise", spec.noise_fraction);
  spec.dirichlet_alpha = m.value("alpha", spec.dirichlet_alpha);
  spec.temperature = m.value("tau", spec.temperature);
  if (spec.iterations < 1) throw std::invalid_argument("MCTS iterations must be >= 1");
  if (spec.noise_fraction < 0.0 || spec.noise_fraction > 1.0) {
    throw std::invalid_argument("MCTS noise fraction must lie in [0, 1]");
  }
  if (!(spec.dirichlet_alpha > 0.0) || !(spec.temperature > 0.0)) {
    throw std::invalid_argument("MCTS alpha and tau must be positive");
  }
  return spec;
}

Controller::Controller(const GameContext& ctx, ControllerSpec spec, int k_max, std::uint64_t seed)
    : ctx_(&ctx), spec_(std::move(spec)), k_max_(k_max), seed_(seed) {
  if (spec_.kind == ControllerKind::kPolicy && spec_.evaluator.kind == EvaluatorKind::kDirichlet) {
    throw std::invalid_argument("dirichlet is only available as an MCTS evaluator");
  }
  if (spec_.kind == ControllerKind::kMcts) {
    evaluator_ = make_evaluator(ctx, spec_.evaluator, splitmix64(seed_ ^ 0x5eedULL));
  }
}

JointAction Controller::choose(const GameState& state) {
  switch (spec_.kind) {
    case ControllerKind::kStay: return state.pursuers;
    case ControllerKind::kPolicy: {
      const Policy policy = heuristic_policy(*ctx_, spec_.evaluator.kind, state);
      return policy.support[argmax_action(policy.support, policy.weights, state.pursuers)];
    }
    case ControllerKind::kMcts: {
      mcts::SearchOptions options;
      options.iterations = spec_.iterations;
      options.noise_fraction = spec_.noise_fraction;
      options.dirichlet_alpha = spec_.dirichlet_alpha;
      options.temperature = spec_.temperature;
      options.seed = splitmix64(seed_ + static_cast<std::uint64_t>(state.turn));
      options.record_trace = record_trace_;
      last_search_ = search_pursuer_move(*ctx_, state, evaluator_, k_max_, options);
      const auto& r = *last_search_;
      return r.actions[argmax_action(r.actions, r.policy, state.pursuers)];
    }
  }
  throw std::logic_error("unhandled controller kind");
}

std::string to_string(GameOutcome outcome) {
  return outcome == GameOutcome::kPursuerWin ? "pursuer-win" : "evader-win";
}

nlohmann::json to_json(const GameRecord& record) {
  nlohmann::json j;
  j["controller"] = record.controller;
  j["seed"] = record.seed;
  j["k_max"] = record.k_max;
  j["dt"] = record.dt;
  j["initial"] = to_json(record.initial);
  j["turns"] = nlohmann::json::array();
  for (const TurnRecord& t : record.turns) {
    nlohmann::json action = nlohmann::json::array();
    for (const Cell& c : t.pursuer_action) action.push_back(to_json(c));
    j["turns"].push_back({{"pursuer_action", action}, {"state", to_json(t.state)}});
  }
  j["outcome"] = to_string(record.outcome);
  j["length"] = record.length();
  return j;
}

GameRecord game_record_from_json(const nlohmann::json& j) {
  GameRecord r;
  r.controller = j.value("controller", std::string());
  r.seed = j.value("seed", std::uint64_t{0});
  r.k_max = j.at("k_max").get<int>();
  r.dt = j.value("dt", 0.0);
  r.initial = game_state_from_json(j.at("initial"));
  for (const auto& t : j.at("turns")) {
    TurnRecord turn;
    for (const auto& c : t.at("pursuer_action")) turn.pursuer_action.push_back(cell_from_json(c));
    turn.state = game_state_from_json(t.at("state"));
    r.turns.push_back(std::move(turn));
  }
  const std::string outcome = j.at("outcome").get<std::string>();
  if (outcome == "pursuer-win") {
    r.outcome = GameOutcome::kPursuerWin;
  } else if (outcome == "evader-win") {
    r.outcome = GameOutcome::kEvaderWin;
  } else {
    throw std::invalid_argument("unknown outcome '" + outcome + "'");
  }
  return r;
}

GameRecord run_game(const GameContext& ctx, const GameState& start, Controller& controller,
                    int k_max, const TurnHook& on_turn) {
  if (k_max < 0) throw std::invalid_argument("K_max must be nonnegative");
  ctx.validate(start);
  GameRecord record;
  record.initial = start;
  record.k_max = k_max;
  record.dt = ctx.dt();
  record.controller = to_string(controller.spec());
  if (ctx.is_end_game(start)) {
    record.outcome = GameOutcome::kEvaderWin;
    return record;
  }
  record.outcome = GameOutcome::kPursuerWin;
  GameState state = start;
  for (int turn = 0; turn < k_max; ++turn) {
    TurnRecord t;
    t.pursuer_action = controller.choose(state);
    state = transition(ctx, state, t.pursuer_action);
    t.state = state;
    if (on_turn) on_turn(t, controller);
    record.turns.push_back(std::move(t));
    if (ctx.is_end_game(state)) {
      record.outcome = GameOutcome::kEvaderWin;
      break;
    }
  }
  return record;
}

GameRecord run_game(const GameContext& ctx, const GameState& start, const ControllerSpec& spec,
                    int k_max, std::uint64_t seed) {
  // The search horizon counts absolute turns, so shift it by the start turn.
  Controller controller(ctx, spec, k_max + start.turn, seed);
  GameRecord record = run_game(ctx, start, controller, k_max);
  record.seed = seed;
  return record;
}

int SweepResult::games() const {
  int n = 0;
  for (const auto& r : rows) n += r.terminal_start ? 0 : 1;
  return n;
}

int SweepResult::pursuer_wins() const {
  int n = 0;
  for (const auto& r : rows) {
    n += (!r.terminal_start && r.outcome == GameOutcome::kPursuerWin) ? 1 : 0;
  }
  return n;
}

double SweepResult::win_pct() const {
  const int n = games();
  return n == 0 ? 0.0 : 100.0 * pursuer_wins() / n;
}

double SweepResult::mean_time() const {
  const int n = games();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (const auto& r : rows) total += r.terminal_start ? 0.0 : r.time;
  return total / n;
}

SweepResult run_match_statistics(const GameContext& ctx, const ControllerSpec& spec,
                                 const SweepOptions& options) {
  const Grid2D& grid = ctx.grid();
  std::vector<Cell> pursuers = options.pursuers;
  if (pursuers.empty()) {
    if (ctx.scene().pursuers != 1) {
      throw std::invalid_argument("multi-pursuer sweeps need explicit pursuer positions");
    }
    pursuers.push_back(grid.locate({0.5, 0.25}));
  }
  if (static_cast<int>(options.fixed_evaders.size()) + 1 != ctx.scene().evaders) {
    throw std::invalid_argument("sweep needs k_E - 1 fixed evader positions");
  }

  SweepResult result;
  result.controller = to_string(spec);
  result.dt = ctx.dt();
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const Cell c = grid.cell(idx);
    if (ctx.is_free(c)) result.rows.push_back({.start = c});
  }

  tbb::parallel_for(std::size_t{0}, result.rows.size(), [&](std::size_t k) {
    SweepRow& row = result.rows[k];
    GameState start;
    start.pursuers = pursuers;
    start.evaders.push_back(row.start);
    start.evaders.insert(start.evaders.end(), options.fixed_evaders.begin(),
                         options.fixed_evaders.end());
    if (ctx.is_end_game(start)) {
      row.terminal_start = true;
      return;
    }
    const auto cell_index = static_cast<std::uint64_t>(grid.index(row.start));
    const GameRecord record =
        run_game(ctx, start, spec, options.k_max, splitmix64(options.seed ^ splitmix64(cell_index)));
    row.outcome = record.outcome;
    row.turns = record.length();
    row.time = row.turns * ctx.dt();
  });
  for (const auto& row : result.rows) result.filtered += row.terminal_start ? 1 : 0;
  return result;
}

ScalarField sweep_slice(const Grid2D& grid, const SweepResult& result) {
  ScalarField slice(grid, 0.0);
  for (const auto& row : result.rows) {
    if (!row.terminal_start) slice[grid.index(row.start)] = row.turns;
  }
  return slice;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "cell_i,cell_j,outcome,turns,time\n";
  out.precision(17);
  for (const auto& row : result.rows) {
    out << row.start.i << ',' << row.start.j << ','
        << (row.terminal_start ? "terminal-start" : to_string(row.outcome)) << ',' << row.turns
        << ',' << row.time << '\n';
  }
  return out.str();
}

nlohmann::json sweep_summary(const SweepResult& result) {
  return {{"controller", result.controller}, {"win_pct", result.win_pct()},
          {"mean_time", result.mean_time()}, {"n_games", result.games()},
          {"pursuer_wins", result.pursuer_wins()}, {"filtered_starts", result.filtered},
          {"dt", result.dt}};
}

int LeafDepthHistogram::total() const {
  int n = 0;
  for (const auto& block : counts) {
    for (int c : block) n += c;
  }
  return n;
}

LeafDepthHistogram leaf_depth_histogram(std::span<const mcts::TraceEntry> trace, double dt,
                                        int block_size) {
  if (block_size < 1) throw std::invalid_argument("histogram block size must be positive");
  LeafDepthHistogram h;
  h.block_size = block_size;
  h.dt = dt;
  for (const auto& e : trace) {
    const auto b = static_cast<std::size_t>(e.iteration / block_size);
    if (h.counts.size() <= b) h.counts.resize(b + 1);
    auto& block = h.counts[b];
    if (block.size() <= e.path.size()) block.resize(e.path.size() + 1, 0);
    block[e.path.size()] += 1;
  }
  return h;
}

nlohmann::json to_json(const LeafDepthHistogram& histogram) {
  nlohmann::json blocks = nlohmann::json::array();
  for (std::size_t b = 0; b < histogram.counts.size(); ++b) {
    nlohmann::json bins = nlohmann::json::array();
    for (std::size_t d = 0; d < histogram.counts[b].size(); ++d) {
      if (histogram.counts[b][d] == 0) continue;
      bins.push_back({{"depth", d},
                      {"time", static_cast<double>(d) * histogram.dt},
                      {"count", histogram.counts[b][d]}});
    }
    blocks.push_back({{"first_iteration", b * histogram.block_size},
                      {"last_iteration", (b + 1) * histogram.block_size - 1},
                      {"bins", bins}});
  }
  return {{"block_size", histogram.block_size}, {"dt", histogram.dt}, {"blocks", blocks}};
}

}  // namespace seg
