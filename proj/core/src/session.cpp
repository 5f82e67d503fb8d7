#include "seg/session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "seg/strategies.hpp"

namespace seg {

struct SessionManager::Session {
  std::string id;
  std::shared_ptr<const GameContext> ctx;
  ControllerSpec spec;
  std::unique_ptr<Controller> controller;
  int k_max = 0;
  std::uint64_t seed = 0;
  GameState initial;
  GameState state;
  SessionStatus status = SessionStatus::kActive;
  std::vector<nlohmann::json> moves;
  nlohmann::json last_policy;

  mutable std::mutex mutex;
  std::map<std::size_t, Listener> listeners;
  std::size_t next_token = 1;
};

namespace {

std::vector<Cell> cells_from_json(const nlohmann::json& j) {
  std::vector<Cell> out;
  for (const auto& c : j) out.push_back(cell_from_json(c));
  return out;
}

nlohmann::json cells_to_json(const std::vector<Cell>& cells) {
  nlohmann::json out = nlohmann::json::array();
  for (const Cell& c : cells) out.push_back(to_json(c));
  return out;
}

std::vector<char> obstacle_mask(const GameContext& ctx) {
  std::vector<char> mask(ctx.grid().size());
  for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = ctx.phi()[k] > 0.0 ? 0 : 1;
  return mask;
}

std::vector<char> visible_mask(const GameContext& ctx, const std::vector<Cell>& pursuers) {
  const auto shadow = joint_shadow_mask(ctx.shadows(), pursuers);
  std::vector<char> mask(shadow.size());
  for (std::size_t k = 0; k < mask.size(); ++k) {
    mask[k] = (ctx.phi()[k] > 0.0 && !shadow[k]) ? 1 : 0;
  }
  return mask;
}

Cell nearest_free(const GameContext& ctx, Point target,
                  const std::function<bool(Cell)>& accept) {
  const Grid2D& g = ctx.grid();
  std::optional<Cell> best;
  double best_d = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Cell c = g.cell(k);
    if (!ctx.is_free(c) || !accept(c)) continue;
    const double d = norm(g.center(c) - target);
    if (!best || d < best_d - 1e-12) {
      best = c;
      best_d = d;
    }
  }
  if (!best) throw SessionError(422, "no free cell available for a default start");
  return *best;
}

}  // namespace

std::string to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::kActive: return "active";
    case SessionStatus::kPursuerWon: return "pursuer-won";
    case SessionStatus::kEvaderWon: return "evader-won";
  }
  return "unknown";
}

nlohmann::json encode_rle(const std::vector<char>& mask) {
  nlohmann::json runs = nlohmann::json::array();
  const int start = mask.empty() ? 0 : (mask.front() ? 1 : 0);
  std::size_t k = 0;
  while (k < mask.size()) {
    const bool v = mask[k] != 0;
    std::size_t n = 0;
    while (k < mask.size() && (mask[k] != 0) == v) {
      ++n;
      ++k;
    }
    runs.push_back(n);
  }
  return {{"start", start}, {"runs", runs}};
}

std::vector<char> decode_rle(const nlohmann::json& rle, std::size_t size) {
  std::vector<char> mask;
  mask.reserve(size);
  char v = static_cast<char>(rle.at("start").get<int>() ? 1 : 0);
  for (const auto& run : rle.at("runs")) {
    mask.insert(mask.end(), run.get<std::size_t>(), v);
    v = static_cast<char>(1 - v);
  }
  if (mask.size() != size) throw std::invalid_argument("RLE mask length mismatch");
  return mask;
}

GameState default_start(const GameContext& ctx) {
  GameState s;
  const int kp = ctx.scene().pursuers;
  const int ke = ctx.scene().evaders;
  for (int k = 0; k < kp; ++k) {
    const Point anchor{(k + 1.0) / (kp + 1.0), 0.25};
    s.pursuers.push_back(nearest_free(ctx, anchor, [](Cell) { return true; }));
  }
  for (int k = 0; k < ke; ++k) {
    const Point anchor{(k + 1.0) / (ke + 1.0), 0.75};
    s.evaders.push_back(nearest_free(ctx, anchor, [&](Cell c) {
      GameState trial = s;
      trial.evaders.push_back(c);
      // Only the evaders placed so far matter for the terminal check.
      return !is_end_game(ctx.shadows(), trial.pursuers, trial.evaders);
    }));
  }
  return s;
}

SessionManager::SessionManager(SessionDefaults defaults) : defaults_(std::move(defaults)) {
  std::random_device rd;
  counter_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

SessionManager::~SessionManager() = default;

std::shared_ptr<const GameContext> SessionManager::context_for(const Scene& scene, int m) {
  const std::string key = scene_hash(scene) + ":" + std::to_string(m);
  std::lock_guard lock(mutex_);
  auto& slot = contexts_[key];
  if (!slot) slot = std::make_shared<const GameContext>(scene, Grid2D(m));
  return slot;
}

namespace {

nlohmann::json turn_payload(const GameContext& ctx, const GameState& state, SessionStatus status,
                            const nlohmann::json& policy) {
  nlohmann::json valid = nlohmann::json::array();
  if (status == SessionStatus::kActive) {
    for (const Cell& e : state.evaders) valid.push_back(cells_to_json(ctx.actions(e, Team::kEvader).cells));
  }
  nlohmann::json overlays;
  overlays["shadow"] = encode_rle(joint_shadow_mask(ctx.shadows(), state.pursuers));
  overlays["visible"] = encode_rle(visible_mask(ctx, state.pursuers));
  overlays["policy"] = policy;
  return {{"state", to_json(state)},
          {"status", to_string(status)},
          {"valid_moves", valid},
          {"overlays", overlays}};
}

}  // namespace

nlohmann::json SessionManager::create_session(const nlohmann::json& request) {
  if (!request.is_object()) throw SessionError(400, "request body must be a JSON object");
  auto session = std::make_shared<Session>();
  Scene scene = defaults_.scene;
  int m = defaults_.m;
  try {
    if (request.contains("scene")) scene = scene_from_json(request.at("scene"));
    m = request.value("m", defaults_.m);
    session->spec = request.contains("controller")
                        ? controller_from_json(request.at("controller"))
                        : parse_controller(defaults_.controller);
    session->k_max = request.value("k_max", defaults_.k_max);
    session->seed = request.value("seed", std::uint64_t{0});
    scene.validate();
    Grid2D check(m);
  } catch (const SessionError&) {
    throw;
  } catch (const std::exception& e) {
    throw SessionError(400, e.what());
  }
  if (session->k_max < 1) throw SessionError(400, "k_max must be at least 1");

  session->ctx = context_for(scene, m);
  const GameContext& ctx = *session->ctx;
  try {
    if (request.contains("start")) {
      const auto& start = request.at("start");
      session->initial.pursuers = cells_from_json(start.at("pursuers"));
      session->initial.evaders = cells_from_json(start.at("evaders"));
    } else {
      session->initial = default_start(ctx);
    }
    ctx.validate(session->initial);
  } catch (const SessionError&) {
    throw;
  } catch (const std::exception& e) {
    throw SessionError(422, e.what());
  }
  if (ctx.is_end_game(session->initial)) throw SessionError(422, "already occluded");
  session->state = session->initial;
  session->controller =
      std::make_unique<Controller>(ctx, session->spec, session->k_max, session->seed);

  {
    std::lock_guard lock(mutex_);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(splitmix64(counter_++)));
    session->id = buf;
    sessions_[session->id] = session;
  }
  return get(session->id);
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionError(404, "no session '" + id + "'");
  return it->second;
}

bool SessionManager::contains(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return sessions_.count(id) != 0;
}

std::size_t SessionManager::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

nlohmann::json SessionManager::get(const std::string& id) const {
  const auto s = find(id);
  std::lock_guard lock(s->mutex);
  const GameContext& ctx = *s->ctx;
  nlohmann::json view = turn_payload(ctx, s->state, s->status, s->last_policy);
  view["id"] = s->id;
  view["grid"] = {{"m", ctx.grid().m()}, {"h", ctx.grid().h()}, {"dt", ctx.dt()}};
  view["obstacles"] = encode_rle(obstacle_mask(ctx));
  view["controller"] = to_json(s->spec);
  view["k_max"] = s->k_max;
  view["seed"] = s->seed;
  view["initial"] = to_json(s->initial);
  view["moves"] = s->moves;
  return view;
}

nlohmann::json SessionManager::submit_move(const std::string& id, const nlohmann::json& request) {
  const auto s = find(id);
  nlohmann::json payload;
  std::vector<Listener> listeners;
  {
    std::lock_guard lock(s->mutex);
    if (s->status != SessionStatus::kActive) {
      throw SessionError(409, "session is finished (" + to_string(s->status) + ")");
    }
    const GameContext& ctx = *s->ctx;
    std::vector<Cell> evaders;
    try {
      if (request.contains("evaders")) {
        evaders = cells_from_json(request.at("evaders"));
      } else {
        evaders.push_back(cell_from_json(request.at("evader")));
      }
    } catch (const std::exception& e) {
      throw SessionError(400, std::string("move must be {\"evader\": [i, j]}: ") + e.what());
    }
    if (evaders.size() != s->state.evaders.size()) {
      throw SessionError(422, "expected " + std::to_string(s->state.evaders.size()) +
                                  " evader cells");
    }
    for (std::size_t k = 0; k < evaders.size(); ++k) {
      const auto& valid = ctx.actions(s->state.evaders[k], Team::kEvader).cells;
      if (!std::binary_search(valid.begin(), valid.end(), evaders[k])) {
        throw SessionError(422, "illegal move to [" + std::to_string(evaders[k].i) + ", " +
                                    std::to_string(evaders[k].j) + "]");
      }
    }

    // The controller sees the state before the human move.
    const JointAction pursuers = s->controller->choose(s->state);
    if (s->spec.kind == ControllerKind::kMcts && s->controller->last_search()) {
      const auto& r = *s->controller->last_search();
      s->last_policy = policy_to_json(Policy{r.actions, r.policy});
    } else if (s->spec.kind == ControllerKind::kPolicy) {
      s->last_policy = policy_to_json(heuristic_policy(ctx, s->spec.evaluator.kind, s->state));
    }
    s->state.pursuers = pursuers;
    s->state.evaders = evaders;
    s->state.turn += 1;
    s->moves.push_back({{"evaders", cells_to_json(evaders)}, {"pursuers", cells_to_json(pursuers)}});
    if (ctx.is_end_game(s->state)) {
      s->status = SessionStatus::kEvaderWon;
    } else if (s->state.turn >= s->k_max) {
      s->status = SessionStatus::kPursuerWon;
    }
    payload = turn_payload(ctx, s->state, s->status, s->last_policy);
    payload["id"] = s->id;
    for (const auto& [token, fn] : s->listeners) listeners.push_back(fn);
  }
  for (const auto& fn : listeners) fn(payload);
  return payload;
}

std::size_t SessionManager::subscribe(const std::string& id, Listener listener) {
  const auto s = find(id);
  std::lock_guard lock(s->mutex);
  const std::size_t token = s->next_token++;
  s->listeners.emplace(token, std::move(listener));
  return token;
}

void SessionManager::unsubscribe(const std::string& id, std::size_t token) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return;
    s = it->second;
  }
  std::lock_guard lock(s->mutex);
  s->listeners.erase(token);
}

}  // namespace seg
