#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seg/engine.hpp"
#include "seg/game.hpp"
#include "seg/scene.hpp"

namespace seg {

/// Request error carrying an HTTP-style status (400 malformed, 404 unknown
/// session, 409 finished session, 422 illegal start or move).
class SessionError : public std::runtime_error {
 public:
  SessionError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

enum class SessionStatus { kActive, kPursuerWon, kEvaderWon };
std::string to_string(SessionStatus status);

/// Run-length encoding of a 0/1 mask in cell index order (i outer):
/// {"start": first value, "runs": [lengths of alternating runs]}.
nlohmann::json encode_rle(const std::vector<char>& mask);
std::vector<char> decode_rle(const nlohmann::json& rle, std::size_t size);

struct SessionDefaults {
  Scene scene;
  int m = 16;
  std::string controller = "blend";
  int k_max = 100;
};

// Players placed at free cells nearest to spread-out anchor points (pursuers
// along y = 1/4, evaders along y = 3/4), skipping evader cells that would
// make the start terminal.
GameState default_start(const GameContext& ctx);

/// Live games with a human-controlled evader team. Each turn the pursuer
/// controller decides on the state before the human move, then both moves
/// are applied. Sessions share GameContexts (per scene and grid size);
/// moves within a session are serialized.
class SessionManager {
 public:
  using Listener = std::function<void(const nlohmann::json&)>;

  explicit SessionManager(SessionDefaults defaults = {});
  ~SessionManager();

  // Request: {"scene"?, "m"?, "controller"?, "k_max"?, "seed"?, "start"?}.
  // Returns the full session view.
  nlohmann::json create_session(const nlohmann::json& request);
  // Request: {"evader": [i,j]} or {"evaders": [[i,j], ...]}.
  nlohmann::json submit_move(const std::string& id, const nlohmann::json& request);
  nlohmann::json get(const std::string& id) const;

  // Listeners receive {"state", "overlays", "status", ...} after each turn.
  std::size_t subscribe(const std::string& id, Listener listener);
  void unsubscribe(const std::string& id, std::size_t token);
  bool contains(const std::string& id) const;
  std::size_t size() const;

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<const GameContext> context_for(const Scene& scene, int m);

  SessionDefaults defaults_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::shared_ptr<const GameContext>> contexts_;
  std::uint64_t counter_ = 0;
};

}  // namespace seg
