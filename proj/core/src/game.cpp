#include "seg/game.hpp"

#include <stdexcept>
#include <string>

namespace seg {
namespace {

constexpr double kArrivalSlack = 1e-12;

std::vector<Cell> reachable_cells(const ScalarField& arrival, const ScalarField& phi,
                                  double dt) {
  std::vector<Cell> cells;
  const Grid2D& grid = phi.grid();
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (phi[idx] > 0.0 && arrival[idx] <= dt + kArrivalSlack) cells.push_back(grid.cell(idx));
  }
  return cells;
}

ScalarField arrival_field(Cell source, double speed, const ScalarField& phi, double v_min) {
  const ScalarField field = obstacle_speed(speed, phi, v_min);
  const Cell sources[] = {source};
  return solve_eikonal(field, sources, {.stencil = EikonalStencil::kEightPoint});
}

}  // namespace

ActionSet valid_actions(Cell position, double speed, const ScalarField& phi, double dt,
                        double v_min) {
  if (!phi.grid().contains(position) || !(phi(position) > 0.0)) {
    throw std::invalid_argument("action origin must be a free cell");
  }
  if (!(speed > v_min)) throw std::invalid_argument("player speed must exceed v_min");
  const ScalarField arrival = arrival_field(position, speed, phi, v_min);
  return {position, dt, reachable_cells(arrival, phi, dt)};
}

GameContext::GameContext(const Scene& scene, const Grid2D& grid, const GameOptions& options)
    : scene_(scene),
      grid_(grid),
      phi_(std::make_shared<const ScalarField>(signed_distance(scene, grid))),
      shadows_(phi_, options.auxiliary),
      dt_(options.dt > 0.0 ? options.dt : 1.5 * grid.h() / scene.evader_speed),
      v_min_(options.v_min) {
  scene_.validate();
  if (!(scene_.pursuer_speed > v_min_) || !(scene_.evader_speed > v_min_)) {
    throw std::invalid_argument("discrete game speeds must exceed v_min");
  }
}

const ScalarField& GameContext::arrival(Cell source, Team team) const {
  const auto key = std::make_pair(source, team);
  {
    std::shared_lock lock(mutex_);
    if (auto it = arrivals_.find(key); it != arrivals_.end()) return *it->second;
  }
  if (!grid_.contains(source)) throw std::invalid_argument("arrival source outside grid");
  auto field = std::make_unique<const ScalarField>(
      arrival_field(source, speed(team), *phi_, v_min_));
  eikonal_solves_.fetch_add(1);
  std::unique_lock lock(mutex_);
  auto [it, inserted] = arrivals_.try_emplace(key, std::move(field));
  return *it->second;
}

const ActionSet& GameContext::actions(Cell position, Team team) const {
  const auto key = std::make_pair(position, team);
  {
    std::shared_lock lock(mutex_);
    if (auto it = actions_.find(key); it != actions_.end()) return *it->second;
  }
  if (!is_free(position)) throw std::invalid_argument("action origin must be a free cell");
  auto set = std::make_unique<const ActionSet>(
      ActionSet{position, dt_, reachable_cells(arrival(position, team), *phi_, dt_)});
  std::unique_lock lock(mutex_);
  auto [it, inserted] = actions_.try_emplace(key, std::move(set));
  return *it->second;
}

std::vector<JointAction> GameContext::joint_pursuer_actions(const GameState& state) const {
  std::vector<JointAction> joint{JointAction{}};
  for (const Cell& p : state.pursuers) {
    const ActionSet& set = actions(p, Team::kPursuer);
    std::vector<JointAction> next;
    next.reserve(joint.size() * set.cells.size());
    for (const JointAction& prefix : joint) {
      for (const Cell& c : set.cells) {
        JointAction a = prefix;
        a.push_back(c);
        next.push_back(std::move(a));
      }
    }
    joint = std::move(next);
  }
  return joint;
}

bool GameContext::is_end_game(const GameState& state) const {
  return seg::is_end_game(shadows_, state.pursuers, state.evaders);
}

void GameContext::validate(const GameState& state) const {
  if (static_cast<int>(state.pursuers.size()) != scene_.pursuers ||
      static_cast<int>(state.evaders.size()) != scene_.evaders) {
    throw std::invalid_argument("state has " + std::to_string(state.pursuers.size()) +
                                " pursuers and " + std::to_string(state.evaders.size()) +
                                " evaders; scene expects " + std::to_string(scene_.pursuers) +
                                " and " + std::to_string(scene_.evaders));
  }
  for (const auto* team : {&state.pursuers, &state.evaders}) {
    for (const Cell& c : *team) {
      if (!is_free(c)) {
        throw std::invalid_argument("player at [" + std::to_string(c.i) + ", " +
                                    std::to_string(c.j) + "] is not in free space");
      }
    }
  }
  if (state.turn < 0) throw std::invalid_argument("turn must be nonnegative");
}

nlohmann::json to_json(Cell c) { return nlohmann::json::array({c.i, c.j}); }

Cell cell_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("cell must be [i, j]");
  return {j[0].get<int>(), j[1].get<int>()};
}

nlohmann::json to_json(const GameState& state) {
  nlohmann::json j;
  j["pursuers"] = nlohmann::json::array();
  for (const Cell& c : state.pursuers) j["pursuers"].push_back(to_json(c));
  j["evaders"] = nlohmann::json::array();
  for (const Cell& c : state.evaders) j["evaders"].push_back(to_json(c));
  j["turn"] = state.turn;
  return j;
}

GameState game_state_from_json(const nlohmann::json& j) {
  GameState s;
  for (const auto& c : j.at("pursuers")) s.pursuers.push_back(cell_from_json(c));
  for (const auto& c : j.at("evaders")) s.evaders.push_back(cell_from_json(c));
  s.turn = j.value("turn", 0);
  return s;
}

}  // namespace seg
