#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace seg::mcts {

/// Output of an evaluator at a leaf: prior over the leaf's actions and a
/// value estimate in [-1, 1] from the searching team's point of view.
struct Evaluation {
  std::vector<double> priors;
  double value = 0.0;
};

struct SearchOptions {
  int iterations = 1000;
  double noise_fraction = 0.25;
  double dirichlet_alpha = 0.3;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  bool record_trace = false;
};

struct TraceEntry {
  int iteration = 0;
  std::vector<std::size_t> path;  // action indices from the root
  double leaf_value = 0.0;
  bool terminal = false;
};

template <class Action>
struct SearchResult {
  std::vector<Action> actions;     // root actions
  std::vector<double> policy;      // refined policy over `actions`
  std::vector<int> visits;         // N(s0, a)
  std::vector<double> values;      // W(s0, a)
  std::vector<double> prior;       // noised P(s0, a)
  std::vector<TraceEntry> trace;
  std::size_t expanded_states = 0;
};

/// A deterministic two-team game seen from the searching team: `next`
/// applies one of its actions and the opponent's fixed reply.
template <class G>
concept SearchGame = requires(const G& g, const typename G::State& s,
                              const typename G::Action& a) {
  typename G::Key;
  { g.actions(s) } -> std::convertible_to<std::vector<typename G::Action>>;
  { g.next(s, a) } -> std::convertible_to<typename G::State>;
  { g.terminal_value(s) } -> std::convertible_to<std::optional<double>>;
  { g.key(s) } -> std::convertible_to<typename G::Key>;
};

namespace detail {

template <class Game>
struct Node {
  std::vector<typename Game::Action> actions;
  std::vector<std::optional<typename Game::State>> children;
  std::vector<double> P;
  std::vector<int> N;
  std::vector<double> W;
  std::vector<double> Q;
  int total_visits = 0;
};

inline std::vector<double> dirichlet(std::size_t n, double alpha, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> eta(n);
  double total = 0.0;
  for (double& x : eta) {
    x = gamma(rng);
    total += x;
  }
  if (!(total > 0.0)) {
    for (double& x : eta) x = 1.0 / static_cast<double>(n);
    return eta;
  }
  for (double& x : eta) x /= total;
  return eta;
}

}  // namespace detail

/// Monte Carlo tree search. Each iteration descends from the root by the
/// upper-confidence rule (argmax prior while a node has no visits), stops at
/// the first unexpanded or terminal state, evaluates it, mixes Dirichlet
/// noise into the new node's prior, and backs the value up the path.
/// Returns the visit-count policy N^(1/tau); with no root visits the noised
/// prior is returned instead.
template <SearchGame Game, class Evaluator>
SearchResult<typename Game::Action> search(const Game& game, const typename Game::State& root,
                                           Evaluator&& evaluate, const SearchOptions& options) {
  using Action = typename Game::Action;
  using State = typename Game::State;
  if (options.iterations < 1) throw std::invalid_argument("MCTS needs at least one iteration");
  if (!(options.temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (game.terminal_value(root)) throw std::invalid_argument("MCTS root state is terminal");

  std::mt19937_64 rng(options.seed);
  std::map<typename Game::Key, detail::Node<Game>> tree;
  SearchResult<Action> result;

  auto expand = [&](const State& s) -> std::pair<detail::Node<Game>*, double> {
    detail::Node<Game> node;
    node.actions = game.actions(s);
    if (node.actions.empty()) throw std::logic_error("nonterminal state without actions");
    const std::span<const Action> view(node.actions);
    Evaluation eval = evaluate(s, view);
    if (eval.priors.size() != node.actions.size()) {
      throw std::logic_error("evaluator prior does not match the action set");
    }
    const std::size_t n = node.actions.size();
    node.P = eval.priors;
    if (options.noise_fraction > 0.0) {
      const auto eta = detail::dirichlet(n, options.dirichlet_alpha, rng);
      for (std::size_t a = 0; a < n; ++a) {
        node.P[a] = (1.0 - options.noise_fraction) * eval.priors[a] +
                    options.noise_fraction * eta[a];
      }
    }
    node.children.resize(n);
    node.N.assign(n, 0);
    node.W.assign(n, 0.0);
    node.Q.assign(n, 0.0);
    auto [it, inserted] = tree.emplace(game.key(s), std::move(node));
    return {&it->second, eval.value};
  };

  for (int iter = 0; iter < options.iterations; ++iter) {
    std::vector<std::pair<detail::Node<Game>*, std::size_t>> path;
    State s = root;
    double value = 0.0;
    bool terminal = false;
    while (true) {
      if (const auto tv = game.terminal_value(s)) {
        value = *tv;
        terminal = true;
        break;
      }
      auto found = tree.find(game.key(s));
      if (found == tree.end()) {
        value = expand(s).second;
        break;
      }
      detail::Node<Game>& node = found->second;
      std::size_t best = 0;
      if (node.total_visits > 0) {
        const double root_n = std::sqrt(static_cast<double>(node.total_visits));
        double best_u = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < node.actions.size(); ++a) {
          const double u = node.Q[a] + node.P[a] * root_n / (1.0 + node.N[a]);
          if (u > best_u) {
            best_u = u;
            best = a;
          }
        }
      } else {
        for (std::size_t a = 1; a < node.actions.size(); ++a) {
          if (node.P[a] > node.P[best]) best = a;
        }
      }
      path.emplace_back(&node, best);
      if (!node.children[best]) node.children[best] = game.next(s, node.actions[best]);
      s = *node.children[best];
    }

    for (auto& [node, a] : path) {
      node->N[a] += 1;
      node->total_visits += 1;
      node->W[a] += value;
      node->Q[a] = node->W[a] / node->N[a];
    }
    if (options.record_trace) {
      TraceEntry entry;
      entry.iteration = iter;
      entry.leaf_value = value;
      entry.terminal = terminal;
      for (const auto& [node, a] : path) entry.path.push_back(a);
      result.trace.push_back(std::move(entry));
    }
  }

  const auto& root_node = tree.at(game.key(root));
  result.actions = root_node.actions;
  result.visits = root_node.N;
  result.values = root_node.W;
  result.prior = root_node.P;
  result.expanded_states = tree.size();
  if (root_node.total_visits == 0) {
    result.policy = root_node.P;
  } else {
    result.policy.resize(root_node.N.size());
    double total = 0.0;
    for (std::size_t a = 0; a < root_node.N.size(); ++a) {
      result.policy[a] = std::pow(static_cast<double>(root_node.N[a]), 1.0 / options.temperature);
      total += result.policy[a];
    }
    for (double& p : result.policy) p /= total;
  }
  return result;
}

}  // namespace seg::mcts
