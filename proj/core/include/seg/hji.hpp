#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seg/geometry.hpp"
#include "seg/grid.hpp"
#include "seg/scene.hpp"
#include "seg/visibility.hpp"

namespace seg {

// sgnmax(a, b): a+ when a+ >= b-, otherwise -b-.
double sgnmax(double a, double b);

/// Lattice index of a (pursuer cell, evader cell) pair.
struct Index4 {
  int i = 0;  // pursuer x
  int j = 0;  // pursuer y
  int k = 0;  // evader x
  int l = 0;  // evader y
};

/// V over all pursuer x evader cell pairs, stored densely in (i,j,k,l)
/// row-major order, plus the solve metadata that goes into dumps.
class ValueFunction4D {
 public:
  explicit ValueFunction4D(Grid2D grid, double fill = 0.0);

  const Grid2D& grid() const { return grid_; }
  int m() const { return grid_.m(); }
  std::size_t size() const { return values_.size(); }

  std::size_t index(const Index4& q) const {
    const auto m = static_cast<std::size_t>(grid_.m());
    return ((static_cast<std::size_t>(q.i) * m + q.j) * m + q.k) * m + q.l;
  }
  std::size_t index(Cell pursuer, Cell evader) const {
    return index({pursuer.i, pursuer.j, evader.i, evader.j});
  }

  double operator()(const Index4& q) const { return values_[index(q)]; }
  double& operator()(const Index4& q) { return values_[index(q)]; }
  double operator[](std::size_t idx) const { return values_[idx]; }
  double& operator[](std::size_t idx) { return values_[idx]; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  // Metadata.
  double horizon = 0.0;
  double dt = 0.0;
  std::int64_t iterations = 0;
  double pursuer_speed = 0.0;
  double evader_speed = 0.0;
  std::string scene_hash;
  double last_change = 0.0;

  double elapsed() const { return static_cast<double>(iterations) * dt; }

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

struct HjiOptions {
  double horizon = 10.0;
  // Zero selects h / (16 max(f_P, f_E)).
  double dt = 0.0;
  double stop_tolerance = 1e-5;
  double epsilon_cells = kDefaultEpsilonCells;
  double v_min = kDefaultMinSpeed;
  AuxiliaryBase auxiliary = AuxiliaryBase::kVisibility;
  // m^4 doubles are allocated; larger grids need an explicit override.
  int max_cells_per_side = 32;
  // Called after every step with the step count and the L1 change.
  std::function<void(std::int64_t, double)> on_step;
};

/// Everything the explicit scheme needs besides V itself: occluder,
/// regularized speed fields, free-cell mask and the precomputed end-game set.
class HjiProblem {
 public:
  HjiProblem(const Scene& scene, const Grid2D& grid, const HjiOptions& options = {});

  const Grid2D& grid() const { return grid_; }
  const ScalarField& phi() const { return phi_; }
  const ScalarField& pursuer_speed() const { return pursuer_speed_; }
  const ScalarField& evader_speed() const { return evader_speed_; }
  double raw_pursuer_speed() const { return raw_pursuer_; }
  double raw_evader_speed() const { return raw_evader_; }
  const std::string& scene_hash() const { return scene_hash_; }

  bool is_free(Cell c) const { return phi_(c) > 0.0; }
  bool is_terminal(std::size_t index4) const { return terminal_[index4] != 0; }
  bool is_terminal(Cell pursuer, Cell evader) const;
  std::size_t terminal_count() const;

  // Largest admissible time step: h / (16 max(f_P, f_E)).
  double cfl_limit() const;

 private:
  Grid2D grid_;
  double raw_pursuer_;
  double raw_evader_;
  ScalarField phi_;
  ScalarField pursuer_speed_;
  ScalarField evader_speed_;
  std::vector<char> terminal_;
  std::string scene_hash_;
};

struct GradientNorms {
  double pursuer = 0.0;
  double evader = 0.0;
};

/// Upwind gradient components at one lattice index: pursuer axes use
/// sgnmax(forward, backward), evader axes sgnmax(backward, forward). Grid
/// edges replicate the boundary value (zero one-sided difference).
struct UpwindGradient {
  Point pursuer;
  Point evader;
};

UpwindGradient upwind_gradient(const ValueFunction4D& v, const Index4& q);
GradientNorms upwind_gradient_norms(const ValueFunction4D& v, const Index4& q);

/// One explicit step V + dt (1 + f_P |grad_P V| - f_E |grad_E V|); end-game
/// indices are re-pinned to 0. Throws when dt violates the CFL bound.
ValueFunction4D step_value(const HjiProblem& problem, const ValueFunction4D& v, double dt);

/// Iterates step_value from V = 0 until the horizon or until the per-step
/// L1 change (h^4-weighted over free-free pairs) drops below stop_tolerance.
ValueFunction4D solve_value_function(const HjiProblem& problem, const HjiOptions& options);
ValueFunction4D solve_value_function(const Scene& scene, const Grid2D& grid,
                                     const HjiOptions& options);

/// Value with obstacle-interior indices reported as kLarge.
std::vector<double> reported_values(const HjiProblem& problem, const ValueFunction4D& v);

struct Controls {
  Point pursuer;  // unit vector or zero
  Point evader;
};

// Controls at a lattice node; a gradient norm below 1e-9 gives a zero control.
Controls optimal_controls(const ValueFunction4D& v, const Index4& q);
// Controls at continuous positions from multilinearly interpolated gradients.
Controls optimal_controls(const ValueFunction4D& v, Point pursuer, Point evader);

struct WinningRegions {
  std::vector<char> pursuer_wins;  // per 4-D index
  std::vector<char> evader_wins;
  double threshold = 0.0;
};

/// Pursuer wins where V > 0.9 T, evader wins where V <= 0.9 T; both masks
/// cover free-free indices only.
WinningRegions winning_regions(const HjiProblem& problem, const ValueFunction4D& v,
                               double horizon);

// V(x_P fixed, .) and V(., x_E fixed) as 2-D fields.
ScalarField slice_fixed_pursuer(const ValueFunction4D& v, Cell pursuer);
ScalarField slice_fixed_evader(const ValueFunction4D& v, Cell evader);

enum class Outcome { kPursuerWin, kEvaderWin, kUndecided };
std::string to_string(Outcome outcome);

struct TrajectorySample {
  double time = 0.0;
  Point pursuer;
  Point evader;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  Outcome outcome = Outcome::kUndecided;
  double end_time = 0.0;
};

/// Euler integration of both players under the optimal feedback controls.
/// Stops at the end-game set, at the value function's horizon, or after
/// max_steps. Throws if either start lies inside an obstacle.
Trajectory play_hji_trajectory(const HjiProblem& problem, const ValueFunction4D& v,
                               Point pursuer_start, Point evader_start, double dt,
                               int max_steps);

// ---------------------------------------------------------------------------
// Stationary pursuer (f_P = 0): the 4-D scheme restricted to one pursuer
// position is a time-dependent eikonal iteration on the evader's grid.

struct StationaryOptions {
  // Zero selects h / 20.
  double dt = 0.0;
  double stop_tolerance = 1e-5;
  double max_time = 100.0;
  double epsilon_cells = kDefaultEpsilonCells;
  double v_min = kDefaultMinSpeed;
  AuxiliaryBase auxiliary = AuxiliaryBase::kVisibility;
};

struct StationarySolution {
  ScalarField value;
  std::vector<char> terminal;
  std::int64_t iterations = 0;
  double last_change = 0.0;
  std::vector<double> change_log;
};

/// Single evader-grid step V + dt (1 - f_E |grad_E V|) with terminal cells
/// pinned to 0, bitwise identical to step_value on one pursuer slab when
/// f_P = 0.
ScalarField stationary_step(const ScalarField& v, const ScalarField& evader_speed,
                            const std::vector<char>& terminal, double dt);

StationarySolution solve_stationary_pursuer(const ScalarField& phi, Point pursuer,
                                            double evader_speed,
                                            const StationaryOptions& options = {});

}  // namespace seg
