#include "seg/hji.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

namespace seg {

double sgnmax(double a, double b) {
  const double a_plus = std::max(0.0, a);
  const double b_minus = -std::min(0.0, b);
  return std::max(a_plus, b_minus) == a_plus ? a_plus : -b_minus;
}

namespace {

constexpr double kZeroGradient = 1e-9;
constexpr double kWinFraction = 0.9;

// Forward and backward differences along one axis; a missing neighbour
// replicates the centre value.
struct AxisDiffs {
  double forward;
  double backward;
};

inline AxisDiffs axis_diffs(const double* p, std::ptrdiff_t stride, int pos, int m,
                            double inv_h) {
  const double fwd = pos + 1 < m ? (p[stride] - p[0]) * inv_h : 0.0;
  const double bwd = pos > 0 ? (p[0] - p[-stride]) * inv_h : 0.0;
  return {fwd, bwd};
}

// Pursuer maximizes: upwind toward larger neighbours.
inline Point pursuer_components(const double* p, std::ptrdiff_t stride_i,
                                std::ptrdiff_t stride_j, int i, int j, int m,
                                double inv_h) {
  const AxisDiffs dx = axis_diffs(p, stride_i, i, m, inv_h);
  const AxisDiffs dy = axis_diffs(p, stride_j, j, m, inv_h);
  return {sgnmax(dx.forward, dx.backward), sgnmax(dy.forward, dy.backward)};
}

// Evader minimizes: upwind toward smaller neighbours.
inline Point evader_components(const double* p, std::ptrdiff_t stride_k,
                               std::ptrdiff_t stride_l, int k, int l, int m,
                               double inv_h) {
  const AxisDiffs dx = axis_diffs(p, stride_k, k, m, inv_h);
  const AxisDiffs dy = axis_diffs(p, stride_l, l, m, inv_h);
  return {sgnmax(dx.backward, dx.forward), sgnmax(dy.backward, dy.forward)};
}

inline double length(Point g) { return std::sqrt(g.x * g.x + g.y * g.y); }

// Evader-grid update shared by the 4-D slab kernel and the stationary solver.
inline double evader_norm(const double* slab, int k, int l, int m, double inv_h) {
  const double* p = slab + static_cast<std::ptrdiff_t>(k) * m + l;
  return length(evader_components(p, m, 1, k, l, m, inv_h));
}

ScalarField speed_field(double raw, const ScalarField& phi, double eps_cells,
                        double v_min) {
  if (raw == 0.0) return ScalarField(phi.grid(), 0.0);
  if (raw <= v_min) return ScalarField(phi.grid(), raw);
  return regularize_speed(raw, phi, eps_cells * phi.grid().h(), v_min);
}

void check_cfl(const HjiProblem& problem, double dt) {
  if (!(dt > 0.0) || dt > problem.cfl_limit() * (1.0 + 1e-12)) {
    throw std::invalid_argument("time step " + std::to_string(dt) +
                                " violates the CFL bound " +
                                std::to_string(problem.cfl_limit()));
  }
}

// Updates every evader index of pursuer slab (i, j); returns the unweighted
// L1 change over free-free indices.
double step_slab(const HjiProblem& problem, const std::vector<double>& in,
                 std::vector<double>& out, int i, int j, double dt) {
  const Grid2D& grid = problem.grid();
  const int m = grid.m();
  const double inv_h = 1.0 / grid.h();
  const auto mm = static_cast<std::ptrdiff_t>(m);
  const std::ptrdiff_t stride_i = mm * mm * mm;
  const std::ptrdiff_t stride_j = mm * mm;
  const std::size_t slab_begin = (static_cast<std::size_t>(i) * m + j) * m * m;
  const double* slab = in.data() + slab_begin;
  const double fp = problem.pursuer_speed()(Cell{i, j});
  const bool pursuer_free = problem.is_free(Cell{i, j});
  const ScalarField& fe_field = problem.evader_speed();
  double l1 = 0.0;
  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) {
      const std::size_t local = static_cast<std::size_t>(k) * m + l;
      const std::size_t idx = slab_begin + local;
      if (problem.is_terminal(idx)) {
        out[idx] = 0.0;
      } else {
        const double* p = slab + local;
        const double np = length(pursuer_components(p, stride_i, stride_j, i, j, m, inv_h));
        const double ne = evader_norm(slab, k, l, m, inv_h);
        const double fe = fe_field[local];
        out[idx] = in[idx] + dt * (1.0 + fp * np - fe * ne);
      }
      if (pursuer_free && problem.phi()[local] > 0.0) {
        l1 += std::abs(out[idx] - in[idx]);
      }
    }
  }
  return l1;
}

double step_all(const HjiProblem& problem, const std::vector<double>& in,
                std::vector<double>& out, double dt) {
  const int m = problem.grid().m();
  std::vector<double> partial(static_cast<std::size_t>(m) * m, 0.0);
  tbb::parallel_for(tbb::blocked_range<int>(0, m * m), [&](const tbb::blocked_range<int>& r) {
    for (int s = r.begin(); s != r.end(); ++s) {
      partial[static_cast<std::size_t>(s)] = step_slab(problem, in, out, s / m, s % m, dt);
    }
  });
  // Fixed-order reduction keeps the result independent of the worker count.
  double l1 = 0.0;
  for (double x : partial) l1 += x;
  const double h = problem.grid().h();
  return l1 * h * h * h * h;
}

}  // namespace

ValueFunction4D::ValueFunction4D(Grid2D grid, double fill)
    : grid_(grid),
      values_(static_cast<std::size_t>(grid.m()) * grid.m() * grid.m() * grid.m(), fill) {}

HjiProblem::HjiProblem(const Scene& scene, const Grid2D& grid, const HjiOptions& options)
    : grid_(grid),
      raw_pursuer_(scene.pursuer_speed),
      raw_evader_(scene.evader_speed),
      phi_(signed_distance(scene, grid)),
      pursuer_speed_(grid),
      evader_speed_(grid),
      scene_hash_(seg::scene_hash(scene)) {
  if (grid.m() > options.max_cells_per_side) {
    throw std::invalid_argument("grid m = " + std::to_string(grid.m()) +
                                " exceeds the 4-D limit of " +
                                std::to_string(options.max_cells_per_side));
  }
  if (!(raw_pursuer_ >= 0.0) || !(raw_evader_ > 0.0)) {
    throw std::invalid_argument("speeds must be f_P >= 0 and f_E > 0");
  }
  pursuer_speed_ = speed_field(raw_pursuer_, phi_, options.epsilon_cells, options.v_min);
  evader_speed_ = speed_field(raw_evader_, phi_, options.epsilon_cells, options.v_min);

  const std::size_t n2 = grid.size();
  terminal_.assign(n2 * n2, 0);
  auto phi_ptr = std::make_shared<const ScalarField>(phi_);
  tbb::parallel_for(std::size_t{0}, n2, [&](std::size_t p) {
    const Cell pc = grid_.cell(p);
    if (!(phi_[p] > 0.0)) return;
    const ScalarField xi = shadow_field(*phi_ptr, pc, options.auxiliary);
    for (std::size_t e = 0; e < n2; ++e) {
      terminal_[p * n2 + e] = (phi_[e] > 0.0 && xi[e] <= 0.0) ? 1 : 0;
    }
  });
}

bool HjiProblem::is_terminal(Cell pursuer, Cell evader) const {
  return terminal_[grid_.index(pursuer) * grid_.size() + grid_.index(evader)] != 0;
}

std::size_t HjiProblem::terminal_count() const {
  return static_cast<std::size_t>(std::count(terminal_.begin(), terminal_.end(), 1));
}

double HjiProblem::cfl_limit() const {
  return grid_.h() / (16.0 * std::max(raw_pursuer_, raw_evader_));
}

UpwindGradient upwind_gradient(const ValueFunction4D& v, const Index4& q) {
  const int m = v.m();
  const double inv_h = 1.0 / v.grid().h();
  const auto mm = static_cast<std::ptrdiff_t>(m);
  const double* p = v.values().data() + v.index(q);
  return {pursuer_components(p, mm * mm * mm, mm * mm, q.i, q.j, m, inv_h),
          evader_components(p, mm, 1, q.k, q.l, m, inv_h)};
}

GradientNorms upwind_gradient_norms(const ValueFunction4D& v, const Index4& q) {
  const UpwindGradient g = upwind_gradient(v, q);
  return {length(g.pursuer), length(g.evader)};
}

ValueFunction4D step_value(const HjiProblem& problem, const ValueFunction4D& v, double dt) {
  check_cfl(problem, dt);
  if (!(v.grid() == problem.grid())) {
    throw std::invalid_argument("value function grid does not match the problem");
  }
  ValueFunction4D out = v;
  out.last_change = step_all(problem, v.values(), out.values(), dt);
  out.iterations = v.iterations + 1;
  out.dt = dt;
  return out;
}

ValueFunction4D solve_value_function(const HjiProblem& problem, const HjiOptions& options) {
  const double dt = options.dt > 0.0 ? options.dt : problem.cfl_limit();
  check_cfl(problem, dt);
  if (options.horizon < 0.0) throw std::invalid_argument("horizon must be nonnegative");

  ValueFunction4D v(problem.grid(), 0.0);
  v.horizon = options.horizon;
  v.dt = dt;
  v.pursuer_speed = problem.raw_pursuer_speed();
  v.evader_speed = problem.raw_evader_speed();
  v.scene_hash = problem.scene_hash();

  const auto steps = static_cast<std::int64_t>(std::ceil(options.horizon / dt - 1e-9));
  std::vector<double> next(v.size());
  for (std::int64_t n = 0; n < steps; ++n) {
    const double change = step_all(problem, v.values(), next, dt);
    v.values().swap(next);
    v.iterations = n + 1;
    v.last_change = change;
    if (options.on_step) options.on_step(n + 1, change);
    if (change < options.stop_tolerance) break;
  }
  return v;
}

ValueFunction4D solve_value_function(const Scene& scene, const Grid2D& grid,
                                     const HjiOptions& options) {
  const HjiProblem problem(scene, grid, options);
  return solve_value_function(problem, options);
}

std::vector<double> reported_values(const HjiProblem& problem, const ValueFunction4D& v) {
  std::vector<double> out = v.values();
  const std::size_t n2 = problem.grid().size();
  for (std::size_t p = 0; p < n2; ++p) {
    for (std::size_t e = 0; e < n2; ++e) {
      if (!(problem.phi()[p] > 0.0) || !(problem.phi()[e] > 0.0)) out[p * n2 + e] = kLarge;
    }
  }
  return out;
}

namespace {

Point normalized(Point g) {
  const double n = length(g);
  if (n < kZeroGradient) return {0.0, 0.0};
  return {g.x / n, g.y / n};
}

}  // namespace

Controls optimal_controls(const ValueFunction4D& v, const Index4& q) {
  const UpwindGradient g = upwind_gradient(v, q);
  const Point e = normalized(g.evader);
  return {normalized(g.pursuer), {-e.x, -e.y}};
}

Controls optimal_controls(const ValueFunction4D& v, Point pursuer, Point evader) {
  const int m = v.m();
  const double h = v.grid().h();
  const std::array<double, 4> coord{pursuer.x / h - 0.5, pursuer.y / h - 0.5,
                                    evader.x / h - 0.5, evader.y / h - 0.5};
  std::array<int, 4> base{};
  std::array<double, 4> frac{};
  for (std::size_t d = 0; d < 4; ++d) {
    const double u = std::clamp(coord[d], 0.0, m - 1.0);
    base[d] = std::min(static_cast<int>(u), m - 2);
    frac[d] = u - base[d];
  }
  Point gp{0.0, 0.0};
  Point ge{0.0, 0.0};
  for (int corner = 0; corner < 16; ++corner) {
    double w = 1.0;
    std::array<int, 4> idx{};
    for (std::size_t d = 0; d < 4; ++d) {
      const int bit = (corner >> d) & 1;
      idx[d] = base[d] + bit;
      w *= bit ? frac[d] : 1.0 - frac[d];
    }
    if (w == 0.0) continue;
    const UpwindGradient g = upwind_gradient(v, {idx[0], idx[1], idx[2], idx[3]});
    gp = gp + w * g.pursuer;
    ge = ge + w * g.evader;
  }
  const Point e = normalized(ge);
  return {normalized(gp), {-e.x, -e.y}};
}

WinningRegions winning_regions(const HjiProblem& problem, const ValueFunction4D& v,
                               double horizon) {
  WinningRegions out;
  out.threshold = kWinFraction * horizon;
  out.pursuer_wins.assign(v.size(), 0);
  out.evader_wins.assign(v.size(), 0);
  const std::size_t n2 = problem.grid().size();
  for (std::size_t p = 0; p < n2; ++p) {
    if (!(problem.phi()[p] > 0.0)) continue;
    for (std::size_t e = 0; e < n2; ++e) {
      if (!(problem.phi()[e] > 0.0)) continue;
      const std::size_t idx = p * n2 + e;
      if (v[idx] > out.threshold) {
        out.pursuer_wins[idx] = 1;
      } else {
        out.evader_wins[idx] = 1;
      }
    }
  }
  return out;
}

ScalarField slice_fixed_pursuer(const ValueFunction4D& v, Cell pursuer) {
  const Grid2D& grid = v.grid();
  ScalarField out(grid);
  for (std::size_t e = 0; e < grid.size(); ++e) out[e] = v[v.index(pursuer, grid.cell(e))];
  return out;
}

ScalarField slice_fixed_evader(const ValueFunction4D& v, Cell evader) {
  const Grid2D& grid = v.grid();
  ScalarField out(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) out[p] = v[v.index(grid.cell(p), evader)];
  return out;
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kPursuerWin:
      return "pursuer-win";
    case Outcome::kEvaderWin:
      return "evader-win";
    case Outcome::kUndecided:
      break;
  }
  return "undecided";
}

Trajectory play_hji_trajectory(const HjiProblem& problem, const ValueFunction4D& v,
                               Point pursuer_start, Point evader_start, double dt,
                               int max_steps) {
  const ScalarField& phi = problem.phi();
  const Grid2D& grid = problem.grid();
  if (!(phi(grid.locate(pursuer_start)) > 0.0) || !(phi(grid.locate(evader_start)) > 0.0)) {
    throw std::invalid_argument("trajectory start lies inside an obstacle");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("playback time step must be positive");

  const auto clamp_domain = [](Point p) {
    constexpr double kEdge = 1.0 - 1e-9;
    return Point{std::clamp(p.x, 0.0, kEdge), std::clamp(p.y, 0.0, kEdge)};
  };
  const auto terminal = [&](Point xp, Point xe) {
    return problem.is_terminal(grid.locate(xp), grid.locate(xe));
  };

  Trajectory traj;
  Point xp = pursuer_start;
  Point xe = evader_start;
  double t = 0.0;
  traj.samples.push_back({t, xp, xe});
  if (terminal(xp, xe)) {
    traj.outcome = Outcome::kEvaderWin;
    return traj;
  }
  for (int step = 0; step < max_steps; ++step) {
    const Controls c = optimal_controls(v, xp, xe);
    const double fp = problem.pursuer_speed().sample(xp);
    const double fe = problem.evader_speed().sample(xe);
    xp = clamp_domain(xp + (dt * fp) * c.pursuer);
    xe = clamp_domain(xe + (dt * fe) * c.evader);
    t += dt;
    traj.samples.push_back({t, xp, xe});
    if (terminal(xp, xe)) {
      traj.outcome = Outcome::kEvaderWin;
      break;
    }
    if (t >= v.horizon - 1e-12) {
      traj.outcome = Outcome::kPursuerWin;
      break;
    }
  }
  traj.end_time = t;
  return traj;
}

ScalarField stationary_step(const ScalarField& v, const ScalarField& evader_speed,
                            const std::vector<char>& terminal, double dt) {
  const Grid2D& grid = v.grid();
  const int m = grid.m();
  const double inv_h = 1.0 / grid.h();
  ScalarField out(grid);
  const double* slab = v.values().data();
  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) {
      const std::size_t idx = static_cast<std::size_t>(k) * m + l;
      if (terminal[idx]) {
        out[idx] = 0.0;
        continue;
      }
      const double ne = evader_norm(slab, k, l, m, inv_h);
      out[idx] = v[idx] + dt * (1.0 - evader_speed[idx] * ne);
    }
  }
  return out;
}

StationarySolution solve_stationary_pursuer(const ScalarField& phi, Point pursuer,
                                            double evader_speed,
                                            const StationaryOptions& options) {
  const Grid2D& grid = phi.grid();
  const double h = grid.h();
  const double dt = options.dt > 0.0 ? options.dt : h / 20.0;
  if (dt > h / (16.0 * evader_speed) * (1.0 + 1e-12)) {
    throw std::invalid_argument("time step violates the CFL bound");
  }
  const ScalarField speed =
      regularize_speed(evader_speed, phi, options.epsilon_cells * h, options.v_min);
  const ScalarField xi = shadow_field(phi, pursuer, options.auxiliary);
  std::vector<char> terminal(grid.size(), 0);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    terminal[idx] = (phi[idx] > 0.0 && xi[idx] <= 0.0) ? 1 : 0;
  }

  StationarySolution sol{ScalarField(grid, 0.0), terminal, 0, 0.0, {}};
  const auto steps = static_cast<std::int64_t>(std::ceil(options.max_time / dt - 1e-9));
  for (std::int64_t n = 0; n < steps; ++n) {
    ScalarField next = stationary_step(sol.value, speed, terminal, dt);
    double l1 = 0.0;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
      if (phi[idx] > 0.0) l1 += std::abs(next[idx] - sol.value[idx]);
    }
    l1 *= h * h;
    sol.value = std::move(next);
    sol.iterations = n + 1;
    sol.last_change = l1;
    sol.change_log.push_back(l1);
    if (l1 < options.stop_tolerance) break;
  }
  return sol;
}

}  // namespace seg
