#include "seg/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace seg {
namespace {

Point to_local(Point p, Point center, double angle) {
  const Point d = p - center;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

double segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
  return norm(p - (a + t * ab));
}

double box_distance(Point q, double hx, double hy) {
  const double dx = std::abs(q.x) - hx;
  const double dy = std::abs(q.y) - hy;
  const double outside = std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
  return outside + std::min(std::max(dx, dy), 0.0);
}

double diamond_distance(Point q, double hx, double hy) {
  const std::array<Point, 4> v{Point{hx, 0.0}, Point{0.0, hy}, Point{-hx, 0.0},
                               Point{0.0, -hy}};
  double d = kLarge;
  for (std::size_t k = 0; k < v.size(); ++k) {
    d = std::min(d, segment_distance(q, v[k], v[(k + 1) % v.size()]));
  }
  const bool inside = std::abs(q.x) / hx + std::abs(q.y) / hy <= 1.0;
  return inside ? -d : d;
}

// Ellipse boundary in the local frame, sampled once per evaluation batch.
struct EllipseSampler {
  explicit EllipseSampler(const Ellipse& e) : ellipse(e) {
    boundary.reserve(kBoundarySamples);
    for (int k = 0; k < kBoundarySamples; ++k) {
      const double t = 2.0 * std::numbers::pi * k / kBoundarySamples;
      boundary.push_back({e.a * std::cos(t), e.b * std::sin(t)});
    }
  }

  double operator()(Point p) const {
    const Point q = to_local(p, ellipse.center, ellipse.angle);
    double best2 = kLarge;
    for (const Point& b : boundary) {
      const double dx = q.x - b.x;
      const double dy = q.y - b.y;
      best2 = std::min(best2, dx * dx + dy * dy);
    }
    const double d = std::sqrt(best2);
    const double r = (q.x / ellipse.a) * (q.x / ellipse.a) +
                     (q.y / ellipse.b) * (q.y / ellipse.b);
    return r <= 1.0 ? -d : d;
  }

  Ellipse ellipse;
  std::vector<Point> boundary;
};

double closed_form_distance(const Shape& shape, Point p) {
  return std::visit(
      [p](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return norm(p - s.center) - s.radius;
        } else if constexpr (std::is_same_v<T, Rectangle>) {
          return box_distance(to_local(p, s.center, s.angle), s.half_x, s.half_y);
        } else if constexpr (std::is_same_v<T, Diamond>) {
          return diamond_distance(to_local(p, s.center, s.angle), s.half_x, s.half_y);
        } else {
          return EllipseSampler(s)(p);
        }
      },
      shape);
}

}  // namespace

double shape_signed_distance(const Shape& shape, Point p) {
  return closed_form_distance(shape, p);
}

bool shape_contains(const Shape& shape, Point p) {
  return std::visit(
      [p](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return norm(p - s.center) <= s.radius;
        } else {
          const Point q = to_local(p, s.center, s.angle);
          if constexpr (std::is_same_v<T, Ellipse>) {
            return (q.x / s.a) * (q.x / s.a) + (q.y / s.b) * (q.y / s.b) <= 1.0;
          } else if constexpr (std::is_same_v<T, Rectangle>) {
            return std::abs(q.x) <= s.half_x && std::abs(q.y) <= s.half_y;
          } else {
            return std::abs(q.x) / s.half_x + std::abs(q.y) / s.half_y <= 1.0;
          }
        }
      },
      shape);
}

ScalarField signed_distance(const Scene& scene, const Grid2D& grid) {
  ScalarField phi(grid, kLarge);
  for (const Shape& shape : scene.shapes) {
    if (const auto* e = std::get_if<Ellipse>(&shape)) {
      const EllipseSampler sampler(*e);
      for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        phi[idx] = std::min(phi[idx], sampler(grid.center(grid.cell(idx))));
      }
    } else {
      for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        phi[idx] = std::min(phi[idx],
                            closed_form_distance(shape, grid.center(grid.cell(idx))));
      }
    }
  }
  return phi;
}

namespace {

struct SweepOrder {
  int i_begin, i_end, i_step;
  int j_begin, j_end, j_step;
};

std::array<SweepOrder, 4> sweep_orders(int m) {
  return {{{0, m, 1, 0, m, 1},
           {m - 1, -1, -1, 0, m, 1},
           {m - 1, -1, -1, m - 1, -1, -1},
           {0, m, 1, m - 1, -1, -1}}};
}

double four_point_update(const ScalarField& t, int m, int i, int j, double step) {
  const auto at = [&](int a, int b) {
    if (a < 0 || b < 0 || a >= m || b >= m) return kLarge;
    return t(Cell{a, b});
  };
  const double a = std::min(at(i - 1, j), at(i + 1, j));
  const double b = std::min(at(i, j - 1), at(i, j + 1));
  if (std::min(a, b) >= kLarge) return kLarge;
  if (std::abs(a - b) >= step) return std::min(a, b) + step;
  return 0.5 * (a + b + std::sqrt(2.0 * step * step - (a - b) * (a - b)));
}

double eight_point_update(const ScalarField& t, int m, int i, int j, double step) {
  const auto at = [&](int a, int b) {
    if (a < 0 || b < 0 || a >= m || b >= m) return kLarge;
    return t(Cell{a, b});
  };
  constexpr std::array<std::array<int, 2>, 4> kAxes{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  const double diag_step = std::numbers::sqrt2 * step;
  const double limit = step / std::numbers::sqrt2;
  double best = kLarge;
  for (const auto& ax : kAxes) {
    const double ta = at(i + ax[0], j + ax[1]);
    if (ta < kLarge) best = std::min(best, ta + step);
    // The two diagonals flanking this axis direction.
    for (int side : {-1, 1}) {
      const int di = ax[0] != 0 ? ax[0] : side;
      const int dj = ax[1] != 0 ? ax[1] : side;
      const double td = at(i + di, j + dj);
      if (td >= kLarge) continue;
      best = std::min(best, td + diag_step);
      const double delta = ta - td;
      if (ta < kLarge && delta >= 0.0 && delta <= limit) {
        best = std::min(best, ta + std::sqrt(step * step - delta * delta));
      }
    }
  }
  return best;
}

}  // namespace

ScalarField solve_eikonal(const ScalarField& speed, std::span<const Cell> sources,
                          const EikonalOptions& options) {
  const Grid2D& grid = speed.grid();
  if (sources.empty()) {
    throw std::invalid_argument("eikonal solve needs at least one source cell");
  }
  for (double v : speed.values()) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("eikonal speed must be positive and finite");
    }
  }
  ScalarField t(grid, kLarge);
  std::vector<char> fixed(grid.size(), 0);
  for (const Cell& c : sources) {
    if (!grid.contains(c)) {
      throw std::invalid_argument("eikonal source outside the grid");
    }
    t(c) = 0.0;
    fixed[grid.index(c)] = 1;
  }

  const int m = grid.m();
  const double h = grid.h();
  const auto orders = sweep_orders(m);
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const SweepOrder& o = orders[static_cast<std::size_t>(sweep % 4)];
    double max_change = 0.0;
    for (int i = o.i_begin; i != o.i_end; i += o.i_step) {
      for (int j = o.j_begin; j != o.j_end; j += o.j_step) {
        const std::size_t idx = grid.index(Cell{i, j});
        if (fixed[idx]) continue;
        const double step = h / speed[idx];
        const double candidate =
            options.stencil == EikonalStencil::kFourPoint
                ? four_point_update(t, m, i, j, step)
                : eight_point_update(t, m, i, j, step);
        if (candidate < t[idx]) {
          max_change = std::max(max_change, t[idx] >= kLarge ? kLarge : t[idx] - candidate);
          t[idx] = candidate;
        }
      }
    }
    if (max_change < options.tolerance) break;
  }
  return t;
}

double regularized_speed(double raw_speed, double phi, double epsilon, double v_min) {
  if (phi > 0.0) return raw_speed;
  if (phi < -2.0 * epsilon) return v_min;
  return v_min + 0.5 * (raw_speed - v_min) *
                     (std::cos(phi * std::numbers::pi / (2.0 * epsilon)) + 1.0);
}

ScalarField regularize_speed(double raw_speed, const ScalarField& phi, double epsilon,
                             double v_min) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("regularization width must be positive");
  }
  if (!(v_min > 0.0) || !(v_min < raw_speed)) {
    throw std::invalid_argument("need 0 < v_min < raw speed");
  }
  ScalarField out(phi.grid());
  for (std::size_t idx = 0; idx < phi.size(); ++idx) {
    out[idx] = regularized_speed(raw_speed, phi[idx], epsilon, v_min);
  }
  return out;
}

ScalarField regularize_speed(double raw_speed, const ScalarField& phi) {
  return regularize_speed(raw_speed, phi, kDefaultEpsilonCells * phi.grid().h(),
                          kDefaultMinSpeed);
}

ScalarField obstacle_speed(double raw_speed, const ScalarField& phi, double v_min) {
  ScalarField out(phi.grid());
  for (std::size_t idx = 0; idx < phi.size(); ++idx) {
    out[idx] = phi[idx] > 0.0 ? raw_speed : v_min;
  }
  return out;
}

}  // namespace seg
