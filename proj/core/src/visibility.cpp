#include "seg/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>

namespace seg {

double segment_min(const ScalarField& field, Point from, Point to) {
  const double step = 0.5 * field.grid().h();
  const double length = norm(to - from);
  const int n = std::max(1, static_cast<int>(std::ceil(length / step)));
  double best = field.sample(from);
  for (int k = 1; k <= n; ++k) {
    const double r = static_cast<double>(k) / n;
    best = std::min(best, field.sample(from + r * (to - from)));
  }
  return best;
}

namespace {

void require_free_vantage(const ScalarField& phi, Point vantage) {
  if (!(phi.sample(vantage) > 0.0)) {
    throw std::invalid_argument("vantage point (" + std::to_string(vantage.x) + ", " +
                                std::to_string(vantage.y) + ") is inside an obstacle");
  }
}

ScalarField visibility_unchecked(const ScalarField& phi, Point vantage) {
  const Grid2D& grid = phi.grid();
  ScalarField psi(grid);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    psi[idx] = segment_min(phi, vantage, grid.center(grid.cell(idx)));
  }
  return psi;
}

}  // namespace

ScalarField visibility_field(const ScalarField& phi, Point vantage) {
  require_free_vantage(phi, vantage);
  return visibility_unchecked(phi, vantage);
}

ScalarField visibility_field(const ScalarField& phi, Cell vantage) {
  return visibility_field(phi, phi.grid().center(vantage));
}

ScalarField grazing_field(const ScalarField& phi, Point vantage) {
  const Grid2D& grid = phi.grid();
  const int m = grid.m();
  const double h = grid.h();
  ScalarField g(grid);
  auto derivative = [&](Cell c, int di, int dj) {
    const Cell lo{c.i - di, c.j - dj};
    const Cell hi{c.i + di, c.j + dj};
    const bool has_lo = grid.contains(lo);
    const bool has_hi = grid.contains(hi);
    if (has_lo && has_hi) return (phi(hi) - phi(lo)) / (2.0 * h);
    if (has_hi) return (phi(hi) - phi(c)) / h;
    return (phi(c) - phi(lo)) / h;
  };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const Cell c{i, j};
      const Point grad{derivative(c, 1, 0), derivative(c, 0, 1)};
      g(c) = dot(vantage - grid.center(c), grad);
    }
  }
  return g;
}

VantageFields vantage_fields(const ScalarField& phi, Point vantage, AuxiliaryBase base) {
  require_free_vantage(phi, vantage);
  const Grid2D& grid = phi.grid();
  ScalarField psi = visibility_unchecked(phi, vantage);
  ScalarField g = grazing_field(phi, vantage);

  const ScalarField& first = base == AuxiliaryBase::kVisibility ? psi : phi;
  ScalarField aux(grid);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    aux[idx] = std::max(first[idx], g[idx]);
  }
  ScalarField aux_vis(grid);
  ScalarField xi(grid);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    aux_vis[idx] = segment_min(aux, grid.center(grid.cell(idx)), vantage);
    xi[idx] = std::max(aux_vis[idx], -phi[idx]);
  }
  return {vantage, phi, std::move(psi), std::move(g), std::move(aux), std::move(aux_vis),
          std::move(xi)};
}

ScalarField shadow_field(const ScalarField& phi, Point vantage, AuxiliaryBase base) {
  return std::move(vantage_fields(phi, vantage, base).shadow);
}

ScalarField shadow_field(const ScalarField& phi, Cell vantage, AuxiliaryBase base) {
  return shadow_field(phi, phi.grid().center(vantage), base);
}

ShadowCache::ShadowCache(std::shared_ptr<const ScalarField> phi, AuxiliaryBase base)
    : phi_(std::move(phi)), base_(base) {
  if (!phi_) throw std::invalid_argument("shadow cache needs an occluder field");
}

const ScalarField& ShadowCache::shadow(Cell vantage) const {
  {
    std::shared_lock lock(mutex_);
    if (auto it = fields_.find(vantage); it != fields_.end()) return *it->second;
  }
  auto field = std::make_unique<const ScalarField>(shadow_field(*phi_, vantage, base_));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = fields_.try_emplace(vantage, std::move(field));
  return *it->second;
}

std::size_t ShadowCache::size() const {
  std::shared_lock lock(mutex_);
  return fields_.size();
}

bool is_end_game(const ShadowCache& cache, std::span<const Cell> pursuers,
                 std::span<const Cell> evaders) {
  for (const Cell& e : evaders) {
    const bool hidden = std::all_of(pursuers.begin(), pursuers.end(), [&](const Cell& p) {
      return cache.shadow(p)(e) <= 0.0;
    });
    if (hidden) return true;
  }
  return false;
}

std::vector<char> joint_shadow_mask(const ShadowCache& cache,
                                    std::span<const Cell> pursuers) {
  const ScalarField& phi = cache.phi();
  std::vector<char> mask(phi.size(), 0);
  for (std::size_t idx = 0; idx < phi.size(); ++idx) mask[idx] = phi[idx] > 0.0;
  for (const Cell& p : pursuers) {
    const ScalarField& xi = cache.shadow(p);
    for (std::size_t idx = 0; idx < phi.size(); ++idx) {
      mask[idx] = mask[idx] && xi[idx] <= 0.0;
    }
  }
  return mask;
}

}  // namespace seg
