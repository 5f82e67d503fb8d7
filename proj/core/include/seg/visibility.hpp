#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <span>

#include "seg/grid.hpp"

namespace seg {

// Which field the auxiliary function takes its max with. The visibility
// variant reproduces the usual shadow panels; the occluder variant is kept
// for comparison.
enum class AuxiliaryBase { kVisibility, kOccluder };

/// Every level-set panel computed from one vantage point.
struct VantageFields {
  Point vantage;
  ScalarField occluder;
  ScalarField visibility;
  ScalarField grazing;
  ScalarField auxiliary;
  ScalarField auxiliary_visibility;
  ScalarField shadow;
};

// Minimum of `field` along the segment from `from` to `to`, sampled every
// h/2 with bilinear interpolation (both endpoints included).
double segment_min(const ScalarField& field, Point from, Point to);

/// psi(x, x0) = min over the segment x0 -> x of phi; positive iff visible.
/// Throws when the vantage is not in free space.
ScalarField visibility_field(const ScalarField& phi, Point vantage);
ScalarField visibility_field(const ScalarField& phi, Cell vantage);

/// g(x, x0) = (x0 - x) . grad phi(x), central differences inside the grid and
/// one-sided differences on its edges.
ScalarField grazing_field(const ScalarField& phi, Point vantage);

VantageFields vantage_fields(const ScalarField& phi, Point vantage,
                             AuxiliaryBase base = AuxiliaryBase::kVisibility);

/// xi(x, x0): nonpositive exactly on occluded free space.
ScalarField shadow_field(const ScalarField& phi, Point vantage,
                         AuxiliaryBase base = AuxiliaryBase::kVisibility);
ScalarField shadow_field(const ScalarField& phi, Cell vantage,
                         AuxiliaryBase base = AuxiliaryBase::kVisibility);

/// Memoized shadow fields keyed by vantage cell. Readers run concurrently;
/// insertion takes an exclusive lock.
class ShadowCache {
 public:
  explicit ShadowCache(std::shared_ptr<const ScalarField> phi,
                       AuxiliaryBase base = AuxiliaryBase::kVisibility);

  const ScalarField& phi() const { return *phi_; }
  const ScalarField& shadow(Cell vantage) const;
  std::size_t size() const;

 private:
  std::shared_ptr<const ScalarField> phi_;
  AuxiliaryBase base_;
  mutable std::shared_mutex mutex_;
  mutable std::map<Cell, std::unique_ptr<const ScalarField>> fields_;
};

/// True iff some evader is occluded (xi <= 0) from every pursuer.
bool is_end_game(const ShadowCache& cache, std::span<const Cell> pursuers,
                 std::span<const Cell> evaders);

/// Mask of free cells hidden from every pursuer (1 = jointly occluded).
std::vector<char> joint_shadow_mask(const ShadowCache& cache,
                                    std::span<const Cell> pursuers);

}  // namespace seg
