#pragma once

#include <span>
#include <vector>

#include "seg/grid.hpp"
#include "seg/scene.hpp"

namespace seg {

// Boundary samples per shape when no closed-form distance is used.
inline constexpr int kBoundarySamples = 10000;

inline constexpr double kDefaultMinSpeed = 0.01;
inline constexpr double kDefaultEpsilonCells = 16.0;

/// Signed distance to one primitive: negative inside, positive outside.
/// Circles and the two polygon shapes are exact; ellipses use the minimum
/// over kBoundarySamples boundary points with an analytic inside test.
double shape_signed_distance(const Shape& shape, Point p);

/// True when p lies inside (or on) the primitive.
bool shape_contains(const Shape& shape, Point p);

/// Occluder function: min over shapes of the per-shape signed distance.
/// An empty scene yields kLarge everywhere.
ScalarField signed_distance(const Scene& scene, const Grid2D& grid);

enum class EikonalStencil {
  // Standard two-neighbour upwind update on the 4-neighbourhood.
  kFourPoint,
  // Adds diagonal neighbours (8 triangle updates); recovers sqrt(2)h on
  // diagonals, used for the discrete game's reachability.
  kEightPoint,
};

struct EikonalOptions {
  EikonalStencil stencil = EikonalStencil::kFourPoint;
  double tolerance = 1e-12;
  int max_sweeps = 1000;
};

/// First-arrival times solving |grad T| * speed = 1 with T = 0 on sources,
/// by Gauss-Seidel fast sweeping over the four alternating orderings.
/// Cells outside the unit square are impassable. Throws on nonpositive
/// speed or an empty source list.
ScalarField solve_eikonal(const ScalarField& speed, std::span<const Cell> sources,
                          const EikonalOptions& options = {});

/// Smooth transition of raw_speed down to v_min inside obstacles over the
/// band phi in [-2 eps, 0].
double regularized_speed(double raw_speed, double phi, double epsilon, double v_min);

ScalarField regularize_speed(double raw_speed, const ScalarField& phi,
                             double epsilon, double v_min);

// Defaults eps = 16h, v_min = 1/100.
ScalarField regularize_speed(double raw_speed, const ScalarField& phi);

/// raw_speed in free space (phi > 0), v_min elsewhere. The discrete game uses
/// this so players cannot tunnel through obstacles on coarse grids.
ScalarField obstacle_speed(double raw_speed, const ScalarField& phi,
                           double v_min = kDefaultMinSpeed);

}  // namespace seg
