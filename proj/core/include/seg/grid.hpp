#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seg {

// Stand-in for infinity. Anything at or above kUnreachable is treated as
// "never arrives".
inline constexpr double kLarge = 1e9;
inline constexpr double kUnreachable = 1e8;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

// Grid cell (i along x, j along y).
struct Cell {
  int i = 0;
  int j = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Uniform cell-centred grid on the unit square [0,1) x [0,1) with m cells
/// per side. Buffers attached to a grid are row-major with i outer.
class Grid2D {
 public:
  static constexpr int kMinCells = 8;

  explicit Grid2D(int m) : m_(m), h_(1.0 / static_cast<double>(m)) {
    if (m < kMinCells) {
      throw std::invalid_argument("grid needs at least " +
                                  std::to_string(kMinCells) +
                                  " cells per side, got " + std::to_string(m));
    }
  }

  int m() const { return m_; }
  double h() const { return h_; }
  std::size_t size() const {
    return static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_);
  }

  bool contains(Cell c) const {
    return c.i >= 0 && c.j >= 0 && c.i < m_ && c.j < m_;
  }

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.i) * static_cast<std::size_t>(m_) +
           static_cast<std::size_t>(c.j);
  }

  Cell cell(std::size_t idx) const {
    return {static_cast<int>(idx / static_cast<std::size_t>(m_)),
            static_cast<int>(idx % static_cast<std::size_t>(m_))};
  }

  Point center(Cell c) const {
    return {(c.i + 0.5) * h_, (c.j + 0.5) * h_};
  }

  // Cell containing p; points outside the unit square are clamped.
  Cell locate(Point p) const {
    auto clamp_axis = [this](double v) {
      return std::clamp(static_cast<int>(std::floor(v / h_)), 0, m_ - 1);
    };
    return {clamp_axis(p.x), clamp_axis(p.y)};
  }

  friend bool operator==(const Grid2D& a, const Grid2D& b) {
    return a.m_ == b.m_;
  }

 private:
  int m_;
  double h_;
};

/// One finite double per grid cell.
class ScalarField {
 public:
  ScalarField(Grid2D grid, double fill = 0.0)
      : grid_(grid), values_(grid.size(), fill) {}

  ScalarField(Grid2D grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw std::invalid_argument("field buffer size does not match grid");
    }
  }

  const Grid2D& grid() const { return grid_; }

  double operator()(Cell c) const { return values_[grid_.index(c)]; }
  double& operator()(Cell c) { return values_[grid_.index(c)]; }
  double operator[](std::size_t idx) const { return values_[idx]; }
  double& operator[](std::size_t idx) { return values_[idx]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }

  // Bilinear interpolation between cell centres, clamped at the border.
  double sample(Point p) const {
    const int m = grid_.m();
    const double h = grid_.h();
    const double u = std::clamp(p.x / h - 0.5, 0.0, m - 1.0);
    const double v = std::clamp(p.y / h - 0.5, 0.0, m - 1.0);
    const int i0 = std::min(static_cast<int>(u), m - 2);
    const int j0 = std::min(static_cast<int>(v), m - 2);
    const double fu = u - i0;
    const double fv = v - j0;
    const auto at = [&](int i, int j) {
      return values_[static_cast<std::size_t>(i) * m + j];
    };
    return (1.0 - fu) * ((1.0 - fv) * at(i0, j0) + fv * at(i0, j0 + 1)) +
           fu * ((1.0 - fv) * at(i0 + 1, j0) + fv * at(i0 + 1, j0 + 1));
  }

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

}  // namespace seg

template <>
struct std::hash<seg::Cell> {
  std::size_t operator()(const seg::Cell& c) const noexcept {
    return std::hash<long long>{}((static_cast<long long>(c.i) << 32) ^
                                  static_cast<unsigned>(c.j));
  }
};
