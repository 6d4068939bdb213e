#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>

namespace spreadpool {

struct Point3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct PointBEV {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PointBEV&, const PointBEV&) = default;
};

struct CellIndex {
  std::int64_t i = 0;
  std::int64_t j = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Regular BEV lattice. Cell (i, j) is centered at
/// (origin_x + i * cell_size, origin_y + j * cell_size).
///
/// Cells are linearized x-fastest: linear = j * nx + i. Feature maps use the
/// same cell order with channels innermost.
struct BevGridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 1.0;
  std::int64_t nx = 1;
  std::int64_t ny = 1;

  /// Throws ConfigError unless cell_size > 0 and nx, ny >= 1.
  void validate() const;

  std::size_t cell_count() const { return static_cast<std::size_t>(nx * ny); }
  std::int64_t linear(CellIndex c) const { return c.j * nx + c.i; }
  std::int64_t linear(std::int64_t i, std::int64_t j) const { return j * nx + i; }
  CellIndex unlinear(std::int64_t lin) const { return {lin % nx, lin / nx}; }
  bool contains(std::int64_t i, std::int64_t j) const {
    return i >= 0 && i < nx && j >= 0 && j < ny;
  }

  /// Unchecked center of cell (i, j); i and j may lie outside the lattice.
  double center_x(std::int64_t i) const { return origin_x + static_cast<double>(i) * cell_size; }
  double center_y(std::int64_t j) const { return origin_y + static_cast<double>(j) * cell_size; }

  /// Lower and upper corners of the area covered by the lattice cells.
  PointBEV extent_min() const { return {origin_x - 0.5 * cell_size, origin_y - 0.5 * cell_size}; }
  PointBEV extent_max() const {
    return {origin_x + (static_cast<double>(nx) - 0.5) * cell_size,
            origin_y + (static_cast<double>(ny) - 0.5) * cell_size};
  }
};

/// Pinhole camera. `intrinsics` maps camera coordinates to homogeneous
/// pixels; `extrinsics` = [R | t] maps ego/ground coordinates to camera
/// coordinates.
struct CameraModel {
  std::array<std::array<double, 3>, 3> intrinsics{};
  std::array<std::array<double, 4>, 3> extrinsics{};

  static CameraModel identity();

  /// Throws ConfigError when a focal entry is zero or R is not orthonormal.
  void validate() const;
};

/// Lifts pixel (u, v) at `depth` along its ray into the ego/ground frame.
Point3D project_pixel_to_3d(const CameraModel& cam, double u, double v, double depth);

/// Forward projection of an ego/ground point to (u * depth, v * depth, depth).
Point3D project_3d_to_pixel(const CameraModel& cam, const Point3D& p);

inline PointBEV bev_project(const Point3D& p) { return {p.x, p.y}; }

/// Checked cell center. Throws DomainError when (i, j) is outside the lattice.
PointBEV grid_center(const BevGridSpec& spec, std::int64_t i, std::int64_t j);

/// Round-to-nearest cell along each axis, exact .5 rounding toward +inf.
/// Empty when the rounded index falls outside the lattice.
std::optional<CellIndex> locate_cell(const BevGridSpec& spec, PointBEV p);

/// Unchecked per-axis rounding used by locate_cell; may return indices
/// outside the lattice.
CellIndex round_to_cell(const BevGridSpec& spec, PointBEV p);

/// Squared Euclidean distance from p to the center of cell (i, j). Every
/// distance comparison in the library goes through this expression so ties
/// resolve identically everywhere.
inline double cell_distance_sq(const BevGridSpec& spec, PointBEV p, std::int64_t i, std::int64_t j) {
  const double dx = p.x - spec.center_x(i);
  const double dy = p.y - spec.center_y(j);
  return dx * dx + dy * dy;
}

/// Euclidean-nearest in-lattice cell, resolving exact ties toward the lowest
/// linear index. For points with a locate_cell result this is the first entry
/// of select_neighbors(k = 1).
CellIndex nearest_cell(const BevGridSpec& spec, PointBEV p);

}  // namespace spreadpool
