#include "spreadpool/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spreadpool/errors.hpp"

namespace spreadpool {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

double determinant(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 inverse(const Mat3& m) {
  const double det = determinant(m);
  if (!std::isfinite(det) || std::abs(det) < 1e-300) {
    throw ConfigError("camera intrinsics are not invertible");
  }
  const double s = 1.0 / det;
  Mat3 r{};
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * s;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * s;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * s;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * s;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * s;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * s;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * s;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * s;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * s;
  return r;
}

// Round half toward +inf.
std::int64_t round_half_up(double t) { return static_cast<std::int64_t>(std::floor(t + 0.5)); }

}  // namespace

void BevGridSpec::validate() const {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw ConfigError("grid cell_size must be a finite positive number");
  }
  if (nx < 1 || ny < 1) {
    throw ConfigError("grid must have at least one cell along each axis");
  }
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) {
    throw ConfigError("grid origin must be finite");
  }
}

CameraModel CameraModel::identity() {
  CameraModel cam;
  for (int r = 0; r < 3; ++r) {
    cam.intrinsics[r][r] = 1.0;
    cam.extrinsics[r][r] = 1.0;
  }
  return cam;
}

void CameraModel::validate() const {
  if (intrinsics[0][0] == 0.0 || intrinsics[1][1] == 0.0) {
    throw ConfigError("camera intrinsics have a zero focal entry");
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double dot = 0.0;
      for (int r = 0; r < 3; ++r) dot += extrinsics[r][a] * extrinsics[r][b];
      const double expected = a == b ? 1.0 : 0.0;
      if (std::abs(dot - expected) > 1e-6) {
        throw ConfigError("camera extrinsic rotation is not orthonormal");
      }
    }
  }
}

Point3D project_pixel_to_3d(const CameraModel& cam, double u, double v, double depth) {
  if (!(depth > 0.0)) {
    throw DomainError("depth must be positive, got " + std::to_string(depth));
  }
  cam.validate();
  const Mat3 kinv = inverse(cam.intrinsics);
  const std::array<double, 3> pix{u * depth, v * depth, depth};
  std::array<double, 3> cam_pt{};
  for (int r = 0; r < 3; ++r) {
    cam_pt[r] = kinv[r][0] * pix[0] + kinv[r][1] * pix[1] + kinv[r][2] * pix[2];
  }
  // Inverse rigid transform: X = R^T (X_cam - t).
  const auto& e = cam.extrinsics;
  std::array<double, 3> shifted{};
  for (int r = 0; r < 3; ++r) shifted[r] = cam_pt[r] - e[r][3];
  std::array<double, 3> world{};
  for (int c = 0; c < 3; ++c) {
    world[c] = e[0][c] * shifted[0] + e[1][c] * shifted[1] + e[2][c] * shifted[2];
  }
  return {world[0], world[1], world[2]};
}

Point3D project_3d_to_pixel(const CameraModel& cam, const Point3D& p) {
  const auto& e = cam.extrinsics;
  const std::array<double, 3> x{p.x, p.y, p.z};
  std::array<double, 3> cam_pt{};
  for (int r = 0; r < 3; ++r) {
    cam_pt[r] = e[r][0] * x[0] + e[r][1] * x[1] + e[r][2] * x[2] + e[r][3];
  }
  const auto& k = cam.intrinsics;
  std::array<double, 3> pix{};
  for (int r = 0; r < 3; ++r) {
    pix[r] = k[r][0] * cam_pt[0] + k[r][1] * cam_pt[1] + k[r][2] * cam_pt[2];
  }
  return {pix[0], pix[1], pix[2]};
}

PointBEV grid_center(const BevGridSpec& spec, std::int64_t i, std::int64_t j) {
  if (!spec.contains(i, j)) {
    throw DomainError("cell (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") is outside the " + std::to_string(spec.nx) + "x" +
                      std::to_string(spec.ny) + " lattice");
  }
  return {spec.center_x(i), spec.center_y(j)};
}

CellIndex round_to_cell(const BevGridSpec& spec, PointBEV p) {
  const double tx = (p.x - spec.origin_x) / spec.cell_size;
  const double ty = (p.y - spec.origin_y) / spec.cell_size;
  // Far-away or non-finite points map to a sentinel well outside any lattice.
  constexpr double kLimit = 4.0e18;
  auto clamp = [](double t) {
    if (!(t > -kLimit)) return -kLimit;
    if (!(t < kLimit)) return kLimit;
    return t;
  };
  return {round_half_up(clamp(tx)), round_half_up(clamp(ty))};
}

std::optional<CellIndex> locate_cell(const BevGridSpec& spec, PointBEV p) {
  const CellIndex c = round_to_cell(spec, p);
  if (!spec.contains(c.i, c.j)) return std::nullopt;
  return c;
}

CellIndex nearest_cell(const BevGridSpec& spec, PointBEV p) {
  const CellIndex guess = round_to_cell(spec, p);
  const std::int64_t ci = std::clamp<std::int64_t>(guess.i, 0, spec.nx - 1);
  const std::int64_t cj = std::clamp<std::int64_t>(guess.j, 0, spec.ny - 1);
  // The true nearest cell is within one step of the clamped guess; scanning in
  // linear order with a strict comparison keeps the lowest index on ties.
  CellIndex best{ci, cj};
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::int64_t j = cj - 1; j <= cj + 1; ++j) {
    for (std::int64_t i = ci - 1; i <= ci + 1; ++i) {
      if (!spec.contains(i, j)) continue;
      const double d2 = cell_distance_sq(spec, p, i, j);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = {i, j};
      }
    }
  }
  return best;
}

}  // namespace spreadpool
