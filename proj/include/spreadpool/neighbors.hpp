#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spreadpool/geometry.hpp"

namespace spreadpool {

struct Neighbor {
  CellIndex cell;
  std::int64_t linear = 0;
  double distance = 0.0;     // meters
  double distance_sq = 0.0;  // ordering key

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Up to k distinct in-lattice cells, sorted by (squared distance, linear
/// index) ascending.
using NeighborSet = std::vector<Neighbor>;

/// Reusable top-k search state. One instance per worker; not thread-safe.
///
/// The search scans a square window of cells around the point's rounded cell
/// and accepts the result only when every cell outside the window is strictly
/// farther than the k-th candidate. Otherwise the window grows. The result is
/// therefore always the exact top-k of the whole lattice, ties included.
class NeighborSearcher {
 public:
  NeighborSearcher(const BevGridSpec& spec, std::size_t k);

  /// Writes the neighbors of p into out[0..m) and returns m (m <= k). Returns
  /// 0 when the candidate window (radius ceil(sqrt(k)) + 1 cells around p's
  /// rounded cell) contains no lattice cell.
  std::size_t search(PointBEV p, std::span<Neighbor> out);

  std::size_t k() const { return k_; }
  std::int64_t initial_radius() const { return radius_; }

 private:
  struct Candidate {
    double d2;
    std::int64_t linear;
  };

  BevGridSpec spec_;
  std::size_t k_;
  std::int64_t radius_;
  std::int64_t candidate_radius_;
  std::vector<Candidate> scratch_;
};

/// Top-k nearest lattice cell centers to p. Throws ConfigError when k == 0.
NeighborSet select_neighbors(const BevGridSpec& spec, PointBEV p, std::size_t k);

}  // namespace spreadpool
