#include "spreadpool/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spreadpool/errors.hpp"

namespace spreadpool {

namespace {

std::int64_t initial_radius_for(std::size_t k) {
  const auto r = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(k)) / 2.0));
  return std::max<std::int64_t>(1, r);
}

// Radius of the candidate window that decides whether p has neighbors at all.
// The search itself may start smaller; this only gates the empty result.
std::int64_t candidate_radius_for(std::size_t k) {
  return static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(k)))) + 1;
}

// True when [c - r, c + r] meets [0, n - 1], without overflow for far-away c.
bool window_meets(std::int64_t c, std::int64_t r, std::int64_t n) {
  if (c < 0) return c >= -r;
  return c - (n - 1) <= r;
}

}  // namespace

NeighborSearcher::NeighborSearcher(const BevGridSpec& spec, std::size_t k)
    : spec_(spec), k_(k), radius_(initial_radius_for(k)), candidate_radius_(candidate_radius_for(k)) {
  if (k == 0) throw ConfigError("neighbor count k must be at least 1");
  spec_.validate();
}

std::size_t NeighborSearcher::search(PointBEV p, std::span<Neighbor> out) {
  const CellIndex c = round_to_cell(spec_, p);
  const std::int64_t nx = spec_.nx;
  const std::int64_t ny = spec_.ny;
  if (!window_meets(c.i, candidate_radius_, nx) || !window_meets(c.j, candidate_radius_, ny)) return 0;
  auto by_key = [](const Candidate& a, const Candidate& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.linear < b.linear);
  };

  for (std::int64_t r = radius_;; r *= 2) {
    // Saturating window bounds; c may be far outside the lattice.
    const std::int64_t i_lo = std::max<std::int64_t>(0, c.i > INT64_MIN + r ? c.i - r : 0);
    const std::int64_t i_hi = std::min<std::int64_t>(nx - 1, c.i < INT64_MAX - r ? c.i + r : nx - 1);
    const std::int64_t j_lo = std::max<std::int64_t>(0, c.j > INT64_MIN + r ? c.j - r : 0);
    const std::int64_t j_hi = std::min<std::int64_t>(ny - 1, c.j < INT64_MAX - r ? c.j + r : ny - 1);
    if (i_lo > i_hi || j_lo > j_hi) continue;  // starting window missed the lattice; grow

    scratch_.clear();
    for (std::int64_t j = j_lo; j <= j_hi; ++j) {
      for (std::int64_t i = i_lo; i <= i_hi; ++i) {
        scratch_.push_back({cell_distance_sq(spec_, p, i, j), spec_.linear(i, j)});
      }
    }

    // Lower bound on the squared distance of any lattice cell outside the window.
    double bound = std::numeric_limits<double>::infinity();
    auto axis_bound = [&bound](double delta) { bound = std::min(bound, delta * delta); };
    if (i_lo > 0) axis_bound(p.x - spec_.center_x(i_lo - 1));
    if (i_hi < nx - 1) axis_bound(p.x - spec_.center_x(i_hi + 1));
    if (j_lo > 0) axis_bound(p.y - spec_.center_y(j_lo - 1));
    if (j_hi < ny - 1) axis_bound(p.y - spec_.center_y(j_hi + 1));

    const std::size_t m = std::min(k_, scratch_.size());
    if (scratch_.size() > m) {
      std::partial_sort(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(m),
                        scratch_.end(), by_key);
    } else {
      std::sort(scratch_.begin(), scratch_.end(), by_key);
    }

    const bool complete = std::isinf(bound) || (m == k_ && scratch_[m - 1].d2 < bound);
    if (!complete) continue;

    for (std::size_t s = 0; s < m; ++s) {
      const Candidate& cand = scratch_[s];
      out[s] = Neighbor{spec_.unlinear(cand.linear), cand.linear, std::sqrt(cand.d2), cand.d2};
    }
    return m;
  }
}

NeighborSet select_neighbors(const BevGridSpec& spec, PointBEV p, std::size_t k) {
  NeighborSearcher searcher(spec, k);
  NeighborSet result(k);
  result.resize(searcher.search(p, result));
  return result;
}

}  // namespace spreadpool
