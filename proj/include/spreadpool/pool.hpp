#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "spreadpool/geometry.hpp"
#include "spreadpool/neighbors.hpp"
#include "spreadpool/weights.hpp"

namespace spreadpool {

/// Non-owning view of n frustum points already projected to the BEV plane.
/// positions holds interleaved (x, y) pairs; features is n x channels,
/// row-major.
struct FrustumBatchView {
  std::size_t n = 0;
  std::size_t channels = 0;
  std::span<const double> positions;
  std::span<const double> depths;
  std::span<const float> features;

  PointBEV position(std::size_t p) const { return {positions[2 * p], positions[2 * p + 1]}; }
  std::span<const float> feature(std::size_t p) const { return features.subspan(p * channels, channels); }

  /// Throws ConfigError when span sizes disagree with n and channels.
  void validate_shape() const;
};

struct FrustumBatch {
  std::size_t n = 0;
  std::size_t channels = 0;
  std::vector<double> positions;
  std::vector<double> depths;
  std::vector<float> features;

  FrustumBatch() = default;
  FrustumBatch(std::size_t n_points, std::size_t n_channels)
      : n(n_points), channels(n_channels), positions(2 * n_points), depths(n_points, 1.0),
        features(n_points * n_channels) {}

  FrustumBatchView view() const { return {n, channels, positions, depths, features}; }
  operator FrustumBatchView() const { return view(); }  // NOLINT(google-explicit-constructor)
};

enum class ExecMode { Fast, Deterministic, Reference };

std::string_view to_string(ExecMode mode);
ExecMode parse_exec_mode(std::string_view name);

struct PoolOptions {
  std::size_t k = 1;
  ExecMode mode = ExecMode::Deterministic;
  unsigned workers = 1;  // 0 = hardware concurrency
};

/// Per-point state recorded by the forward pass. Slot s of point p lives at
/// index p * k + s; only the first counts[p] slots are meaningful.
struct SavedForBackward {
  BevGridSpec spec;
  WeightParams params;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t channels = 0;
  std::vector<std::uint32_t> counts;
  std::vector<std::int32_t> cells;  // linear cell index
  std::vector<double> weights;
  std::vector<double> distances;
  std::vector<double> sigma2;
  std::vector<std::uint8_t> clamped;
  std::size_t dropped = 0;  // points outside the lattice
};

/// nx x ny x channels accumulator, cell-major (linear = j * nx + i) with
/// channels innermost.
template <typename T>
struct BasicFeatureMap {
  std::int64_t nx = 0;
  std::int64_t ny = 0;
  std::size_t channels = 0;
  std::vector<T> values;
  SavedForBackward saved;

  std::span<T> cell(std::int64_t linear) {
    return std::span<T>(values).subspan(static_cast<std::size_t>(linear) * channels, channels);
  }
  std::span<const T> cell(std::int64_t linear) const {
    return std::span<const T>(values).subspan(static_cast<std::size_t>(linear) * channels, channels);
  }
  T at(std::int64_t i, std::int64_t j, std::size_t c) const {
    return values[static_cast<std::size_t>(j * nx + i) * channels + c];
  }
  std::size_t dropped_points() const { return saved.dropped; }
};

using BevFeatureMap = BasicFeatureMap<float>;
using ReferenceFeatureMap = BasicFeatureMap<double>;

struct PoolGradients {
  std::vector<float> grad_features;  // n x channels
  double grad_alpha = 0.0;
  std::vector<double> grad_depths;  // n
};

/// Spreads each point's feature into its k nearest cells with weights from
/// `params`. Points whose rounded cell lies outside the lattice are dropped
/// and counted. Throws NumericError naming the first point with a non-finite
/// feature or position, DomainError for a non-positive depth.
BevFeatureMap spread_pool_forward(const FrustumBatchView& batch, const BevGridSpec& spec,
                                  const WeightParams& params, const PoolOptions& options);

/// Same as spread_pool_forward, reusing the allocations already held by `out`.
void spread_pool_forward_into(BevFeatureMap& out, const FrustumBatchView& batch, const BevGridSpec& spec,
                              const WeightParams& params, const PoolOptions& options);

/// Snap-to-nearest voxel pooling: every point adds its feature to its single
/// nearest cell.
BevFeatureMap baseline_pool(const FrustumBatchView& batch, const BevGridSpec& spec);

/// Serial double-precision forward pass in point order. Correctness oracle
/// for the parallel modes.
ReferenceFeatureMap pool_reference(const FrustumBatchView& batch, const BevGridSpec& spec,
                                   const WeightParams& params, std::size_t k);

/// Gradients of a scalar loss given d(loss)/d(map) in `grad_bev`. Neighbor
/// membership and distances are constants. Throws DomainError on shape
/// mismatch between grad_bev, saved and batch.
PoolGradients spread_pool_backward(std::span<const float> grad_bev, const SavedForBackward& saved,
                                   const FrustumBatchView& batch, const WeightParams& params,
                                   unsigned workers = 1);

}  // namespace spreadpool
