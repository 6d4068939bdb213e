#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "spreadpool/geometry.hpp"
#include "spreadpool/pool.hpp"

namespace spreadpool {

// Binary point dataset, all integers and floats little-endian:
//   "SPRD" | version u16 | n u64 | C u32 | n x (x f64, y f64) | n x depth f64 | n*C x feature f32
inline constexpr char kDatasetMagic[4] = {'S', 'P', 'R', 'D'};
inline constexpr std::uint16_t kDatasetVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 4 + 2 + 8 + 4;

inline constexpr std::size_t dataset_size_bytes(std::size_t n, std::size_t channels) {
  return kDatasetHeaderBytes + n * (2 * 8 + 8 + channels * 4);
}

/// Throws IoError when the file cannot be written.
void write_dataset(const std::filesystem::path& path, const FrustumBatchView& batch);

/// Throws IoError on read failure, bad magic, unknown version or truncation.
FrustumBatch read_dataset(const std::filesystem::path& path);

// BEV map dump written by `spreadpool pool`:
//   "SPBM" | version u16 | nx u32 | ny u32 | C u32 | nx*ny*C x f32 (cell-major, channels innermost)
inline constexpr char kMapMagic[4] = {'S', 'P', 'B', 'M'};
inline constexpr std::uint16_t kMapVersion = 1;

void write_feature_map(const std::filesystem::path& path, const BevFeatureMap& map);
BevFeatureMap read_feature_map(const std::filesystem::path& path);

struct SceneConfig {
  BevGridSpec grid;
  std::size_t n = 0;
  std::size_t channels = 80;
  double depth_min = 1.0;
  double depth_max = 100.0;
  std::uint64_t seed = 0;
};

/// Synthetic stand-in for lifted image features: positions uniform over the
/// lattice extent, depths uniform in [depth_min, depth_max], features i.i.d.
/// standard normal. Deterministic in the seed.
FrustumBatch gen_scene(const SceneConfig& config);

}  // namespace spreadpool
