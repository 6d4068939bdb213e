#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "spreadpool/csv.hpp"
#include "spreadpool/dataset.hpp"
#include "spreadpool/pool.hpp"
#include "spreadpool/recovery.hpp"
#include "spreadpool/weights.hpp"

namespace spreadpool {

struct BenchConfig {
  BevGridSpec grid{0.2, 0.2, 0.4, 250, 250};  // 0..100 m at 0.4 m cells
  std::size_t n = 1'000'000;
  std::size_t channels = 80;
  std::vector<std::size_t> k_values{1, 2, 3, 6};
  std::vector<WeightKind> kinds{WeightKind::Gaussian};
  std::vector<ExecMode> modes{ExecMode::Fast, ExecMode::Deterministic};
  std::vector<unsigned> workers{1};
  std::size_t reps = 5;
  std::size_t warmup = 2;
  std::uint64_t seed = 0;
  WeightParams weights;
  bool include_baseline = true;

  // Ablation only.
  std::vector<double> grid_sizes{0.8, 0.4, 0.2};
  std::size_t recovery_samples = 20'000;
  double recovery_sigma2_cells = 0.15;  // sigma^2 in squared cell units

  /// Throws ConfigError unless reps >= 3, n >= 1 and every k >= 1.
  void validate() const;
};

struct LatencyRow {
  std::size_t k = 0;
  std::string kind;
  std::string mode;
  unsigned workers = 1;
  std::size_t reps = 0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

struct LatencyStats {
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

/// Median and nearest-rank 95th percentile of `samples_ms`.
LatencyStats summarize_latency(std::vector<double> samples_ms);

SceneConfig scene_config(const BenchConfig& config);

/// Times the pooling kernel alone (scene loaded, output map reused) for every
/// (kind, k, mode, workers) combination, plus the snap-to-center baseline.
std::vector<LatencyRow> bench_pooling(const FrustumBatchView& scene, const BenchConfig& config);

CsvTable latency_table(const std::vector<LatencyRow>& rows, const BenchConfig& config);

struct AblationRow {
  double grid_size = 0.0;
  WeightKind kind = WeightKind::Gaussian;
  std::size_t k = 0;
  std::size_t samples = 0;
  std::size_t failures = 0;
  double mse = 0.0;
  double quantization_expected = 0.0;  // g^2 / 6
  double median_ms = 0.0;
};

/// Recovery MSE and pooling latency over kinds x k x grid sizes. The covered
/// range stays that of config.grid; the cell count follows the grid size.
std::vector<AblationRow> ablate(const BenchConfig& config);

CsvTable ablation_table(const std::vector<AblationRow>& rows, const BenchConfig& config);

CsvTable recovery_table(const RecoveryReport& report);

/// Grid with the same covered range as `base` but cells of `cell_size`.
BevGridSpec regrid(const BevGridSpec& base, double cell_size);

}  // namespace spreadpool
