#include "spreadpool/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "spreadpool/errors.hpp"

namespace spreadpool {

void BenchConfig::validate() const {
  grid.validate();
  weights.validate();
  if (reps < 3) throw ConfigError("benchmarks need at least 3 repetitions");
  if (n < 1) throw ConfigError("benchmarks need at least one point");
  if (k_values.empty()) throw ConfigError("at least one k value is required");
  for (std::size_t k : k_values) {
    if (k < 1) throw ConfigError("every k must be at least 1");
  }
  for (double g : grid_sizes) {
    if (!(g > 0.0)) throw ConfigError("grid sizes must be positive");
  }
}

LatencyStats summarize_latency(std::vector<double> samples_ms) {
  if (samples_ms.empty()) return {};
  std::sort(samples_ms.begin(), samples_ms.end());
  const std::size_t n = samples_ms.size();
  const double median = n % 2 ? samples_ms[n / 2] : 0.5 * (samples_ms[n / 2 - 1] + samples_ms[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  return {median, samples_ms[std::clamp<std::size_t>(rank, 1, n) - 1]};
}

SceneConfig scene_config(const BenchConfig& config) {
  SceneConfig sc;
  sc.grid = config.grid;
  sc.n = config.n;
  sc.channels = config.channels;
  sc.seed = config.seed;
  return sc;
}

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
LatencyStats time_runs(std::size_t warmup, std::size_t reps, Fn&& fn) {
  for (std::size_t w = 0; w < warmup; ++w) fn();
  std::vector<double> ms;
  ms.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto start = Clock::now();
    fn();
    ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
  }
  return summarize_latency(std::move(ms));
}

}  // namespace

std::vector<LatencyRow> bench_pooling(const FrustumBatchView& scene, const BenchConfig& config) {
  config.validate();
  std::vector<LatencyRow> rows;
  BevFeatureMap map;

  if (config.include_baseline) {
    const LatencyStats s = time_runs(config.warmup, config.reps, [&] { map = baseline_pool(scene, config.grid); });
    rows.push_back({1, "delta", "baseline", 1, config.reps, s.median_ms, s.p95_ms});
  }
  for (WeightKind kind : config.kinds) {
    WeightParams params = config.weights;
    params.kind = kind;
    for (std::size_t k : config.k_values) {
      for (ExecMode mode : config.modes) {
        for (unsigned workers : config.workers) {
          const PoolOptions opts{k, mode, workers};
          const LatencyStats s = time_runs(config.warmup, config.reps, [&] {
            spread_pool_forward_into(map, scene, config.grid, params, opts);
          });
          rows.push_back({k, std::string(to_string(kind)), std::string(to_string(mode)), workers, config.reps,
                          s.median_ms, s.p95_ms});
        }
      }
    }
  }
  return rows;
}

CsvTable latency_table(const std::vector<LatencyRow>& rows, const BenchConfig& config) {
  CsvTable t;
  t.comments.push_back("published pooling latency (ms, GPU, reference only): k=1 0.8; k=2 4.9; k=3 7.7; k=6 15.3");
  t.comments.push_back("n=" + std::to_string(config.n) + " channels=" + std::to_string(config.channels) +
                       " grid=" + std::to_string(config.grid.nx) + "x" + std::to_string(config.grid.ny) +
                       " cell=" + format_double(config.grid.cell_size) + " seed=" + std::to_string(config.seed));
  t.columns = {"k", "kind", "mode", "workers", "reps", "median_ms", "p95_ms"};
  for (const LatencyRow& r : rows) {
    t.rows.push_back({std::to_string(r.k), r.kind, r.mode, std::to_string(r.workers), std::to_string(r.reps),
                      format_double(r.median_ms), format_double(r.p95_ms)});
  }
  return t;
}

BevGridSpec regrid(const BevGridSpec& base, double cell_size) {
  const PointBEV lo = base.extent_min();
  const PointBEV hi = base.extent_max();
  BevGridSpec g;
  g.cell_size = cell_size;
  g.nx = std::max<std::int64_t>(1, std::llround((hi.x - lo.x) / cell_size));
  g.ny = std::max<std::int64_t>(1, std::llround((hi.y - lo.y) / cell_size));
  g.origin_x = lo.x + 0.5 * cell_size;
  g.origin_y = lo.y + 0.5 * cell_size;
  return g;
}

std::vector<AblationRow> ablate(const BenchConfig& config) {
  config.validate();
  std::vector<AblationRow> rows;
  for (double g : config.grid_sizes) {
    const BevGridSpec grid = regrid(config.grid, g);
    SceneConfig sc = scene_config(config);
    sc.grid = grid;
    const FrustumBatch scene = gen_scene(sc);
    const double sigma2 = config.recovery_sigma2_cells * g * g;

    for (WeightKind kind : config.kinds) {
      const RecoveryReport report = run_recovery_experiment(
          grid, config.k_values, config.recovery_samples, sigma2, config.seed,
          {kind, config.workers.empty() ? 1u : config.workers.front()});
      WeightParams params = config.weights;
      params.kind = kind;
      BevFeatureMap map;
      for (const RecoveryRow& rr : report.rows) {
        const PoolOptions opts{rr.k, config.modes.empty() ? ExecMode::Fast : config.modes.front(),
                               config.workers.empty() ? 1u : config.workers.front()};
        const LatencyStats s = time_runs(config.warmup, config.reps, [&] {
          spread_pool_forward_into(map, scene.view(), grid, params, opts);
        });
        rows.push_back({g, kind, rr.k, rr.samples, rr.failures, rr.mse, g * g / 6.0, s.median_ms});
      }
    }
  }
  return rows;
}

CsvTable ablation_table(const std::vector<AblationRow>& rows, const BenchConfig& config) {
  CsvTable t;
  t.comments.push_back("mse in squared meters; recovery sigma^2 = " + format_double(config.recovery_sigma2_cells) +
                       " * grid_size^2; failures = samples without three invertible non-collinear neighbors");
  t.columns = {"grid_size", "kind", "k", "samples", "failures", "mse", "quantization_mse_expected", "median_ms"};
  for (const AblationRow& r : rows) {
    t.rows.push_back({format_double(r.grid_size), std::string(to_string(r.kind)), std::to_string(r.k),
                      std::to_string(r.samples), std::to_string(r.failures), format_double(r.mse),
                      format_double(r.quantization_expected), format_double(r.median_ms)});
  }
  return t;
}

CsvTable recovery_table(const RecoveryReport& report) {
  CsvTable t;
  t.comments.push_back("kind=" + std::string(to_string(report.kind)) + " sigma2=" + format_double(report.sigma2) +
                       " cell_size=" + format_double(report.cell_size) + " mse units: squared meters");
  t.comments.push_back("published learned-regressor mse (reference only, different normalization): k>=3 0.003; k=1 0.095");
  t.columns = {"k", "samples", "failures", "mse"};
  for (const RecoveryRow& r : report.rows) {
    t.rows.push_back({std::to_string(r.k), std::to_string(r.samples), std::to_string(r.failures),
                      format_double(r.mse)});
  }
  return t;
}

}  // namespace spreadpool
