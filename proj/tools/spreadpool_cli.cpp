// spreadpool: synthetic data generation, pooling, benchmarks and recovery
// experiments for the spread voxel pooling kernel.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error,
// 4 numeric or degenerate input.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "spreadpool/bench.hpp"
#include "spreadpool/dataset.hpp"
#include "spreadpool/errors.hpp"
#include "spreadpool/pool.hpp"
#include "spreadpool/recovery.hpp"

namespace sp = spreadpool;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct GridArgs {
  double grid_size = 0.4;
  std::int64_t nx = 250;
  std::int64_t ny = 250;
  std::optional<double> origin_x;
  std::optional<double> origin_y;

  // Default origin puts the lattice's lower corner at (0, 0).
  sp::BevGridSpec spec() const {
    sp::BevGridSpec g;
    g.cell_size = grid_size;
    g.nx = nx;
    g.ny = ny;
    g.origin_x = origin_x.value_or(0.5 * grid_size);
    g.origin_y = origin_y.value_or(0.5 * grid_size);
    g.validate();
    return g;
  }
};

struct WeightArgs {
  std::string kind = "gaussian";
  std::optional<double> alpha;
  double sigma_max = 2.0;
  double sigma_min = 1e-3;

  sp::WeightParams params() const {
    sp::WeightParams p;
    p.kind = sp::parse_weight_kind(kind);
    p.alpha = alpha.value_or(sp::default_alpha(50.5));
    p.sigma_min = sigma_min;
    p.sigma_max = sigma_max;
    p.validate();
    return p;
  }
};

void add_grid_options(CLI::App* cmd, GridArgs& g) {
  cmd->add_option("--grid-size", g.grid_size, "BEV cell size in meters")->capture_default_str();
  cmd->add_option("--nx", g.nx, "cells along x")->capture_default_str();
  cmd->add_option("--ny", g.ny, "cells along y")->capture_default_str();
  cmd->add_option("--origin-x", g.origin_x, "x of cell (0,0)'s center (default grid-size/2)");
  cmd->add_option("--origin-y", g.origin_y, "y of cell (0,0)'s center (default grid-size/2)");
}

void add_weight_options(CLI::App* cmd, WeightArgs& w) {
  cmd->add_option("--alpha", w.alpha, "sigma^2 = alpha * depth (default: sigma^2 = 1 at 50.5 m)");
  cmd->add_option("--sigma-max", w.sigma_max, "upper clamp on sigma^2")->capture_default_str();
  cmd->add_option("--sigma-min", w.sigma_min, "lower clamp on sigma^2")->capture_default_str();
}

sp::FrustumBatch load_or_generate(const std::string& in, const sp::SceneConfig& sc) {
  if (!in.empty()) return sp::read_dataset(in);
  return sp::gen_scene(sc);
}

void emit(const sp::CsvTable& table, const std::string& out) {
  if (out.empty() || out == "-") {
    sp::write_csv(std::cout, table);
  } else {
    sp::write_csv(out, table);
  }
}

std::vector<sp::WeightKind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<sp::WeightKind> kinds;
  for (const auto& n : names) kinds.push_back(sp::parse_weight_kind(n));
  return kinds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spread voxel pooling kernels: generate, pool, benchmark, recover, ablate"};
  app.require_subcommand(1);

  GridArgs grid;
  WeightArgs weights;
  std::string mode = "deterministic";
  unsigned workers = 1;
  std::uint64_t seed = 0;
  std::string out;
  std::string in;
  std::size_t n = 100'000;
  std::size_t channels = 80;
  std::vector<std::size_t> k_values;
  std::size_t reps = 5;
  std::size_t warmup = 2;
  std::size_t samples = 100'000;
  double sigma2 = 1.0;
  std::vector<double> grid_sizes{0.8, 0.4, 0.2};
  std::vector<std::string> kind_list;

  auto* gen = app.add_subcommand("gen", "write a synthetic frustum point dataset");
  add_grid_options(gen, grid);
  gen->add_option("--n", n, "number of points")->capture_default_str();
  gen->add_option("--channels", channels, "feature channels")->capture_default_str();
  gen->add_option("--seed", seed, "RNG seed")->capture_default_str();
  gen->add_option("--out", out, "output dataset path")->required();

  auto* pool = app.add_subcommand("pool", "run one spread pooling pass and write the BEV map");
  add_grid_options(pool, grid);
  add_weight_options(pool, weights);
  pool->add_option("--kind", weights.kind, "gaussian|linear|l2|delta")->capture_default_str();
  pool->add_option("--k", k_values, "neighbor count")->expected(1);
  pool->add_option("--mode", mode, "fast|deterministic|reference")->capture_default_str();
  pool->add_option("--workers", workers, "worker threads (0 = all cores)")->capture_default_str();
  pool->add_option("--in", in, "input dataset (default: generate from --seed)");
  pool->add_option("--n", n, "points when generating")->capture_default_str();
  pool->add_option("--channels", channels, "channels when generating")->capture_default_str();
  pool->add_option("--seed", seed, "RNG seed when generating")->capture_default_str();
  pool->add_option("--out", out, "output map path (SPBM format)");

  auto* bench = app.add_subcommand("bench", "pooling latency across k, modes and worker counts");
  add_grid_options(bench, grid);
  add_weight_options(bench, weights);
  bench->add_option("--kind", kind_list, "weight kinds")->delimiter(',');
  bench->add_option("--k", k_values, "neighbor counts, comma separated")->delimiter(',');
  std::vector<std::string> mode_list;
  bench->add_option("--mode", mode_list, "execution modes, comma separated")->delimiter(',');
  std::vector<unsigned> worker_list;
  bench->add_option("--workers", worker_list, "worker counts, comma separated")->delimiter(',');
  bench->add_option("--in", in, "input dataset (default: generate from --seed)");
  bench->add_option("--n", n, "points when generating")->capture_default_str();
  bench->add_option("--channels", channels, "channels when generating")->capture_default_str();
  bench->add_option("--reps", reps, "timed repetitions (>= 3)")->capture_default_str();
  bench->add_option("--warmup", warmup, "untimed warmup repetitions")->capture_default_str();
  bench->add_option("--seed", seed, "RNG seed")->capture_default_str();
  bench->add_option("--out", out, "CSV output path (default stdout)");

  auto* recover = app.add_subcommand("recover", "position recovery from spread weights vs. snap-to-center");
  GridArgs rgrid{1.0, 16, 16, std::nullopt, std::nullopt};
  add_grid_options(recover, rgrid);
  recover->add_option("--kind", weights.kind, "gaussian|linear|l2|delta")->capture_default_str();
  recover->add_option("--k", k_values, "neighbor counts, comma separated")->delimiter(',');
  recover->add_option("--samples", samples, "Monte-Carlo samples per k")->capture_default_str();
  recover->add_option("--sigma2", sigma2, "Gaussian variance in squared meters")->capture_default_str();
  recover->add_option("--workers", workers, "worker threads")->capture_default_str();
  recover->add_option("--seed", seed, "RNG seed")->capture_default_str();
  recover->add_option("--out", out, "CSV output path (default stdout)");

  auto* abl = app.add_subcommand("ablate", "recovery MSE and latency over weight kind x k x grid size");
  add_grid_options(abl, grid);
  add_weight_options(abl, weights);
  abl->add_option("--kind", kind_list, "weight kinds, comma separated")->delimiter(',');
  abl->add_option("--k", k_values, "neighbor counts, comma separated")->delimiter(',');
  abl->add_option("--grid-sizes", grid_sizes, "cell sizes to compare, comma separated")->delimiter(',');
  abl->add_option("--samples", samples, "recovery samples per row")->capture_default_str();
  abl->add_option("--sigma2", sigma2, "recovery variance in squared cell units (default 0.15)");
  abl->add_option("--mode", mode, "execution mode for latency")->capture_default_str();
  abl->add_option("--workers", workers, "worker threads")->capture_default_str();
  abl->add_option("--n", n, "points for latency timing")->capture_default_str();
  abl->add_option("--channels", channels, "channels for latency timing")->capture_default_str();
  abl->add_option("--reps", reps, "timed repetitions (>= 3)")->capture_default_str();
  abl->add_option("--warmup", warmup, "untimed warmup repetitions")->capture_default_str();
  abl->add_option("--seed", seed, "RNG seed")->capture_default_str();
  abl->add_option("--out", out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) {
      sp::SceneConfig sc;
      sc.grid = grid.spec();
      sc.n = n;
      sc.channels = channels;
      sc.seed = seed;
      const sp::FrustumBatch batch = sp::gen_scene(sc);
      sp::write_dataset(out, batch);
      std::cout << "wrote " << batch.n << " points x " << batch.channels << " channels to " << out << " ("
                << sp::dataset_size_bytes(batch.n, batch.channels) << " bytes)\n";
    } else if (*pool) {
      sp::SceneConfig sc;
      sc.grid = grid.spec();
      sc.n = n;
      sc.channels = channels;
      sc.seed = seed;
      const sp::FrustumBatch batch = load_or_generate(in, sc);
      const sp::PoolOptions opts{k_values.empty() ? 1 : k_values.front(), sp::parse_exec_mode(mode), workers};
      const auto start = std::chrono::steady_clock::now();
      const sp::BevFeatureMap map = sp::spread_pool_forward(batch, sc.grid, weights.params(), opts);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      const double mass = std::accumulate(map.values.begin(), map.values.end(), 0.0);
      std::cout << "points=" << batch.n << " dropped=" << map.dropped_points() << " k=" << opts.k
                << " mode=" << sp::to_string(opts.mode) << " total=" << mass << " ms=" << ms << "\n";
      if (!out.empty()) sp::write_feature_map(out, map);
    } else if (*bench) {
      sp::BenchConfig cfg;
      cfg.grid = grid.spec();
      cfg.weights = weights.params();
      cfg.n = n;
      cfg.channels = channels;
      if (!k_values.empty()) cfg.k_values = k_values;
      if (!kind_list.empty()) cfg.kinds = parse_kinds(kind_list);
      if (!mode_list.empty()) {
        cfg.modes.clear();
        for (const auto& m : mode_list) cfg.modes.push_back(sp::parse_exec_mode(m));
      }
      if (!worker_list.empty()) cfg.workers = worker_list;
      cfg.reps = reps;
      cfg.warmup = warmup;
      cfg.seed = seed;
      cfg.validate();
      const sp::FrustumBatch scene = load_or_generate(in, sp::scene_config(cfg));
      cfg.n = scene.n;
      cfg.channels = scene.channels;
      emit(sp::latency_table(sp::bench_pooling(scene, cfg), cfg), out);
    } else if (*recover) {
      if (k_values.empty()) k_values = {1, 3, 4, 6};
      const sp::RecoveryReport report = sp::run_recovery_experiment(
          rgrid.spec(), k_values, samples, sigma2, seed, {sp::parse_weight_kind(weights.kind), workers});
      emit(sp::recovery_table(report), out);
    } else if (*abl) {
      sp::BenchConfig cfg;
      cfg.grid = grid.spec();
      cfg.weights = weights.params();
      cfg.n = n;
      cfg.channels = channels;
      cfg.k_values = k_values.empty() ? std::vector<std::size_t>{1, 3, 4, 6} : k_values;
      cfg.kinds = kind_list.empty() ? std::vector<sp::WeightKind>{sp::WeightKind::Gaussian, sp::WeightKind::Linear,
                                                                  sp::WeightKind::L2, sp::WeightKind::Delta}
                                    : parse_kinds(kind_list);
      cfg.modes = {sp::parse_exec_mode(mode)};
      cfg.workers = {workers};
      cfg.grid_sizes = grid_sizes;
      cfg.recovery_samples = samples;
      if (abl->count("--sigma2")) cfg.recovery_sigma2_cells = sigma2;
      cfg.reps = reps;
      cfg.warmup = warmup;
      cfg.seed = seed;
      emit(sp::ablation_table(sp::ablate(cfg), cfg), out);
    }
  } catch (const sp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sp::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const sp::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const sp::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
