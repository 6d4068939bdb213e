#include <gtest/gtest.h>

#include <sstream>

#include "spreadpool/bench.hpp"
#include "spreadpool/csv.hpp"
#include "spreadpool/errors.hpp"

namespace sp = spreadpool;

namespace {

sp::BenchConfig small_bench() {
  sp::BenchConfig cfg;
  cfg.grid = {0.2, 0.2, 0.4, 20, 20};
  cfg.n = 2000;
  cfg.channels = 4;
  cfg.k_values = {1, 3};
  cfg.reps = 3;
  cfg.warmup = 0;
  cfg.grid_sizes = {0.8, 0.4};
  cfg.recovery_samples = 3000;
  cfg.modes = {sp::ExecMode::Fast};
  cfg.kinds = {sp::WeightKind::Gaussian, sp::WeightKind::Linear, sp::WeightKind::L2, sp::WeightKind::Delta};
  return cfg;
}

}  // namespace

TEST(SummarizeLatency, MedianAndNearestRankP95) {
  const auto s = sp::summarize_latency({5.0, 1.0, 3.0, 2.0, 4.0});
  EXPECT_EQ(s.median_ms, 3.0);
  EXPECT_EQ(s.p95_ms, 5.0);
  const auto e = sp::summarize_latency({4.0, 1.0, 2.0, 3.0});
  EXPECT_EQ(e.median_ms, 2.5);
  std::vector<double> many;
  for (int i = 1; i <= 100; ++i) many.push_back(i);
  EXPECT_EQ(sp::summarize_latency(many).p95_ms, 95.0);
}

TEST(BenchConfig, Validation) {
  auto cfg = small_bench();
  EXPECT_NO_THROW(cfg.validate());
  cfg.reps = 2;
  EXPECT_THROW(cfg.validate(), sp::ConfigError);
  cfg = small_bench();
  cfg.k_values = {0};
  EXPECT_THROW(cfg.validate(), sp::ConfigError);
  cfg = small_bench();
  cfg.n = 0;
  EXPECT_THROW(cfg.validate(), sp::ConfigError);
}

TEST(Csv, VersionLineAndRoundTrip) {
  sp::CsvTable t;
  t.comments = {"hello"};
  t.columns = {"a", "b"};
  t.rows = {{"1", "x"}, {"2.5", "y"}};
  std::ostringstream out;
  sp::write_csv(out, t);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("# spreadpool-csv-version: 1\n", 0), 0u);
  std::istringstream in(text);
  const auto back = sp::parse_csv(in);
  EXPECT_EQ(back.comments, t.comments);
  EXPECT_EQ(back.columns, t.columns);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("b"), 1u);
  EXPECT_THROW(back.column("zzz"), sp::ConfigError);
}

TEST(Csv, RejectsUnknownVersion) {
  std::istringstream v2("# spreadpool-csv-version: 2\na,b\n1,2\n");
  EXPECT_THROW(sp::parse_csv(v2), sp::IoError);
  std::istringstream none("a,b\n1,2\n");
  EXPECT_THROW(sp::parse_csv(none), sp::IoError);
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678}) {
    EXPECT_EQ(std::stod(sp::format_double(v)), v);
  }
}

TEST(Regrid, KeepsCoveredRange) {
  const sp::BevGridSpec base{0.2, 0.2, 0.4, 250, 250};
  const auto g = sp::regrid(base, 0.8);
  EXPECT_EQ(g.nx, 125);
  EXPECT_EQ(g.ny, 125);
  EXPECT_DOUBLE_EQ(g.extent_min().x, base.extent_min().x);
  EXPECT_NEAR(g.extent_max().y, base.extent_max().y, 1e-9);
}

TEST(BenchPooling, EmitsOneRowPerCombination) {
  auto cfg = small_bench();
  cfg.kinds = {sp::WeightKind::Gaussian};
  cfg.modes = {sp::ExecMode::Fast, sp::ExecMode::Deterministic};
  const auto scene = sp::gen_scene(sp::scene_config(cfg));
  const auto rows = sp::bench_pooling(scene, cfg);
  ASSERT_EQ(rows.size(), 1u + 2u * 2u);
  EXPECT_EQ(rows[0].mode, "baseline");
  for (const auto& r : rows) {
    EXPECT_GE(r.p95_ms, r.median_ms);
    EXPECT_EQ(r.reps, 3u);
  }
  const auto table = sp::latency_table(rows, cfg);
  EXPECT_EQ(table.rows.size(), rows.size());
  EXPECT_EQ(table.columns.back(), "p95_ms");
}

TEST(Ablate, GaussianRecoversBestAndDeltaIgnoresVariance) {
  auto cfg = small_bench();
  const auto rows = sp::ablate(cfg);
  ASSERT_EQ(rows.size(), cfg.grid_sizes.size() * cfg.kinds.size() * cfg.k_values.size());

  auto find = [&](const std::vector<sp::AblationRow>& rs, double g, sp::WeightKind kind, std::size_t k) {
    for (const auto& r : rs) {
      if (r.grid_size == g && r.kind == kind && r.k == k) return r;
    }
    ADD_FAILURE() << "missing row";
    return sp::AblationRow{};
  };
  for (double g : cfg.grid_sizes) {
    const auto gauss = find(rows, g, sp::WeightKind::Gaussian, 3);
    EXPECT_LT(gauss.mse, find(rows, g, sp::WeightKind::Linear, 3).mse);
    EXPECT_LT(gauss.mse, find(rows, g, sp::WeightKind::L2, 3).mse);
    EXPECT_LT(gauss.mse, find(rows, g, sp::WeightKind::Delta, 3).mse);
    EXPECT_NEAR(find(rows, g, sp::WeightKind::Delta, 1).mse, g * g / 6.0, 0.1 * g * g / 6.0);
  }

  auto wider = cfg;
  wider.kinds = {sp::WeightKind::Delta};
  wider.recovery_sigma2_cells = 0.6;
  cfg.kinds = {sp::WeightKind::Delta};
  const auto a = sp::ablate(cfg);
  const auto b = sp::ablate(wider);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].mse, b[i].mse);

  const auto table = sp::ablation_table(rows, cfg);
  EXPECT_EQ(table.rows.size(), rows.size());
}
