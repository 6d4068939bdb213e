#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spreadpool/errors.hpp"
#include "spreadpool/weights.hpp"

namespace sp = spreadpool;

namespace {

sp::WeightParams with(sp::WeightKind kind, double alpha = 0.02) {
  sp::WeightParams p;
  p.kind = kind;
  p.alpha = alpha;
  return p;
}

}  // namespace

TEST(SigmaSq, Examples) {
  const sp::SigmaSq a = sp::sigma_sq(with(sp::WeightKind::Gaussian, 0.02), 50.0);
  EXPECT_NEAR(a.value, 1.0, 1e-12);
  EXPECT_FALSE(a.clamped);

  const sp::SigmaSq b = sp::sigma_sq(with(sp::WeightKind::Gaussian, 0.1), 100.0);
  EXPECT_DOUBLE_EQ(b.value, 2.0);
  EXPECT_TRUE(b.clamped);

  const sp::SigmaSq c = sp::sigma_sq(with(sp::WeightKind::Gaussian, 0.0), 10.0);
  EXPECT_DOUBLE_EQ(c.value, 1e-3);
  EXPECT_TRUE(c.clamped);
}

TEST(SigmaSq, RejectsNonPositiveDepth) {
  EXPECT_THROW(sp::sigma_sq(with(sp::WeightKind::Gaussian), 0.0), sp::DomainError);
  EXPECT_THROW(sp::sigma_sq(with(sp::WeightKind::Gaussian), -1.0), sp::DomainError);
}

TEST(SigmaSq, ClampAndAlphaDerivative) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> alpha(-0.01, 0.05), depth(0.1, 120.0);
  for (int t = 0; t < 2000; ++t) {
    const sp::WeightParams p = with(sp::WeightKind::Gaussian, alpha(rng));
    const double d = depth(rng);
    const sp::SigmaSq s = sp::sigma_sq(p, d);
    ASSERT_GE(s.value, p.sigma_min);
    ASSERT_LE(s.value, p.sigma_max);
    // d(sigma^2)/d(alpha) by central differences: depth when free, 0 when clamped.
    const double h = 1e-9;
    sp::WeightParams lo = p, hi = p;
    lo.alpha -= h;
    hi.alpha += h;
    const double fd = (sp::sigma_sq(hi, d).value - sp::sigma_sq(lo, d).value) / (2 * h);
    if (std::abs(p.alpha * d - p.sigma_min) < 1e-6 || std::abs(p.alpha * d - p.sigma_max) < 1e-6) continue;
    EXPECT_NEAR(fd, s.clamped ? 0.0 : d, 1e-4 * std::max(1.0, d));
  }
}

TEST(WeightParams, Validation) {
  sp::WeightParams p;
  p.sigma_min = 0.0;
  EXPECT_THROW(p.validate(), sp::ConfigError);
  p.sigma_min = 3.0;
  EXPECT_THROW(p.validate(), sp::ConfigError);
  EXPECT_THROW(sp::parse_weight_kind("cosine"), sp::ConfigError);
  EXPECT_EQ(sp::parse_weight_kind("l2"), sp::WeightKind::L2);
}

TEST(Weight, GaussianExamples) {
  const auto p = with(sp::WeightKind::Gaussian);
  EXPECT_DOUBLE_EQ(sp::weight(p, 0.0, 0.7), 1.0);
  EXPECT_NEAR(sp::weight(p, std::sqrt(2.0), 2.0), 0.36787944117144233, 1e-15);
  const double s2 = 1.3;
  EXPECT_NEAR(sp::weight(p, std::sqrt(4.0 * s2 * std::log(10.0)), s2), 1e-4, 1e-16);
}

TEST(Weight, RejectsInvalidArguments) {
  const auto p = with(sp::WeightKind::Gaussian);
  EXPECT_THROW(sp::weight(p, -0.1, 1.0), sp::DomainError);
  EXPECT_THROW(sp::weight(p, 0.1, 1e-5), sp::DomainError);
}

TEST(Weight, DeltaAndSupport) {
  const auto delta = with(sp::WeightKind::Delta);
  EXPECT_EQ(sp::weight(delta, 0.7, 1.0, true), 1.0);
  EXPECT_EQ(sp::weight(delta, 0.0, 1.0, false), 0.0);
  const double s2 = 0.5;
  const double r0 = sp::support_radius(s2);
  // Support edge sits on the Gaussian's kSupportFloor level set.
  EXPECT_NEAR(sp::weight(with(sp::WeightKind::Gaussian), r0, s2), sp::kSupportFloor, 1e-15);
  EXPECT_EQ(sp::weight(with(sp::WeightKind::Linear), r0 * 1.0001, s2), 0.0);
  EXPECT_EQ(sp::weight(with(sp::WeightKind::L2), r0 * 1.0001, s2), 0.0);
  EXPECT_NEAR(sp::weight(with(sp::WeightKind::Linear), 0.5 * r0, s2), 0.5, 1e-15);
  EXPECT_NEAR(sp::weight(with(sp::WeightKind::L2), 0.5 * r0, s2), 0.75, 1e-15);
}

TEST(WeightGrad, Examples) {
  const auto g = with(sp::WeightKind::Gaussian);
  const sp::WeightGrad a = sp::weight_grad(g, 0.0, 0.8);
  EXPECT_DOUBLE_EQ(a.d_omega_d_dist2, -1.0 / 0.8);
  EXPECT_DOUBLE_EQ(a.d_omega_d_sigma2, 0.0);

  const double e1 = std::exp(-1.0);
  const sp::WeightGrad b = sp::weight_grad(g, std::sqrt(2.0), 2.0);
  EXPECT_NEAR(b.d_omega_d_dist2, -e1 / 2.0, 1e-15);
  EXPECT_NEAR(b.d_omega_d_sigma2, e1 * 2.0 / 4.0, 1e-15);

  const sp::WeightGrad c = sp::weight_grad(with(sp::WeightKind::Delta), 0.3, 1.0);
  EXPECT_EQ(c.d_omega_d_dist2, 0.0);
  EXPECT_EQ(c.d_omega_d_sigma2, 0.0);

  const sp::WeightGrad outside = sp::weight_grad(with(sp::WeightKind::Linear), 10.0, 1.0);
  EXPECT_EQ(outside.d_omega_d_dist2, 0.0);
  EXPECT_EQ(outside.d_omega_d_sigma2, 0.0);
}

TEST(WeightGrad, MatchesCentralDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(0.1, 3.0), var(0.05, 2.0);
  const double h = 1e-5;
  for (sp::WeightKind kind : {sp::WeightKind::Gaussian, sp::WeightKind::Linear, sp::WeightKind::L2}) {
    const auto p = with(kind);
    int checked = 0;
    while (checked < 1000) {
      const double d = dist(rng), s2 = var(rng);
      const double r0 = sp::support_radius(s2);
      if (kind != sp::WeightKind::Gaussian && std::abs(d - r0) < 1e-3) continue;
      ++checked;
      const sp::WeightGrad g = sp::weight_grad(p, d, s2);
      const double d2 = d * d;
      const double fd_d2 = (sp::weight(p, std::sqrt(d2 + h), s2) - sp::weight(p, std::sqrt(d2 - h), s2)) / (2 * h);
      const double fd_s2 = (sp::weight(p, d, s2 + h) - sp::weight(p, d, s2 - h)) / (2 * h);
      EXPECT_LT(std::abs(g.d_omega_d_dist2 - fd_d2) / std::max(1.0, std::abs(g.d_omega_d_dist2)), 1e-6)
          << sp::to_string(kind) << " d=" << d << " s2=" << s2;
      EXPECT_LT(std::abs(g.d_omega_d_sigma2 - fd_s2) / std::max(1.0, std::abs(g.d_omega_d_sigma2)), 1e-6)
          << sp::to_string(kind) << " d=" << d << " s2=" << s2;
    }
  }
}

TEST(Weight, BoundsAndGaussianMonotonicity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(0.0, 5.0), var(1e-3, 2.0);
  for (int t = 0; t < 5000; ++t) {
    const double d = dist(rng), s2 = var(rng);
    for (sp::WeightKind kind : {sp::WeightKind::Gaussian, sp::WeightKind::Linear, sp::WeightKind::L2,
                                sp::WeightKind::Delta}) {
      const double w = sp::weight(with(kind), d, s2, t % 2 == 0);
      ASSERT_GE(w, 0.0);
      ASSERT_LE(w, 1.0);
    }
    const auto g = with(sp::WeightKind::Gaussian);
    const double w = sp::weight(g, d, s2);
    const sp::WeightGrad wg = sp::weight_grad(g, d, s2);
    if (w > 0.0) {
      EXPECT_LE(wg.d_omega_d_dist2, 0.0);
      EXPECT_GE(wg.d_omega_d_sigma2, 0.0);
    }
    // Strict monotonicity where the weight is representable away from 0 and 1.
    if (w > 1e-200 && d > 1e-3) {
      EXPECT_LT(sp::weight(g, d * 1.01, s2), w);
      EXPECT_GT(sp::weight(g, d, s2 * 1.01), w);
    }
  }
}

TEST(InvertWeight, RecoversDistances) {
  for (sp::WeightKind kind : {sp::WeightKind::Gaussian, sp::WeightKind::Linear, sp::WeightKind::L2}) {
    const double s2 = 0.9, d = 0.7;
    const double w = sp::weight(with(kind), d, s2);
    const auto d2 = sp::invert_weight(kind, w, s2);
    ASSERT_TRUE(d2);
    EXPECT_NEAR(*d2, d * d, 1e-12);
  }
  EXPECT_FALSE(sp::invert_weight(sp::WeightKind::Gaussian, 0.0, 1.0));
  EXPECT_FALSE(sp::invert_weight(sp::WeightKind::Delta, 1.0, 1.0));
}
