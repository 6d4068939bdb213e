#pragma once

#include <cmath>
#include <optional>
#include <string_view>

namespace spreadpool {

enum class WeightKind { Gaussian, Linear, L2, Delta };

std::string_view to_string(WeightKind kind);
/// Parses "gaussian", "linear", "l2" or "delta". Throws ConfigError otherwise.
WeightKind parse_weight_kind(std::string_view name);

/// Weight level at which the Linear and L2 kernels reach zero: their cutoff
/// radius is the distance where the Gaussian of the same variance equals it.
inline constexpr double kSupportFloor = 1e-3;

struct WeightParams {
  WeightKind kind = WeightKind::Gaussian;
  double alpha = 1.0 / 50.5;  // sigma^2 = 1 at the median of a 1..100 m depth range
  double sigma_min = 1e-3;
  double sigma_max = 2.0;

  /// Throws ConfigError unless 0 < sigma_min < sigma_max and alpha is finite.
  void validate() const;
};

/// Alpha that maps `median_depth` to sigma^2 = 1.
double default_alpha(double median_depth);

struct SigmaSq {
  double value = 0.0;
  bool clamped = false;  // true when a clamp bound is active; d(value)/d(alpha) is then 0
};

struct WeightGrad {
  double d_omega_d_dist2 = 0.0;
  double d_omega_d_sigma2 = 0.0;
};

/// sigma^2 = clamp(alpha * depth, sigma_min, sigma_max). Throws DomainError
/// for depth <= 0.
SigmaSq sigma_sq(const WeightParams& params, double depth);

/// Cutoff radius of the Linear and L2 kernels for variance `sigma2`.
inline double support_radius(double sigma2) { return std::sqrt(sigma2 * std::log(1.0 / kSupportFloor)); }

/// Weight of a neighbor at distance `dist`. `is_nearest` only matters for
/// Delta, which puts all of the weight on the nearest center.
/// Throws DomainError if dist < 0 or sigma2 < params.sigma_min.
double weight(const WeightParams& params, double dist, double sigma2, bool is_nearest = true);

/// Analytic partials of weight(). Outside the Linear/L2 support both are 0.
/// Linear's distance partial is unbounded at dist = 0; 0 is returned there.
WeightGrad weight_grad(const WeightParams& params, double dist, double sigma2, bool is_nearest = true);

/// Distance squared that produced weight `omega` under `kind`, or empty when
/// the weight carries no distance information (omega <= 0, omega > 1, Delta).
std::optional<double> invert_weight(WeightKind kind, double omega, double sigma2);

namespace detail {

// Unchecked kernels used by the pooling loops; arguments are assumed valid.
inline double weight_unchecked(WeightKind kind, double dist, double sigma2, bool is_nearest) {
  switch (kind) {
    case WeightKind::Gaussian:
      return std::exp(-(dist * dist) / sigma2);
    case WeightKind::Linear: {
      const double r0 = support_radius(sigma2);
      return dist < r0 ? 1.0 - dist / r0 : 0.0;
    }
    case WeightKind::L2: {
      const double r0sq = sigma2 * std::log(1.0 / kSupportFloor);
      const double d2 = dist * dist;
      return d2 < r0sq ? 1.0 - d2 / r0sq : 0.0;
    }
    case WeightKind::Delta:
      return is_nearest ? 1.0 : 0.0;
  }
  return 0.0;
}

inline WeightGrad weight_grad_unchecked(WeightKind kind, double dist, double sigma2, bool is_nearest) {
  (void)is_nearest;
  const double d2 = dist * dist;
  switch (kind) {
    case WeightKind::Gaussian: {
      const double w = std::exp(-d2 / sigma2);
      return {-w / sigma2, w * d2 / (sigma2 * sigma2)};
    }
    case WeightKind::Linear: {
      const double r0 = support_radius(sigma2);
      if (dist >= r0) return {};
      const double dd2 = dist > 0.0 ? -1.0 / (2.0 * dist * r0) : 0.0;
      return {dd2, dist / (2.0 * sigma2 * r0)};
    }
    case WeightKind::L2: {
      const double r0sq = sigma2 * std::log(1.0 / kSupportFloor);
      if (d2 >= r0sq) return {};
      return {-1.0 / r0sq, d2 / (r0sq * sigma2)};
    }
    case WeightKind::Delta:
      return {};
  }
  return {};
}

}  // namespace detail

}  // namespace spreadpool
