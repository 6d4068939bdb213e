#include "spreadpool/weights.hpp"

#include <algorithm>
#include <string>

#include "spreadpool/errors.hpp"

namespace spreadpool {

std::string_view to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::Gaussian: return "gaussian";
    case WeightKind::Linear: return "linear";
    case WeightKind::L2: return "l2";
    case WeightKind::Delta: return "delta";
  }
  return "unknown";
}

WeightKind parse_weight_kind(std::string_view name) {
  if (name == "gaussian") return WeightKind::Gaussian;
  if (name == "linear") return WeightKind::Linear;
  if (name == "l2") return WeightKind::L2;
  if (name == "delta") return WeightKind::Delta;
  throw ConfigError("unknown weight kind '" + std::string(name) + "'");
}

void WeightParams::validate() const {
  if (!std::isfinite(alpha)) throw ConfigError("alpha must be finite");
  if (!(sigma_min > 0.0) || !(sigma_min < sigma_max) || !std::isfinite(sigma_max)) {
    throw ConfigError("variance clamp requires 0 < sigma_min < sigma_max");
  }
}

double default_alpha(double median_depth) {
  if (!(median_depth > 0.0)) throw DomainError("median depth must be positive");
  return 1.0 / median_depth;
}

SigmaSq sigma_sq(const WeightParams& params, double depth) {
  if (!(depth > 0.0)) throw DomainError("depth must be positive, got " + std::to_string(depth));
  const double raw = params.alpha * depth;
  if (raw < params.sigma_min) return {params.sigma_min, true};
  if (raw > params.sigma_max) return {params.sigma_max, true};
  return {raw, false};
}

namespace {

void check_weight_args(const WeightParams& params, double dist, double sigma2) {
  if (!(dist >= 0.0)) throw DomainError("distance must be non-negative");
  if (!(sigma2 >= params.sigma_min)) throw DomainError("sigma^2 is below the lower clamp");
}

}  // namespace

double weight(const WeightParams& params, double dist, double sigma2, bool is_nearest) {
  check_weight_args(params, dist, sigma2);
  return detail::weight_unchecked(params.kind, dist, sigma2, is_nearest);
}

WeightGrad weight_grad(const WeightParams& params, double dist, double sigma2, bool is_nearest) {
  check_weight_args(params, dist, sigma2);
  return detail::weight_grad_unchecked(params.kind, dist, sigma2, is_nearest);
}

std::optional<double> invert_weight(WeightKind kind, double omega, double sigma2) {
  if (!(omega > 0.0) || omega > 1.0) return std::nullopt;
  switch (kind) {
    case WeightKind::Gaussian:
      return -sigma2 * std::log(omega);
    case WeightKind::Linear: {
      const double d = support_radius(sigma2) * (1.0 - omega);
      return d * d;
    }
    case WeightKind::L2:
      return sigma2 * std::log(1.0 / kSupportFloor) * (1.0 - omega);
    case WeightKind::Delta:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace spreadpool
