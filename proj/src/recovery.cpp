#include "spreadpool/recovery.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "spreadpool/parallel.hpp"
#include "spreadpool/pool.hpp"

namespace spreadpool {

namespace {

double triangle_area(PointBEV a, PointBEV b, PointBEV c) {
  return 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

PointBEV centroid(const std::vector<PointBEV>& pts) {
  PointBEV m;
  for (const PointBEV& p : pts) {
    m.x += p.x;
    m.y += p.y;
  }
  m.x /= static_cast<double>(pts.size());
  m.y /= static_cast<double>(pts.size());
  return m;
}

}  // namespace

bool has_noncollinear_triple(const std::vector<PointBEV>& centers) {
  const std::size_t m = centers.size();
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      for (std::size_t c = b + 1; c < m; ++c) {
        if (triangle_area(centers[a], centers[b], centers[c]) > kCollinearArea) return true;
      }
    }
  }
  return false;
}

PointBEV recover_position(const RecoveryCase& rc) {
  const std::size_t m = rc.neighbor_centers.size();
  if (m < 3) throw DomainError("position recovery needs at least 3 neighbors, got " + std::to_string(m));
  if (rc.observed_weights.size() != m) throw DomainError("neighbor and weight counts differ");

  std::vector<double> d2(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto decoded = invert_weight(rc.kind, rc.observed_weights[i], rc.sigma2);
    if (!decoded) {
      throw DomainError("weight " + std::to_string(rc.observed_weights[i]) + " of neighbor " +
                        std::to_string(i) + " carries no distance information");
    }
    d2[i] = *decoded;
  }
  if (!has_noncollinear_triple(rc.neighbor_centers)) {
    throw DegenerateGeometryError("neighbor centers are collinear");
  }

  // Work relative to the centroid and difference against the closest neighbor.
  const PointBEV mean = centroid(rc.neighbor_centers);
  const std::size_t anchor = static_cast<std::size_t>(std::min_element(d2.begin(), d2.end()) - d2.begin());
  const double ax = rc.neighbor_centers[anchor].x - mean.x;
  const double ay = rc.neighbor_centers[anchor].y - mean.y;

  Eigen::MatrixXd a(m - 1, 2);
  Eigen::VectorXd b(m - 1);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == anchor) continue;
    const double cx = rc.neighbor_centers[i].x - mean.x;
    const double cy = rc.neighbor_centers[i].y - mean.y;
    a(row, 0) = 2.0 * (cx - ax);
    a(row, 1) = 2.0 * (cy - ay);
    b(row) = (cx * cx + cy * cy) - (ax * ax + ay * ay) - d2[i] + d2[anchor];
    ++row;
  }
  const Eigen::Vector2d q = a.colPivHouseholderQr().solve(b);
  return {q.x() + mean.x, q.y() + mean.y};
}

PositionAndVariance recover_position_and_sigma2(const std::vector<PointBEV>& centers,
                                                const std::vector<double>& weights) {
  const std::size_t m = centers.size();
  if (m < 4) throw DomainError("joint variance recovery needs at least 4 neighbors");
  if (weights.size() != m) throw DomainError("neighbor and weight counts differ");
  std::vector<double> logw(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(weights[i] > 0.0) || weights[i] > 1.0) throw DomainError("weights must lie in (0, 1]");
    logw[i] = std::log(weights[i]);
  }
  if (!has_noncollinear_triple(centers)) throw DegenerateGeometryError("neighbor centers are collinear");

  // |q - c_i|^2 = -sigma2 * log(w_i), differenced against neighbor 0.
  const PointBEV mean = centroid(centers);
  const double ax = centers[0].x - mean.x;
  const double ay = centers[0].y - mean.y;
  Eigen::MatrixXd a(m - 1, 3);
  Eigen::VectorXd b(m - 1);
  for (std::size_t i = 1; i < m; ++i) {
    const double cx = centers[i].x - mean.x;
    const double cy = centers[i].y - mean.y;
    const auto r = static_cast<Eigen::Index>(i - 1);
    a(r, 0) = 2.0 * (cx - ax);
    a(r, 1) = 2.0 * (cy - ay);
    a(r, 2) = -(logw[i] - logw[0]);
    b(r) = (cx * cx + cy * cy) - (ax * ax + ay * ay);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw DegenerateGeometryError("neighbor centers are concyclic; variance is not identifiable");
  const Eigen::Vector3d sol = qr.solve(b);
  return {{sol.x() + mean.x, sol.y() + mean.y}, sol.z()};
}

double quantization_error_mc(const BevGridSpec& spec, std::size_t samples, std::uint64_t seed) {
  spec.validate();
  if (samples == 0) throw ConfigError("sample count must be at least 1");
  std::mt19937_64 rng(seed);
  const double half = 0.5 * spec.cell_size;
  std::uniform_real_distribution<double> offset(-half, half);
  double sum = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double dx = offset(rng);
    const double dy = offset(rng);
    sum += dx * dx + dy * dy;
  }
  return sum / static_cast<double>(samples);
}

RecoveryReport run_recovery_experiment(const BevGridSpec& spec, const std::vector<std::size_t>& k_values,
                                       std::size_t samples, double sigma2, std::uint64_t seed,
                                       const RecoveryOptions& options) {
  spec.validate();
  if (k_values.empty()) throw ConfigError("at least one k value is required");
  if (samples == 0) throw ConfigError("sample count must be at least 1");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ConfigError("sigma^2 must be positive");

  // Sample over whole interior cells when the lattice is wide enough.
  PointBEV lo = spec.extent_min();
  PointBEV hi = spec.extent_max();
  if (spec.nx >= 3) {
    lo.x += spec.cell_size;
    hi.x -= spec.cell_size;
  }
  if (spec.ny >= 3) {
    lo.y += spec.cell_size;
    hi.y -= spec.cell_size;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x, hi.x);
  std::uniform_real_distribution<double> uy(lo.y, hi.y);

  FrustumBatch batch(samples, 1);
  for (std::size_t p = 0; p < samples; ++p) {
    batch.positions[2 * p] = ux(rng);
    batch.positions[2 * p + 1] = uy(rng);
    batch.depths[p] = sigma2;
    batch.features[p] = 1.0f;
  }

  // alpha = 1 with depth = sigma2 makes every point use exactly sigma2.
  WeightParams params;
  params.kind = options.kind;
  params.alpha = 1.0;
  params.sigma_min = std::min(1e-3, 0.5 * sigma2);
  params.sigma_max = std::max(2.0, 2.0 * sigma2);

  RecoveryReport report;
  report.kind = options.kind;
  report.sigma2 = sigma2;
  report.cell_size = spec.cell_size;

  for (std::size_t k : k_values) {
    const BevFeatureMap map =
        spread_pool_forward(batch.view(), spec, params, {k, ExecMode::Deterministic, options.workers});
    const SavedForBackward& saved = map.saved;

    std::vector<double> sq_err(samples, 0.0);
    std::vector<std::uint8_t> failed(samples, 0);
    parallel_for(options.workers, samples, [&](std::size_t begin, std::size_t end, unsigned) {
      RecoveryCase rc;
      rc.sigma2 = sigma2;
      rc.kind = options.kind;
      for (std::size_t p = begin; p < end; ++p) {
        rc.neighbor_centers.clear();
        rc.observed_weights.clear();
        PointBEV fallback{};
        double weight_sum = 0.0;
        PointBEV nearest{};
        for (std::size_t s = 0; s < saved.counts[p]; ++s) {
          const std::size_t slot = p * k + s;
          const CellIndex cell = spec.unlinear(saved.cells[slot]);
          const PointBEV center{spec.center_x(cell.i), spec.center_y(cell.j)};
          const double w = saved.weights[slot];
          if (s == 0) nearest = center;
          if (w > 0.0) {
            fallback.x += w * center.x;
            fallback.y += w * center.y;
            weight_sum += w;
          }
          if (invert_weight(options.kind, w, sigma2)) {
            rc.neighbor_centers.push_back(center);
            rc.observed_weights.push_back(w);
          }
        }

        PointBEV estimate = nearest;
        bool recovered = false;
        if (rc.neighbor_centers.size() >= 3 && has_noncollinear_triple(rc.neighbor_centers)) {
          estimate = recover_position(rc);
          recovered = true;
        } else if (weight_sum > 0.0) {
          estimate = {fallback.x / weight_sum, fallback.y / weight_sum};
        }
        const double dx = estimate.x - batch.positions[2 * p];
        const double dy = estimate.y - batch.positions[2 * p + 1];
        sq_err[p] = dx * dx + dy * dy;
        failed[p] = recovered ? 0 : 1;
      }
    });

    RecoveryRow row;
    row.k = k;
    row.samples = samples;
    double sum = 0.0;
    for (std::size_t p = 0; p < samples; ++p) {
      sum += sq_err[p];
      row.failures += failed[p];
    }
    row.mse = sum / static_cast<double>(samples);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace spreadpool
