#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spreadpool/errors.hpp"
#include "spreadpool/geometry.hpp"
#include "spreadpool/weights.hpp"

namespace spreadpool {

/// Raised when the neighbor centers cannot pin down a position (all
/// collinear, or concyclic for the joint variance solve).
class DegenerateGeometryError : public NumericError {
 public:
  using NumericError::NumericError;
};

struct RecoveryCase {
  std::vector<PointBEV> neighbor_centers;
  std::vector<double> observed_weights;
  double sigma2 = 1.0;
  WeightKind kind = WeightKind::Gaussian;
};

/// Minimum triangle area for three centers to count as non-collinear.
inline constexpr double kCollinearArea = 1e-9;

/// True when some triple of `centers` spans a triangle of area > kCollinearArea.
bool has_noncollinear_triple(const std::vector<PointBEV>& centers);

/// Decodes squared distances from the weights and solves the pairwise
/// differenced circle equations by least squares.
///
/// Throws DomainError for fewer than 3 neighbors, mismatched sizes, or a
/// weight that cannot be inverted (<= 0, > 1, or Delta kind), and
/// DegenerateGeometryError when the centers are collinear.
PointBEV recover_position(const RecoveryCase& rc);

struct PositionAndVariance {
  PointBEV position;
  double sigma2 = 0.0;
};

/// Gaussian-only variant that treats sigma^2 as a third unknown. Needs at
/// least 4 neighbors that are not all on one circle.
PositionAndVariance recover_position_and_sigma2(const std::vector<PointBEV>& centers,
                                                const std::vector<double>& weights);

/// Monte-Carlo estimate of E|p - nearest center|^2 for p uniform in one cell.
double quantization_error_mc(const BevGridSpec& spec, std::size_t samples, std::uint64_t seed);

struct RecoveryRow {
  std::size_t k = 0;
  std::size_t samples = 0;
  std::size_t failures = 0;
  double mse = 0.0;  // squared lattice units (m^2), over all samples
};

struct RecoveryReport {
  WeightKind kind = WeightKind::Gaussian;
  double sigma2 = 0.0;
  double cell_size = 0.0;
  std::vector<RecoveryRow> rows;
};

struct RecoveryOptions {
  WeightKind kind = WeightKind::Gaussian;
  unsigned workers = 1;
};

/// For each k: samples points uniformly over the lattice interior (one cell of
/// margin, so no neighbor window is clipped), spreads them with the pooling
/// kernel and tries to recover each position from the emitted
/// (center, weight) pairs.
///
/// A sample fails when fewer than three non-collinear neighbors carry an
/// invertible weight; its estimate is then the weight-averaged center of the
/// neighbors with positive weight. With k = 1 every sample fails and the MSE
/// is the snap-to-center quantization error.
RecoveryReport run_recovery_experiment(const BevGridSpec& spec, const std::vector<std::size_t>& k_values,
                                       std::size_t samples, double sigma2, std::uint64_t seed,
                                       const RecoveryOptions& options = {});

}  // namespace spreadpool
