#include "spreadpool/pool.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "spreadpool/errors.hpp"
#include "spreadpool/parallel.hpp"

namespace spreadpool {

void FrustumBatchView::validate_shape() const {
  if (positions.size() != 2 * n) {
    throw ConfigError("positions buffer holds " + std::to_string(positions.size()) +
                      " values, expected " + std::to_string(2 * n));
  }
  if (depths.size() != n) {
    throw ConfigError("depths buffer holds " + std::to_string(depths.size()) + " values, expected " +
                      std::to_string(n));
  }
  if (features.size() != n * channels) {
    throw ConfigError("features buffer holds " + std::to_string(features.size()) +
                      " values, expected " + std::to_string(n * channels));
  }
}

std::string_view to_string(ExecMode mode) {
  switch (mode) {
    case ExecMode::Fast: return "fast";
    case ExecMode::Deterministic: return "deterministic";
    case ExecMode::Reference: return "reference";
  }
  return "unknown";
}

ExecMode parse_exec_mode(std::string_view name) {
  if (name == "fast") return ExecMode::Fast;
  if (name == "deterministic") return ExecMode::Deterministic;
  if (name == "reference") return ExecMode::Reference;
  throw ConfigError("unknown execution mode '" + std::string(name) + "'");
}

namespace {

constexpr std::size_t kNoError = std::numeric_limits<std::size_t>::max();

struct PointError {
  std::size_t point = kNoError;
  enum class Kind { None, Position, Depth, Feature } kind = Kind::None;
  std::size_t channel = 0;
};

void check_setup(const FrustumBatchView& batch, const BevGridSpec& spec, const WeightParams& params,
                 std::size_t k) {
  batch.validate_shape();
  spec.validate();
  params.validate();
  if (k == 0) throw ConfigError("neighbor count k must be at least 1");
  if (spec.cell_count() > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw ConfigError("lattice has too many cells");
  }
}

[[noreturn]] void raise(const PointError& err) {
  const std::string where = "point " + std::to_string(err.point);
  switch (err.kind) {
    case PointError::Kind::Position:
      throw NumericError("non-finite position at " + where);
    case PointError::Kind::Depth:
      throw DomainError("non-positive or non-finite depth at " + where);
    case PointError::Kind::Feature:
      throw NumericError("non-finite feature at " + where + ", channel " + std::to_string(err.channel));
    case PointError::Kind::None:
      break;
  }
  throw NumericError("invalid input at " + where);
}

// Neighbor selection, weights and validation for every point. Errors are
// reported for the lowest offending point index, independent of scheduling.
void fill_saved(SavedForBackward& saved, const FrustumBatchView& batch, const BevGridSpec& spec,
                const WeightParams& params, std::size_t k, unsigned workers) {
  const std::size_t n = batch.n;
  saved.spec = spec;
  saved.params = params;
  saved.n = n;
  saved.k = k;
  saved.channels = batch.channels;
  saved.counts.resize(n);
  saved.cells.resize(n * k);
  saved.weights.resize(n * k);
  saved.distances.resize(n * k);
  saved.sigma2.resize(n);
  saved.clamped.resize(n);

  if (workers == 0) workers = default_workers();
  const std::size_t blocks = std::max<std::size_t>(1, std::min<std::size_t>(workers, n));
  std::vector<PointError> errors(blocks);
  std::vector<std::size_t> dropped(blocks, 0);

  parallel_for(static_cast<unsigned>(blocks), n, [&](std::size_t begin, std::size_t end, unsigned w) {
    NeighborSearcher searcher(spec, k);
    std::vector<Neighbor> found(k);
    for (std::size_t p = begin; p < end; ++p) {
      const PointBEV pos = batch.position(p);
      if (!std::isfinite(pos.x) || !std::isfinite(pos.y)) {
        errors[w] = {p, PointError::Kind::Position, 0};
        return;
      }
      const double depth = batch.depths[p];
      if (!(depth > 0.0) || !std::isfinite(depth)) {
        errors[w] = {p, PointError::Kind::Depth, 0};
        return;
      }
      const auto feat = batch.feature(p);
      for (std::size_t c = 0; c < feat.size(); ++c) {
        if (!std::isfinite(feat[c])) {
          errors[w] = {p, PointError::Kind::Feature, c};
          return;
        }
      }

      const SigmaSq s2 = sigma_sq(params, depth);
      saved.sigma2[p] = s2.value;
      saved.clamped[p] = s2.clamped ? 1 : 0;

      std::size_t m = 0;
      if (locate_cell(spec, pos)) {
        m = searcher.search(pos, found);
      } else {
        ++dropped[w];
      }
      saved.counts[p] = static_cast<std::uint32_t>(m);
      const std::size_t base = p * k;
      for (std::size_t s = 0; s < k; ++s) {
        if (s < m) {
          saved.cells[base + s] = static_cast<std::int32_t>(found[s].linear);
          saved.distances[base + s] = found[s].distance;
          saved.weights[base + s] = detail::weight_unchecked(params.kind, found[s].distance, s2.value, s == 0);
        } else {
          saved.cells[base + s] = -1;
          saved.distances[base + s] = 0.0;
          saved.weights[base + s] = 0.0;
        }
      }
    }
  });

  for (const PointError& err : errors) {
    if (err.point != kNoError) raise(err);
  }
  saved.dropped = 0;
  for (std::size_t d : dropped) saved.dropped += d;
}

void accumulate_fast(BevFeatureMap& out, const FrustumBatchView& batch, unsigned workers) {
  const SavedForBackward& saved = out.saved;
  const std::size_t k = saved.k;
  const std::size_t channels = batch.channels;
  const unsigned effective = workers == 0 ? default_workers() : workers;
  const bool shared = std::min<std::size_t>(effective, batch.n) > 1;
  float* values = out.values.data();

  parallel_for(workers, batch.n, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t p = begin; p < end; ++p) {
      const float* feat = batch.features.data() + p * channels;
      for (std::size_t s = 0; s < saved.counts[p]; ++s) {
        const std::size_t slot = p * k + s;
        const float w = static_cast<float>(saved.weights[slot]);
        if (w == 0.0f) continue;
        float* dst = values + static_cast<std::size_t>(saved.cells[slot]) * channels;
        if (shared) {
          for (std::size_t c = 0; c < channels; ++c) {
            std::atomic_ref<float>(dst[c]).fetch_add(w * feat[c], std::memory_order_relaxed);
          }
        } else {
          for (std::size_t c = 0; c < channels; ++c) dst[c] += w * feat[c];
        }
      }
    }
  });
}

// Contributions are bucketed by target cell with a stable counting sort, so
// each cell sums its contributions in point order no matter how cells are
// split between workers.
void accumulate_deterministic(BevFeatureMap& out, const FrustumBatchView& batch, unsigned workers) {
  const SavedForBackward& saved = out.saved;
  const std::size_t k = saved.k;
  const std::size_t channels = batch.channels;
  const std::size_t cells = static_cast<std::size_t>(out.nx * out.ny);

  std::vector<std::size_t> offsets(cells + 1, 0);
  for (std::size_t p = 0; p < batch.n; ++p) {
    for (std::size_t s = 0; s < saved.counts[p]; ++s) {
      const std::size_t slot = p * k + s;
      if (static_cast<float>(saved.weights[slot]) != 0.0f) {
        ++offsets[static_cast<std::size_t>(saved.cells[slot]) + 1];
      }
    }
  }
  for (std::size_t c = 0; c < cells; ++c) offsets[c + 1] += offsets[c];

  std::vector<std::size_t> order(offsets[cells]);
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t p = 0; p < batch.n; ++p) {
    for (std::size_t s = 0; s < saved.counts[p]; ++s) {
      const std::size_t slot = p * k + s;
      if (static_cast<float>(saved.weights[slot]) != 0.0f) {
        order[cursor[static_cast<std::size_t>(saved.cells[slot])]++] = slot;
      }
    }
  }

  float* values = out.values.data();
  parallel_for(workers, cells, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t cell = begin; cell < end; ++cell) {
      float* dst = values + cell * channels;
      for (std::size_t e = offsets[cell]; e < offsets[cell + 1]; ++e) {
        const std::size_t slot = order[e];
        const float w = static_cast<float>(saved.weights[slot]);
        const float* feat = batch.features.data() + (slot / k) * channels;
        for (std::size_t c = 0; c < channels; ++c) dst[c] += w * feat[c];
      }
    }
  });
}

template <typename T>
void reset_map(BasicFeatureMap<T>& out, const BevGridSpec& spec, std::size_t channels) {
  out.nx = spec.nx;
  out.ny = spec.ny;
  out.channels = channels;
  out.values.assign(spec.cell_count() * channels, T{0});
}

}  // namespace

void spread_pool_forward_into(BevFeatureMap& out, const FrustumBatchView& batch, const BevGridSpec& spec,
                              const WeightParams& params, const PoolOptions& options) {
  check_setup(batch, spec, params, options.k);
  if (options.mode == ExecMode::Reference) {
    ReferenceFeatureMap ref = pool_reference(batch, spec, params, options.k);
    reset_map(out, spec, batch.channels);
    std::transform(ref.values.begin(), ref.values.end(), out.values.begin(),
                   [](double v) { return static_cast<float>(v); });
    out.saved = std::move(ref.saved);
    return;
  }
  fill_saved(out.saved, batch, spec, params, options.k, options.workers);
  reset_map(out, spec, batch.channels);
  if (options.mode == ExecMode::Fast) {
    accumulate_fast(out, batch, options.workers);
  } else {
    accumulate_deterministic(out, batch, options.workers);
  }
}

BevFeatureMap spread_pool_forward(const FrustumBatchView& batch, const BevGridSpec& spec,
                                  const WeightParams& params, const PoolOptions& options) {
  BevFeatureMap out;
  spread_pool_forward_into(out, batch, spec, params, options);
  return out;
}

BevFeatureMap baseline_pool(const FrustumBatchView& batch, const BevGridSpec& spec) {
  WeightParams params;
  params.kind = WeightKind::Delta;
  check_setup(batch, spec, params, 1);

  BevFeatureMap out;
  fill_saved(out.saved, batch, spec, params, 1, 1);
  reset_map(out, spec, batch.channels);
  for (std::size_t p = 0; p < batch.n; ++p) {
    const PointBEV pos = batch.position(p);
    if (!locate_cell(spec, pos)) continue;
    const auto feat = batch.feature(p);
    auto dst = out.cell(spec.linear(nearest_cell(spec, pos)));
    for (std::size_t c = 0; c < feat.size(); ++c) dst[c] += feat[c];
  }
  return out;
}

ReferenceFeatureMap pool_reference(const FrustumBatchView& batch, const BevGridSpec& spec,
                                   const WeightParams& params, std::size_t k) {
  check_setup(batch, spec, params, k);
  ReferenceFeatureMap out;
  fill_saved(out.saved, batch, spec, params, k, 1);
  reset_map(out, spec, batch.channels);
  const SavedForBackward& saved = out.saved;
  for (std::size_t p = 0; p < batch.n; ++p) {
    const auto feat = batch.feature(p);
    for (std::size_t s = 0; s < saved.counts[p]; ++s) {
      const std::size_t slot = p * k + s;
      const double w = saved.weights[slot];
      auto dst = out.cell(saved.cells[slot]);
      for (std::size_t c = 0; c < feat.size(); ++c) dst[c] += w * static_cast<double>(feat[c]);
    }
  }
  return out;
}

PoolGradients spread_pool_backward(std::span<const float> grad_bev, const SavedForBackward& saved,
                                   const FrustumBatchView& batch, const WeightParams& params,
                                   unsigned workers) {
  batch.validate_shape();
  const std::size_t channels = batch.channels;
  if (saved.n != batch.n || saved.channels != channels) {
    throw DomainError("saved forward state does not match the batch shape");
  }
  if (grad_bev.size() != saved.spec.cell_count() * channels) {
    throw DomainError("gradient map holds " + std::to_string(grad_bev.size()) + " values, expected " +
                      std::to_string(saved.spec.cell_count() * channels));
  }
  if (params.kind != saved.params.kind) {
    throw ConfigError("weight kind differs from the one used in the forward pass");
  }

  const std::size_t n = batch.n;
  const std::size_t k = saved.k;
  PoolGradients grads;
  grads.grad_features.assign(n * channels, 0.0f);
  grads.grad_depths.assign(n, 0.0);
  std::vector<double> alpha_terms(n, 0.0);

  parallel_for(workers, n, [&](std::size_t begin, std::size_t end, unsigned) {
    std::vector<double> feat_grad(channels);
    for (std::size_t p = begin; p < end; ++p) {
      std::fill(feat_grad.begin(), feat_grad.end(), 0.0);
      const auto feat = batch.feature(p);
      double d_sigma2 = 0.0;
      for (std::size_t s = 0; s < saved.counts[p]; ++s) {
        const std::size_t slot = p * k + s;
        const double w = saved.weights[slot];
        const float* g = grad_bev.data() + static_cast<std::size_t>(saved.cells[slot]) * channels;
        double d_omega = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
          feat_grad[c] += w * static_cast<double>(g[c]);
          d_omega += static_cast<double>(feat[c]) * static_cast<double>(g[c]);
        }
        const WeightGrad wg =
            detail::weight_grad_unchecked(params.kind, saved.distances[slot], saved.sigma2[p], s == 0);
        d_sigma2 += d_omega * wg.d_omega_d_sigma2;
      }
      for (std::size_t c = 0; c < channels; ++c) {
        grads.grad_features[p * channels + c] = static_cast<float>(feat_grad[c]);
      }
      if (!saved.clamped[p]) {
        alpha_terms[p] = d_sigma2 * batch.depths[p];
        grads.grad_depths[p] = d_sigma2 * params.alpha;
      }
    }
  });

  for (double term : alpha_terms) grads.grad_alpha += term;
  return grads;
}

}  // namespace spreadpool
