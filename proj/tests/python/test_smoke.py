import math

import numpy as np
import pytest

import spreadpool

GRID = (0.0, 0.0, 1.0, 12, 10)


def make_batch(n=500, channels=4, seed=0):
    rng = np.random.default_rng(seed)
    positions = np.column_stack([rng.uniform(-0.5, 11.5, n), rng.uniform(-0.5, 9.5, n)])
    depths = rng.uniform(1.0, 100.0, n)
    features = rng.standard_normal((n, channels)).astype(np.float32)
    return positions, depths, features


def test_version_is_a_string():
    assert spreadpool.version() == spreadpool.__version__
    assert spreadpool.version().count(".") == 2


def test_select_neighbors_breaks_ties_by_index():
    got = spreadpool.select_neighbors((0.0, 0.0, 1.0, 10, 10), (0.5, 0.0), 2)
    assert [cell for cell, _ in got] == [(0, 0), (1, 0)]
    assert [d for _, d in got] == [0.5, 0.5]


def test_delta_k1_matches_snapping():
    positions, depths, features = make_batch()
    bev, ctx = spreadpool.forward(positions, depths, features, grid=GRID, kind="delta", k=1)
    assert bev.shape == (10, 12, 4) and bev.dtype == np.float32
    expected = np.zeros((10, 12, 4))
    for p, f in zip(positions, features):
        i, j = int(math.floor(p[0] + 0.5)), int(math.floor(p[1] + 0.5))
        expected[j, i] += f
    np.testing.assert_allclose(bev, expected, atol=1e-4)
    spreadpool.release(ctx)


def test_deterministic_forward_is_repeatable_across_workers():
    positions, depths, features = make_batch(n=3000, channels=8, seed=3)
    a, _ = spreadpool.forward(positions, depths, features, grid=GRID, k=6, workers=1)
    b, _ = spreadpool.forward(positions, depths, features, grid=GRID, k=6, workers=4)
    assert np.array_equal(a.view(np.uint32), b.view(np.uint32))


def test_inputs_are_not_copied():
    positions, depths, features = make_batch()
    _, ctx = spreadpool.forward(positions, depths, features, grid=GRID, k=3)
    assert ctx._input_addresses() == (positions.ctypes.data, depths.ctypes.data, features.ctypes.data)


def test_backward_matches_finite_differences():
    positions, depths, features = make_batch(n=20, channels=3, seed=5)
    kw = dict(grid=GRID, k=4, alpha=0.02)

    def loss(feats, alpha=0.02):
        bev, ctx = spreadpool.forward(positions, depths, feats, **{**kw, "alpha": alpha}, mode="reference")
        spreadpool.release(ctx)
        return float(np.sum(bev.astype(np.float64) ** 2))

    bev, ctx = spreadpool.forward(positions, depths, features, **kw)
    g_feat, g_alpha, g_depth = spreadpool.backward(2.0 * bev, ctx)
    assert g_feat.shape == features.shape and g_depth.shape == depths.shape

    h = 1e-2  # float32 inputs: loss is quadratic in features, so a large step is exact
    for idx in [(0, 0), (7, 2), (19, 1)]:
        up, down = features.copy(), features.copy()
        up[idx] += h
        down[idx] -= h
        fd = (loss(up) - loss(down)) / (2 * h)
        assert abs(g_feat[idx] - fd) <= 1e-3 * max(1.0, abs(fd))
    ha = 1e-6
    fd_alpha = (loss(features, 0.02 + ha) - loss(features, 0.02 - ha)) / (2 * ha)
    assert abs(g_alpha - fd_alpha) <= 1e-3 * max(1.0, abs(fd_alpha))


def test_delta_has_no_alpha_gradient():
    positions, depths, features = make_batch(seed=2)
    bev, ctx = spreadpool.forward(positions, depths, features, grid=GRID, kind="delta", k=3)
    _, g_alpha, g_depth = spreadpool.backward(np.ones_like(bev), ctx)
    assert g_alpha == 0.0
    assert not np.any(g_depth)


def test_release_is_idempotent_and_backward_then_fails():
    positions, depths, features = make_batch()
    bev, ctx = spreadpool.forward(positions, depths, features, grid=GRID, k=2)
    spreadpool.release(ctx)
    spreadpool.release(ctx)
    assert not ctx.live
    with pytest.raises(spreadpool.LifecycleError):
        spreadpool.backward(bev, ctx)


def test_bad_buffers_are_named():
    positions, depths, features = make_batch()
    with pytest.raises(ValueError, match="features"):
        spreadpool.forward(positions, depths, features.astype(np.float64), grid=GRID)
    with pytest.raises(ValueError, match="depths"):
        spreadpool.forward(positions, depths[:-1], features, grid=GRID)
    with pytest.raises(ValueError, match="positions"):
        spreadpool.forward(np.asfortranarray(positions), depths, features, grid=GRID)
    bev, ctx = spreadpool.forward(positions, depths, features, grid=GRID)
    with pytest.raises(ValueError, match="grad_bev"):
        spreadpool.backward(bev[:-1], ctx)


def test_aliased_inputs_are_rejected():
    buf = np.zeros(30)
    features = np.zeros((10, 2), dtype=np.float32)
    with pytest.raises(ValueError, match="alias"):
        spreadpool.forward(buf[:20].reshape(10, 2), buf[10:20], features, grid=GRID)


def test_errors_are_catchable():
    positions, depths, features = make_batch(n=5)
    features[3, 1] = np.nan
    with pytest.raises(spreadpool.NumericError, match="point 3"):
        spreadpool.forward(positions, depths, features, grid=GRID)
    with pytest.raises(ValueError):
        spreadpool.forward(positions, depths, features, grid=GRID, kind="triangle")
    with pytest.raises(ValueError):
        spreadpool.forward(positions, depths, features, grid=GRID, k=0)
