import numpy as np
import pytest

from bellforge import _kernels


pytestmark = pytest.mark.skipif(
    _kernels.njit is None, reason="numba unavailable; twin comparison needs both paths"
)


def _random_corr(rng, shape):
    return rng.uniform(-1.0, 1.0, size=shape)


def test_chsh_scan_twins_bit_identical():
    rng = np.random.default_rng(0)
    for _ in range(5):
        mats = [_random_corr(rng, (9, 9)) for _ in range(4)]
        a = _kernels.chsh_scan_numpy(*mats)
        b = _kernels.chsh_scan_numba(*mats)
        assert a[0] == b[0]
        assert a[1:] == tuple(int(v) for v in b[1:])


def test_chsh_scan_ties_resolve_lexicographically():
    c = np.ones((3, 3))
    val, ia, iap, ib, ibp = _kernels.chsh_scan_numpy(c, c, c, c)
    assert (ia, iap, ib, ibp) == (0, 0, 0, 0)
    val2 = _kernels.chsh_scan_numba(c, c, c, c)
    assert (int(val2[1]), int(val2[2]), int(val2[3]), int(val2[4])) == (0, 0, 0, 0)


def test_deposit_points_twins_agree():
    rng = np.random.default_rng(1)
    x = rng.normal(0.0, 1.0, size=5000)
    w = rng.random(5000)
    a = _kernels.deposit_points_numpy(x, w, -4.0, 0.05, 160)
    b = _kernels.deposit_points_numba(x, w, -4.0, 0.05, 160)
    assert np.allclose(a, b, atol=1e-12)


def test_deposit_points_conserves_interior_mass():
    x = np.array([0.1, 0.5, 0.9])
    w = np.array([1.0, 2.0, 3.0])
    out = _kernels.deposit_points_numpy(x, w, 0.0, 0.125, 8)
    assert out.sum() == pytest.approx(6.0, abs=1e-12)


def test_deposit_intervals_twins_agree():
    rng = np.random.default_rng(2)
    lo = rng.normal(0.0, 1.0, size=3000)
    hi = lo + rng.random(3000) * 0.7
    w = rng.random(3000)
    a = _kernels.deposit_intervals_numpy(lo, hi, w, -5.0, 0.04, 250)
    b = _kernels.deposit_intervals_numba(lo, hi, w, -5.0, 0.04, 250)
    assert np.allclose(a, b, atol=1e-12)


def test_deposit_intervals_mass_and_geometry():
    # one interval covering exactly two bins splits its weight in proportion
    out = _kernels.deposit_intervals_numpy(
        np.array([0.25]), np.array([0.75]), np.array([1.0]), 0.0, 0.5, 2
    )
    assert out == pytest.approx([0.5, 0.5], abs=1e-12)
    # swapped endpoints behave the same
    out2 = _kernels.deposit_intervals_numpy(
        np.array([0.75]), np.array([0.25]), np.array([1.0]), 0.0, 0.5, 2
    )
    assert out2 == pytest.approx([0.5, 0.5], abs=1e-12)


def test_deposit_intervals_degenerate_is_point_mass():
    for fn in (_kernels.deposit_intervals_numpy, _kernels.deposit_intervals_numba):
        out = fn(np.array([0.3]), np.array([0.3]), np.array([2.0]), 0.0, 0.25, 4)
        assert out == pytest.approx([0.0, 2.0, 0.0, 0.0], abs=1e-12)


def test_deposit_intervals_survives_huge_coordinates():
    # values far outside the grid must neither crash nor deposit anything
    lo = np.array([-1e18, 1e18, -1e18])
    hi = np.array([-1e18, 1e18, 1e18])
    w = np.ones(3)
    for fn in (_kernels.deposit_intervals_numpy, _kernels.deposit_intervals_numba):
        out = fn(lo, hi, w, 0.0, 0.1, 10)
        assert np.all(np.isfinite(out))
        # the spanning interval deposits only the sliver crossing the grid
        assert out.sum() <= 1e-15


def test_dispatch_respects_env(monkeypatch):
    monkeypatch.setenv("BELLFORGE_DISABLE_NUMBA", "1")
    assert _kernels._env_disabled()
    monkeypatch.setenv("BELLFORGE_DISABLE_NUMBA", "0")
    assert not _kernels._env_disabled()
    monkeypatch.delenv("BELLFORGE_DISABLE_NUMBA")
    assert not _kernels._env_disabled()


def test_warmup_runs():
    _kernels.warmup()
