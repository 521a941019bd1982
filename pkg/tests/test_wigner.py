import math

import numpy as np
import pytest

from bellforge import waves, wigner
from bellforge.errors import DomainError, ValidationError
from bellforge.spinor import TSIRELSON


# protocol-search CHSH maxima over squeezing, frozen from converged runs
PROTOCOL_MAXIMA = {
    0.0: 2.0,
    0.5: 2.144420,
    1.0: 2.183900,
    2.0: 2.190428,
    3.0: 2.190549,
}


def test_1d_marginals_exact():
    for psi in (waves.gaussian_packet(x0=0.5, p0=-0.8, sigma=0.9, n=512, xmax=12.0),
                waves.excited_state(2, n=512, xmax=12.0)):
        grid = wigner.wigner_transform(psi)
        errs = wigner.marginal_errors_1d(grid, psi)
        assert errs["q"] < 1e-10
        assert errs["p"] < 1e-10


def test_wigner_normalization_and_reality():
    psi = waves.two_gaussian_packet(n=1024, xmax=24.0)
    grid = wigner.wigner_transform(psi)
    total = grid.values.sum() * grid.x_axis.spacing * grid.p_axis.spacing
    assert total == pytest.approx(1.0, abs=1e-9)
    assert np.isrealobj(grid.values)


def test_excited_state_minimum():
    psi = waves.excited_state(1, n=256, xmax=10.0)
    grid = wigner.wigner_transform(psi)
    assert float(grid.values.min()) == pytest.approx(-1.0 / math.pi, abs=1e-6)
    # the minimum sits at the phase-space origin
    k, j = np.unravel_index(np.argmin(grid.values), grid.values.shape)
    assert abs(grid.x_axis.points()[k]) < 1e-9
    assert abs(grid.p_axis.points()[j]) < 1e-9


def test_hudson_criterion():
    gauss = wigner.hudson_check(waves.gaussian_packet(p0=1.0, t=0.5, n=512, xmax=16.0))
    assert gauss["gaussian"]
    assert gauss["min_w"] > -1e-8
    two = wigner.hudson_check(waves.two_gaussian_packet(n=1024, xmax=24.0))
    assert not two["gaussian"]
    assert two["min_w"] < -1e-3


def test_moving_packet_peak_location():
    x0, p0 = 1.2, -0.9
    psi = waves.gaussian_packet(x0=x0, p0=p0, sigma=1.0, n=512, xmax=16.0)
    grid = wigner.wigner_transform(psi)
    k, j = np.unravel_index(np.argmax(grid.values), grid.values.shape)
    assert grid.x_axis.points()[k] == pytest.approx(x0, abs=grid.x_axis.spacing)
    assert grid.p_axis.points()[j] == pytest.approx(p0, abs=grid.p_axis.spacing)


def test_2d_small_grid_keeps_full_array():
    psi = waves.correlated_gaussian_2d(rho=0.4, sigma=1.0, n=32, xmax=6.0)
    summary = wigner.wigner_transform(psi)
    assert summary.values is not None
    assert summary.values.shape == (32, 32, 32, 32)
    errs = wigner.marginal_errors_2d(summary, psi)
    assert errs["qq"] < 1e-12
    # full array reduces to the stored marginals
    dp = [ax.spacing for ax in summary.p_axes]
    qq = summary.values.sum(axis=(2, 3)) * dp[0] * dp[1]
    assert np.max(np.abs(qq - summary.marginals["qq"])) < 1e-12
    # central slice agrees with the full array
    n = 32
    sl = summary.values[:, n // 2, :, n // 2]
    assert np.max(np.abs(sl - summary.central_slice)) < 1e-12


def test_2d_interference_state_negative():
    psi = waves.psi_marginal_state(+1, 100.0, n=64, xmax=120.0)
    summary = wigner.wigner_transform(psi, store_full=False)
    assert summary.values is None
    assert summary.min_w < -1e-3
    errs = wigner.marginal_errors_2d(summary, psi)
    assert errs["qq"] < 1e-12


def test_2d_gaussian_nonnegative():
    psi = waves.correlated_gaussian_2d(rho=0.5, sigma=1.0, n=64, xmax=8.0)
    summary = wigner.wigner_transform(psi)
    assert summary.min_w > -1e-8
    errs = wigner.marginal_errors_2d(summary, psi)
    assert max(errs.values()) < 1e-5


def test_transform_validation():
    psi = waves.gaussian_packet(n=256, xmax=10.0)
    with pytest.raises(ValidationError):
        wigner.wigner_transform(waves.fourier(psi))
    with pytest.raises(ValidationError):
        wigner.gaussianity_residual(waves.correlated_gaussian_2d(n=32, xmax=6.0))


def test_tmsv_wigner_normalized():
    # the closed form factorizes over (q1, q2) and (p1, p2); check the
    # 4-D normalization as a product of two 2-D plane integrals
    q = np.linspace(-6, 6, 241)
    dq = q[1] - q[0]
    for r in (0.0, 0.7):
        wq = wigner.tmsv_wigner(r, q[:, None], q[None, :], 0.0, 0.0)
        wp = wigner.tmsv_wigner(r, 0.0, 0.0, q[:, None], q[None, :])
        total = math.pi**2 * float(wq.sum()) * float(wp.sum()) * dq**4
        assert total == pytest.approx(1.0, abs=1e-6)


def test_parity_correlation_properties():
    assert wigner.parity_correlation(1.0, 0.0, 0.0) == pytest.approx(1.0)
    # consistency with the Wigner closed form at a displaced point
    r, alpha, beta = 0.6, 0.3 + 0.2j, -0.1 + 0.4j
    q1, p1 = math.sqrt(2.0) * alpha.real, math.sqrt(2.0) * alpha.imag
    q2, p2 = math.sqrt(2.0) * beta.real, math.sqrt(2.0) * beta.imag
    w = wigner.tmsv_wigner(r, q1, q2, p1, p2)
    assert wigner.parity_correlation(r, alpha, beta) == pytest.approx(
        float(math.pi**2 * w), rel=1e-12
    )


def test_protocol_maxima_frozen():
    values = []
    for r in sorted(PROTOCOL_MAXIMA):
        got = wigner.maximize_chsh_parity(r)["s_max"]
        assert got == pytest.approx(PROTOCOL_MAXIMA[r], abs=1e-5)
        values.append(got)
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))


def test_full_search_beats_protocol():
    protocol = wigner.maximize_chsh_parity(3.0)["s_max"]
    full = wigner.maximize_chsh_parity(3.0, search="full")["s_max"]
    assert full > protocol
    assert full == pytest.approx(2.3244889, abs=1e-4)
    assert full < TSIRELSON


def test_random_displacements_respect_bound():
    rng = np.random.default_rng(3)
    for _ in range(2000):
        r = rng.uniform(0.0, 3.0)
        d = rng.normal(scale=0.7, size=4) + 1j * rng.normal(scale=0.7, size=4)
        assert wigner.chsh_parity(r, tuple(d)) <= TSIRELSON + 1e-9


def test_parity_validation():
    with pytest.raises(DomainError):
        wigner.maximize_chsh_parity(-0.1)
    with pytest.raises(DomainError):
        wigner.maximize_chsh_parity(1.0, search="other")
    with pytest.raises(ValidationError):
        wigner.chsh_parity(1.0, (0.1, 0.2))
