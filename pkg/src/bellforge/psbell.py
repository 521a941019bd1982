"""Bell functional built from quadrant signs of conjugate quadratures.

For a 2-D state the four sign observables sgn(q1), sgn(p1), sgn(q2),
sgn(p2) define correlators E_ab with a, b in {q, p}, measured on the
corresponding mixed densities |psi_ab|^2.  The Bell combination

    S = E_qq + E_qp + E_pq - E_pp

is bounded by 2 for any separable sign assignment and by 2*sqrt(2) for
the quadrature family built here.  Grid points lying exactly on a zero
line carry sign 0 and drop out of the correlators.

The distinguished family psi_(+/-) with cutoff L (see
``waves.psi_marginal_state``) admits closed-form correlators in terms of
one overlap integral I(L):

    E_qq = +/- sqrt(2)/2          E_qp = E_pq = +/- (sqrt(2)/4) I(L)
    E_pp = -/+ (sqrt(2)/8) I(L)^2

so S = +/- (sqrt(2)/8) (2 + I(L))^2, which crosses the classical bound 2
once I(L) exceeds 2 sqrt(2 sqrt(2)) - 2 and tends to 2*sqrt(2) as L grows
(I -> 2).  ``marginal_theorem_demo`` tabulates this crossing.
"""

import math

import numpy as np
from scipy import integrate

from . import waves
from .errors import DomainError, ValidationError

TSIRELSON = 2.0 * math.sqrt(2.0)
_CCS = ("qq", "qp", "pq", "pp")


# ---------------------------------------------------------------------------
# quadrant mass tables and correlators on grid states


def _require_position_2d(psi):
    if psi.dim != 2:
        raise ValidationError("quadrant analysis needs a 2-D state")
    for ax in psi.axes:
        if ax.representation != waves.POSITION:
            raise ValidationError("state must be given in the position representation")


def _ccs_state(psi, ccs):
    if ccs not in _CCS:
        raise DomainError("ccs must be one of qq, qp, pq, pp")
    work = psi
    if ccs[0] == "p":
        work = waves.fourier(work, axis=0)
    if ccs[1] == "p":
        work = waves.fourier(work, axis=1)
    return work


def _sign_groups(masses, points, axis):
    """Collapse an axis of a mass table to three sign groups (-, 0, +)."""
    s = np.sign(points)
    arr = np.moveaxis(masses, axis, 0)
    grouped = np.stack(
        [arr[s < 0].sum(axis=0), arr[s == 0].sum(axis=0), arr[s > 0].sum(axis=0)]
    )
    return np.moveaxis(grouped, 0, axis)


def quad_densities(psi):
    """Sign-pair mass tables for all four quadrature pairs.

    Returns a dict mapping each pair in {qq, qp, pq, pp} to a 3x3 table
    indexed by the sign groups (-, 0, +) of the two coordinates.  Each
    table sums to the state's total mass (1 after normalization).
    """
    _require_position_2d(psi)
    out = {}
    for ccs in _CCS:
        w = _ccs_state(psi, ccs)
        masses = w.density() * w.axes[0].spacing * w.axes[1].spacing
        t = _sign_groups(masses, w.axes[0].points(), 0)
        out[ccs] = _sign_groups(t, w.axes[1].points(), 1)
    return out


def _table_correlator(table):
    return float(table[2, 2] + table[0, 0] - table[0, 2] - table[2, 0])


def quadrant_correlator(psi, ccs):
    """E_ab = <sgn(a) sgn(b)> on the mixed density selected by ccs."""
    _require_position_2d(psi)
    w = _ccs_state(psi, ccs)
    masses = w.density() * w.axes[0].spacing * w.axes[1].spacing
    t = _sign_groups(masses, w.axes[0].points(), 0)
    return _table_correlator(_sign_groups(t, w.axes[1].points(), 1))


def s_functional(psi):
    """E_qq + E_qp + E_pq - E_pp on the grid."""
    tables = quad_densities(psi)
    return (
        _table_correlator(tables["qq"])
        + _table_correlator(tables["qp"])
        + _table_correlator(tables["pq"])
        - _table_correlator(tables["pp"])
    )


# ---------------------------------------------------------------------------
# overlap integral of the cutoff log density with the Cauchy tail


def _inner_v(w, big_m):
    """Integral of 1/(v^2 + w^2 - 2) over v in [1, M], closed form."""
    d = w * w - 2.0
    if d > 0.0:
        m = math.sqrt(d)
        return (math.atan(big_m / m) - math.atan(1.0 / m)) / m
    k = math.sqrt(-d)
    return (
        math.log((big_m - k) / (big_m + k)) - math.log((1.0 - k) / (1.0 + k))
    ) / (2.0 * k)


def overlap_integral(cutoff):
    """I(L): normalized double integral of 1/(v^2 + w^2 - 2) over [1, sqrt(L+1)]^2.

    The inner integral is analytic; the outer is split at w = sqrt(2)
    where the integrand switches branch (the w -> 1 endpoint carries an
    integrable log singularity).  I is increasing in L with limit 2.
    """
    if cutoff <= 0:
        raise DomainError("cutoff must be positive")
    big_m = math.sqrt(cutoff + 1.0)
    if big_m <= math.sqrt(2.0):
        raise DomainError("cutoff too small: the integration square is degenerate")
    lo, _ = integrate.quad(
        _inner_v, 1.0, math.sqrt(2.0), args=(big_m,), epsabs=1e-12, limit=300
    )
    hi, _ = integrate.quad(
        _inner_v, math.sqrt(2.0), big_m, args=(big_m,), epsabs=1e-12, limit=300
    )
    return 8.0 * (lo + hi) / (math.pi * math.log(cutoff + 1.0))


def family_correlators(cutoff, sign=+1):
    """Closed-form quadrant correlators of the psi_(+/-) family."""
    s = waves._parse_sign(sign)
    i_val = overlap_integral(cutoff)
    rt2 = math.sqrt(2.0)
    return {
        "qq": s * rt2 / 2.0,
        "qp": s * rt2 / 4.0 * i_val,
        "pq": s * rt2 / 4.0 * i_val,
        "pp": -s * rt2 / 8.0 * i_val * i_val,
    }


def family_s(cutoff, sign=+1):
    s = waves._parse_sign(sign)
    return s * math.sqrt(2.0) / 8.0 * (2.0 + overlap_integral(cutoff)) ** 2


# ---------------------------------------------------------------------------
# the violation table


def _richardson(cutoffs, values):
    """One-step Richardson extrapolation in h = 1/log(L+1) from the two
    largest cutoffs; the leading finite-L correction of S is O(h)."""
    h1 = 1.0 / math.log(cutoffs[-2] + 1.0)
    h2 = 1.0 / math.log(cutoffs[-1] + 1.0)
    return (values[-1] * h1 - values[-2] * h2) / (h1 - h2)


def marginal_theorem_demo(
    cutoffs=(10.0, 100.0, 1000.0, 10000.0), grid_n=0, grid_xmax=None
):
    """Tabulate S_(+/-)(L) and locate the crossing of the classical bound.

    Closed-form route: one overlap integral per cutoff.  The pair is
    antisymmetric (S_- = -S_+), S_+ is increasing in L, and the limit is
    extrapolated from the two largest cutoffs.  With grid_n > 0 the
    smallest cutoff is also cross-checked by building the state on a
    grid_n^2 grid and evaluating the S functional directly; the grid value
    sits below the closed form because the finite box and discrete zero
    lines both bleed correlation.
    """
    cutoffs = tuple(float(c) for c in cutoffs)
    if len(cutoffs) < 2:
        raise DomainError("need at least two cutoffs to extrapolate")
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise DomainError("cutoffs must be strictly increasing")

    overlaps = [overlap_integral(c) for c in cutoffs]
    s_plus = [math.sqrt(2.0) / 8.0 * (2.0 + i) ** 2 for i in overlaps]
    s_minus = [-s for s in s_plus]

    for sp, sm in zip(s_plus, s_minus):
        if abs(sp + sm) > 1e-6:
            raise ValidationError("S_+ and S_- failed antisymmetry")
    if any(b <= a for a, b in zip(s_plus, s_plus[1:])):
        raise ValidationError("S_+ failed to increase with the cutoff")

    exceeds = next((c for c, s in zip(cutoffs, s_plus) if s > 2.0), None)
    report = {
        "cutoffs": list(cutoffs),
        "overlap": overlaps,
        "s_plus": s_plus,
        "s_minus": s_minus,
        "exceeds_2_at": exceeds,
        "extrapolated_limit": _richardson(cutoffs, s_plus),
        "tsirelson": TSIRELSON,
    }
    if grid_n:
        psi = waves.psi_marginal_state(+1, cutoffs[0], n=grid_n, xmax=grid_xmax)
        report["grid_check"] = {
            "cutoff": cutoffs[0],
            "n": int(grid_n),
            "s_grid": s_functional(psi),
        }
    return report
