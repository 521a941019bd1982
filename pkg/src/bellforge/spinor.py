"""Two-photon polarization states, dichotomic analyzers, and CHSH values.

States are complex 4-vectors in the product basis |xx>, |xy>, |yx>, |yy>
(first slot is photon 1).  An analyzer is a transmission axis theta plus a
kind: ``L`` transmits cos(theta)|x> + sin(theta)|y>, ``E`` transmits
cos(theta)|x> + i sin(theta)|y>.  The associated +/-1 observable is
|theta><theta| - |theta+pi/2><theta+pi/2|, which works out to

    A_L(theta) = cos(2 theta) Z + sin(2 theta) X
    A_E(theta) = cos(2 theta) Z + sin(2 theta) Y

in the Pauli basis.  Everything downstream (correlations, CHSH scans)
reduces to sandwiches of these observables.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, NormalizationError, ValidationError

LINEAR = "L"
ELLIPTIC = "E"

PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)

TSIRELSON = 2.0 * np.sqrt(2.0)

_NORM_TOL = 1e-9
_GRID_N = 64  # scan step pi/64 per angle


def psi_plus():
    """(|xx> + |yy>)/sqrt(2)."""
    return np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)


def psi_minus():
    """(|xy> - |yx>)/sqrt(2)."""
    return np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)


def singlet_state():
    """The spin singlet mapped onto the same 4-dim space as psi_minus."""
    return psi_minus()


def product_xx():
    """|xx>, a separable reference state."""
    return np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)


def check_state(state):
    state = np.asarray(state, dtype=complex)
    if state.shape != (4,):
        raise ValidationError("state must be a complex 4-vector")
    if abs(np.vdot(state, state).real - 1.0) > _NORM_TOL:
        raise NormalizationError(
            "state norm^2 = %.12g differs from 1 beyond 1e-9" % np.vdot(state, state).real
        )
    return state


@dataclass(frozen=True)
class AnalyzerSetting:
    """Transmission axis (radians, reduced mod pi) and analyzer kind."""

    theta: float
    kind: str = LINEAR

    def __post_init__(self):
        if self.kind not in (LINEAR, ELLIPTIC):
            raise ValidationError("analyzer kind must be 'L' or 'E'")
        object.__setattr__(self, "theta", float(self.theta) % np.pi)


@dataclass(frozen=True)
class ChshSettings:
    a: AnalyzerSetting
    a_prime: AnalyzerSetting
    b: AnalyzerSetting
    b_prime: AnalyzerSetting


def analyzer_ket(s):
    """Transmitted single-photon state of the analyzer."""
    c, sn = np.cos(s.theta), np.sin(s.theta)
    if s.kind == LINEAR:
        return np.array([c, sn], dtype=complex)
    return np.array([c, 1.0j * sn], dtype=complex)


def observable_from_setting(s):
    """The +/-1-valued observable |theta><theta| - |theta+pi/2><theta+pi/2|."""
    k = analyzer_ket(s)
    k_perp = analyzer_ket(AnalyzerSetting(s.theta + np.pi / 2.0, s.kind))
    return np.outer(k, k.conj()) - np.outer(k_perp, k_perp.conj())


def _pauli_for_kind(kind):
    return PAULI_X if kind == LINEAR else PAULI_Y


def correlation(state, sa, sb):
    """<state| A(sa) (x) B(sb) |state>, a real number in [-1, 1]."""
    state = check_state(state)
    op = np.kron(observable_from_setting(sa), observable_from_setting(sb))
    return float(np.vdot(state, op @ state).real)


def singlet_correlation(a_vec, b_vec):
    """Spin correlation <sigma.a (x) sigma.b> on the singlet; equals -a.b."""
    a_vec = np.asarray(a_vec, dtype=float)
    b_vec = np.asarray(b_vec, dtype=float)
    for v in (a_vec, b_vec):
        if v.shape != (3,) or abs(np.dot(v, v) - 1.0) > 1e-9:
            raise DomainError("direction must be a unit 3-vector (within 1e-9)")
    sig_a = a_vec[0] * PAULI_X + a_vec[1] * PAULI_Y + a_vec[2] * PAULI_Z
    sig_b = b_vec[0] * PAULI_X + b_vec[1] * PAULI_Y + b_vec[2] * PAULI_Z
    psi = singlet_state()
    return float(np.vdot(psi, np.kron(sig_a, sig_b) @ psi).real)


def chsh_value(state, settings):
    """|P(a,b) - P(a,b')| + |P(a',b) + P(a',b')|."""
    p_ab = correlation(state, settings.a, settings.b)
    p_abp = correlation(state, settings.a, settings.b_prime)
    p_apb = correlation(state, settings.a_prime, settings.b)
    p_apbp = correlation(state, settings.a_prime, settings.b_prime)
    return abs(p_ab - p_abp) + abs(p_apb + p_apbp)


def _sandwiches(state, kind_a, kind_b):
    """The four Pauli sandwiches that generate P(theta_a, theta_b).

    P = cz_a cz_b <ZZ> + cz_a sz_b <ZQ> + sz_a cz_b <PZ> + sz_a sz_b <PQ>
    with P = X or Y per side kind and cz = cos 2theta, sz = sin 2theta.
    """
    pa = _pauli_for_kind(kind_a)
    pb = _pauli_for_kind(kind_b)
    t = {}
    for name_a, op_a in (("Z", PAULI_Z), ("P", pa)):
        for name_b, op_b in (("Z", PAULI_Z), ("Q", pb)):
            t[name_a + name_b] = float(
                np.vdot(state, np.kron(op_a, op_b) @ state).real
            )
    return t


def _corr_matrix(t, cz_a, sz_a, cz_b, sz_b):
    return (
        t["ZZ"] * np.outer(cz_a, cz_b)
        + t["ZQ"] * np.outer(cz_a, sz_b)
        + t["PZ"] * np.outer(sz_a, cz_b)
        + t["PQ"] * np.outer(sz_a, sz_b)
    )


def _corr_scalar(t, theta_a, theta_b):
    cz_a, sz_a = np.cos(2 * theta_a), np.sin(2 * theta_a)
    cz_b, sz_b = np.cos(2 * theta_b), np.sin(2 * theta_b)
    return (
        t["ZZ"] * cz_a * cz_b
        + t["ZQ"] * cz_a * sz_b
        + t["PZ"] * sz_a * cz_b
        + t["PQ"] * sz_a * sz_b
    )


def _parse_kinds(kinds):
    if isinstance(kinds, str):
        kinds = tuple(kinds)
    kinds = tuple(kinds)
    if len(kinds) != 4 or any(k not in (LINEAR, ELLIPTIC) for k in kinds):
        raise ValidationError("kinds must be four letters from {L, E}, ordered a,b,a',b'")
    return kinds


def maximize_chsh(state, kinds, seed=0):
    """Maximize the CHSH value over analyzer angles for fixed kinds.

    ``kinds`` holds the four analyzer kinds in the order (a, b, a', b').
    Exhaustive scan on a step-pi/64 grid, then coordinate-descent
    refinement.  Deterministic: the scan covers the whole torus, ties break
    to the lexicographically smallest (a, a', b, b') tuple, and ``seed`` is
    accepted only for interface stability.
    """
    del seed
    state = check_state(state)
    ka, kb, kap, kbp = _parse_kinds(kinds)

    t_ab = _sandwiches(state, ka, kb)
    t_abp = _sandwiches(state, ka, kbp)
    t_apb = _sandwiches(state, kap, kb)
    t_apbp = _sandwiches(state, kap, kbp)

    theta = np.arange(_GRID_N) * (np.pi / _GRID_N)
    cz, sz = np.cos(2 * theta), np.sin(2 * theta)
    c_ab = _corr_matrix(t_ab, cz, sz, cz, sz)
    c_abp = _corr_matrix(t_abp, cz, sz, cz, sz)
    c_apb = _corr_matrix(t_apb, cz, sz, cz, sz)
    c_apbp = _corr_matrix(t_apbp, cz, sz, cz, sz)

    _, ia, iap, ib, ibp = _kernels.chsh_scan(c_ab, c_abp, c_apb, c_apbp)
    angles = np.array([theta[ia], theta[ib], theta[iap], theta[ibp]])

    def objective(v):
        a, b, ap, bp = v
        return abs(_corr_scalar(t_ab, a, b) - _corr_scalar(t_abp, a, bp)) + abs(
            _corr_scalar(t_apb, ap, b) + _corr_scalar(t_apbp, ap, bp)
        )

    angles, value = _coordinate_descent(objective, angles, np.pi / _GRID_N)
    settings = ChshSettings(
        a=AnalyzerSetting(angles[0], ka),
        b=AnalyzerSetting(angles[1], kb),
        a_prime=AnalyzerSetting(angles[2], kap),
        b_prime=AnalyzerSetting(angles[3], kbp),
    )
    return settings, float(value)


def _coordinate_descent(f, x0, h, tol=1e-10, max_sweeps=80):
    """Maximize f by repeated golden-section line searches per coordinate."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x = np.array(x0, dtype=float)
    best = f(x)
    for _ in range(max_sweeps):
        improved = best
        for k in range(x.shape[0]):
            lo, hi = x[k] - h, x[k] + h
            c = hi - invphi * (hi - lo)
            d = lo + invphi * (hi - lo)
            xc = x.copy()
            xc[k] = c
            fc = f(xc)
            xc[k] = d
            fd = f(xc)
            while hi - lo > tol:
                if fc > fd:
                    hi, d, fd = d, c, fc
                    c = hi - invphi * (hi - lo)
                    xc[k] = c
                    fc = f(xc)
                else:
                    lo, c, fc = c, d, fd
                    d = lo + invphi * (hi - lo)
                    xc[k] = d
                    fd = f(xc)
            mid = 0.5 * (lo + hi)
            xc[k] = mid
            fm = f(xc)
            if fm > best:
                best = fm
                x[k] = mid
        if best - improved < 1e-12:
            break
    return x, best
