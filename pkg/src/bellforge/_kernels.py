"""Hot loops, each with a numba-jitted version and a pure-numpy twin.

Three kernels carry essentially all of the package's inner-loop time:

* ``chsh_scan``       exhaustive scan of the CHSH functional over a settings grid
* ``deposit_points``  cloud-in-cell deposit of weighted sample points into bins
* ``deposit_intervals`` deposit of weighted intervals into bins (uniform within
  the interval), the workhorse behind every transport-map pushforward

Selection: the jitted path is used when numba imports cleanly and the
environment variable ``BELLFORGE_DISABLE_NUMBA`` is unset/empty/"0".
The numpy twins are kept semantically identical: ``chsh_scan`` is
bit-identical between the two paths (same float ops, same lexicographic
tie-breaking); the deposit kernels agree to ~1e-12 relative (summation
order differs).

benchmarks/bench_kernels.py times the two paths against each other.
"""

import os

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba installed
    njit = None


def _env_disabled():
    return os.environ.get("BELLFORGE_DISABLE_NUMBA", "") not in ("", "0")


USE_NUMBA = njit is not None and not _env_disabled()


# ---------------------------------------------------------------------------
# chsh_scan


def _chsh_scan_loops(c_ab, c_abp, c_apb, c_apbp):
    # Scan order (ia, iap, ib, ibp) with strict ">" update: ties resolve to the
    # lexicographically smallest index tuple, matching the numpy twin's argmax.
    na = c_ab.shape[0]
    nap = c_apb.shape[0]
    nb = c_ab.shape[1]
    nbp = c_abp.shape[1]
    best = -np.inf
    bia = 0
    biap = 0
    bib = 0
    bibp = 0
    for ia in range(na):
        for iap in range(nap):
            for ib in range(nb):
                for ibp in range(nbp):
                    s = abs(c_ab[ia, ib] - c_abp[ia, ibp]) + abs(
                        c_apb[iap, ib] + c_apbp[iap, ibp]
                    )
                    if s > best:
                        best = s
                        bia = ia
                        biap = iap
                        bib = ib
                        bibp = ibp
    return best, bia, biap, bib, bibp


def chsh_scan_numpy(c_ab, c_abp, c_apb, c_apbp):
    """Best CHSH value |C1(a,b)-C2(a,b')| + |C3(a',b)+C4(a',b')| over the grid.

    Returns (value, ia, iap, ib, ibp). First occurrence in C order wins ties,
    i.e. the lexicographically smallest (ia, iap, ib, ibp).
    """
    d1 = np.abs(c_ab[:, :, None] - c_abp[:, None, :])  # (ia, ib, ibp)
    d2 = np.abs(c_apb[:, :, None] + c_apbp[:, None, :])  # (iap, ib, ibp)
    s = d1[:, None, :, :] + d2[None, :, :, :]  # (ia, iap, ib, ibp)
    flat = int(np.argmax(s))
    ia, iap, ib, ibp = np.unravel_index(flat, s.shape)
    return float(s[ia, iap, ib, ibp]), int(ia), int(iap), int(ib), int(ibp)


# ---------------------------------------------------------------------------
# deposit_points (cloud-in-cell)


def _deposit_points_loops(x, w, x0, dx, nbins, out):
    # Linear (CIC) deposit onto bin centers x0 + (k + 1/2) dx.  Points whose
    # support falls entirely outside [x0, x0 + nbins*dx] are dropped.
    for i in range(x.shape[0]):
        pos = (x[i] - x0) / dx - 0.5
        i0 = int(np.floor(pos))
        f = pos - i0
        if 0 <= i0 < nbins:
            out[i0] += w[i] * (1.0 - f)
        if 0 <= i0 + 1 < nbins:
            out[i0 + 1] += w[i] * f
    return out


def deposit_points_numpy(x, w, x0, dx, nbins, out=None):
    """Cloud-in-cell deposit of weighted points into ``nbins`` bins."""
    if out is None:
        out = np.zeros(nbins)
    pos = (np.asarray(x, dtype=float) - x0) / dx - 0.5
    i0 = np.floor(pos).astype(np.int64)
    f = pos - i0
    w = np.asarray(w, dtype=float)
    lo_ok = (i0 >= 0) & (i0 < nbins)
    hi_ok = (i0 + 1 >= 0) & (i0 + 1 < nbins)
    np.add.at(out, i0[lo_ok], (w * (1.0 - f))[lo_ok])
    np.add.at(out, (i0 + 1)[hi_ok], (w * f)[hi_ok])
    return out


# ---------------------------------------------------------------------------
# deposit_intervals


def _deposit_intervals_loops(lo, hi, w, x0, dx, nbins, out):
    # Each interval [lo_i, hi_i] deposits w_i spread uniformly over its length.
    # Degenerate intervals collapse to a point deposit in the containing bin.
    for i in range(lo.shape[0]):
        a = lo[i]
        b = hi[i]
        if b < a:
            a, b = b, a
        width = b - a
        if width < 1e-300:
            kf = np.floor((a - x0) / dx)  # compare as float: huge values overflow int
            if 0.0 <= kf < nbins:
                out[int(kf)] += w[i]
            continue
        ka_f = np.floor((a - x0) / dx)
        kb_f = np.floor((b - x0) / dx)
        if kb_f < 0.0 or ka_f >= nbins:
            continue
        ka = 0 if ka_f < 0.0 else int(ka_f)
        kb = nbins - 1 if kb_f >= nbins else int(kb_f)
        for k in range(ka, kb + 1):
            e_lo = x0 + k * dx
            e_hi = e_lo + dx
            seg_lo = a if a > e_lo else e_lo
            seg_hi = b if b < e_hi else e_hi
            if seg_hi > seg_lo:
                out[k] += w[i] * (seg_hi - seg_lo) / width
    return out


def deposit_intervals_numpy(lo, hi, w, x0, dx, nbins, out=None, chunk=256):
    """Deposit weighted intervals into bins, uniform within each interval.

    Vectorized as a ramp difference: the mass of interval i left of edge e is
    w_i * clip((e - lo_i)/(hi_i - lo_i), 0, 1); per-bin mass is the difference
    of consecutive edges.  Chunked so the (chunk, nbins+1) ramp stays small.
    """
    if out is None:
        out = np.zeros(nbins)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    w = np.asarray(w, dtype=float)
    a = np.minimum(lo, hi)
    b = np.maximum(lo, hi)
    width = b - a
    degen = width < 1e-300
    if np.any(degen):
        kf = np.floor((a[degen] - x0) / dx)
        ok = (kf >= 0.0) & (kf < nbins)  # filter before the int cast can overflow
        np.add.at(out, kf[ok].astype(np.int64), w[degen][ok])
    keep = ~degen
    a, b, wk, width = a[keep], b[keep], w[keep], width[keep]
    edges = x0 + dx * np.arange(nbins + 1)
    for s in range(0, a.shape[0], chunk):
        aa = a[s : s + chunk, None]
        bb = b[s : s + chunk, None]
        ww = wk[s : s + chunk, None]
        ramp = np.clip((edges[None, :] - aa) / (bb - aa), 0.0, 1.0)
        out += np.sum(ww * (ramp[:, 1:] - ramp[:, :-1]), axis=0)
    return out


# ---------------------------------------------------------------------------
# jit compilation and dispatch

if njit is not None:
    chsh_scan_numba = njit(cache=True)(_chsh_scan_loops)
    _deposit_points_numba = njit(cache=True)(_deposit_points_loops)
    _deposit_intervals_numba = njit(cache=True)(_deposit_intervals_loops)
else:  # pragma: no cover
    chsh_scan_numba = None
    _deposit_points_numba = None
    _deposit_intervals_numba = None


def deposit_points_numba(x, w, x0, dx, nbins, out=None):
    if out is None:
        out = np.zeros(nbins)
    return _deposit_points_numba(
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(w, dtype=np.float64),
        float(x0),
        float(dx),
        int(nbins),
        out,
    )


def deposit_intervals_numba(lo, hi, w, x0, dx, nbins, out=None):
    if out is None:
        out = np.zeros(nbins)
    return _deposit_intervals_numba(
        np.ascontiguousarray(lo, dtype=np.float64),
        np.ascontiguousarray(hi, dtype=np.float64),
        np.ascontiguousarray(w, dtype=np.float64),
        float(x0),
        float(dx),
        int(nbins),
        out,
    )


def chsh_scan(c_ab, c_abp, c_apb, c_apbp):
    if USE_NUMBA:
        best, ia, iap, ib, ibp = chsh_scan_numba(c_ab, c_abp, c_apb, c_apbp)
        return float(best), int(ia), int(iap), int(ib), int(ibp)
    return chsh_scan_numpy(c_ab, c_abp, c_apb, c_apbp)


def deposit_points(x, w, x0, dx, nbins, out=None):
    if USE_NUMBA:
        return deposit_points_numba(x, w, x0, dx, nbins, out)
    return deposit_points_numpy(x, w, x0, dx, nbins, out)


def deposit_intervals(lo, hi, w, x0, dx, nbins, out=None):
    if USE_NUMBA:
        return deposit_intervals_numba(lo, hi, w, x0, dx, nbins, out)
    return deposit_intervals_numpy(lo, hi, w, x0, dx, nbins, out)


def warmup():
    """Trigger JIT compilation so later timings exclude compile cost."""
    if not USE_NUMBA:
        return
    c = np.eye(3)
    chsh_scan(c, c, c, c)
    deposit_points(np.array([0.5]), np.array([1.0]), 0.0, 0.25, 8)
    deposit_intervals(np.array([0.1]), np.array([0.6]), np.array([1.0]), 0.0, 0.25, 8)
