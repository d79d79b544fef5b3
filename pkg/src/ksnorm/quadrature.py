"""Vectorized adaptive Gauss-Kronrod quadrature with Hake-style limits.

The panel engine evaluates the integrand on whole batches of panels at once,
so highly oscillatory integrands (millions of panels) stay affordable.  All
higher-level integrals in the package (gauge integrals, cube functionals,
norms) are built on these routines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# 15-point Kronrod extension of 7-point Gauss on [-1, 1].
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass
class QuadResult:
    value: complex
    error: float
    evaluations: int
    converged: bool
    nonfinite: int = 0

    def __iter__(self):
        return iter((self.value, self.error, self.evaluations, self.converged))


def _eval_clean(f: Integrand, pts: np.ndarray, out_shape: tuple) -> tuple[np.ndarray, int]:
    """Evaluate f, zeroing non-finite values (HK null-set convention)."""
    vals = np.asarray(f(pts))
    if vals.shape != out_shape:
        vals = np.broadcast_to(vals, out_shape).copy()
    bad = ~np.isfinite(vals)
    nbad = int(bad.sum())
    if nbad:
        vals = np.where(bad, 0.0, vals)
    return vals, nbad


def panel_integrate(
    f: Integrand,
    a: float,
    b: float,
    tol: float = 1e-10,
    max_panels: int = 1 << 21,
    init_panels: int = 8,
    max_rounds: int = 64,
) -> QuadResult:
    """Adaptive GK15 integration of f over the finite interval [a, b].

    f is called with a 1-d array of abscissae and must return values of the
    same shape.  Panels whose error exceeds their share of tol are bisected,
    all in one vectorized batch per round.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("panel_integrate needs finite endpoints")
    if a == b:
        return QuadResult(0.0, 0.0, 0, True)
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0

    edges = np.linspace(a, b, init_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    nev = 0
    nonfinite = 0

    def rule(lo_arr, hi_arr):
        nonlocal nev, nonfinite
        mid = 0.5 * (lo_arr + hi_arr)[:, None]
        half = 0.5 * (hi_arr - lo_arr)[:, None]
        pts = mid + half * _XK[None, :]
        vals, nbad = _eval_clean(f, pts.ravel(), (pts.size,))
        nonfinite += nbad
        vals = vals.reshape(pts.shape)
        nev += pts.size
        ik = (vals * _WK[None, :]).sum(axis=1) * half[:, 0]
        ig = (vals[:, _GAUSS_IDX] * _WG[None, :]).sum(axis=1) * half[:, 0]
        return ik, np.abs(ik - ig)

    vals_i, errs = rule(lo, hi)
    for _ in range(max_rounds):
        total_err = float(errs.sum())
        if total_err <= tol or len(lo) >= max_panels:
            break
        share = max(tol / max(len(lo), 1), np.finfo(float).tiny)
        split = errs > 0.5 * share
        if not split.any():
            split = errs >= errs.max() * 0.5
        too_narrow = (hi - lo) <= np.spacing(np.abs(hi) + np.abs(lo))
        split &= ~too_narrow
        if not split.any():
            break
        keep = ~split
        s_lo, s_hi = lo[split], hi[split]
        mids = 0.5 * (s_lo + s_hi)
        new_lo = np.concatenate([s_lo, mids])
        new_hi = np.concatenate([mids, s_hi])
        new_vals, new_errs = rule(new_lo, new_hi)
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals_i = np.concatenate([vals_i[keep], new_vals])
        errs = np.concatenate([errs[keep], new_errs])

    total_err = float(errs.sum())
    value = complex(vals_i.sum()) * sign
    if abs(value.imag) == 0.0:
        value = value.real
    return QuadResult(value, total_err, nev, total_err <= tol, nonfinite)


def _aitken_step(a: complex, b: complex, c: complex):
    d1, d2 = b - a, c - b
    if abs(d1) == 0:
        return c, 0.0
    r = d2 / d1
    if abs(r) >= 0.95:
        return None
    return c + d2 * r / (1.0 - r), r


def aitken_limit(partials: Sequence[complex]) -> tuple[complex, float, bool]:
    """Safeguarded Aitken extrapolation of a partial-sum sequence.

    Returns (limit_estimate, error_estimate, accelerated).  Geometric
    convergence is detected from two consistent difference ratios; the error
    estimate then compares consecutive extrapolated values, which is sharp
    for exactly geometric tails.  Otherwise the raw last value is returned
    with the trailing differences as the error.
    """
    s = list(partials)
    if len(s) < 3:
        last = s[-1]
        err = abs(s[-1] - s[-2]) if len(s) == 2 else math.inf
        return last, err, False
    raw_err = abs(s[-1] - s[-2]) + abs(s[-2] - s[-3])
    cur = _aitken_step(s[-3], s[-2], s[-1])
    if cur is None:
        return s[-1], raw_err, False
    val, r = cur
    if isinstance(r, float) and r == 0.0:
        return val, abs(s[-1] - s[-2]), True
    if len(s) >= 4:
        prev = _aitken_step(s[-4], s[-3], s[-2])
        if prev is not None:
            val_prev, r_prev = prev
            if abs(r - r_prev) < 0.25:
                err = abs(val - val_prev) + 1e-6 * raw_err
                return val, err, True
    return s[-1], raw_err, False


def limit_integrate(
    f: Integrand,
    anchor: float,
    endpoint: float,
    tol: float,
    max_stages: int = 64,
    eval_budget: int = 60_000_000,
    panel_tol_frac: float = 0.1,
) -> QuadResult:
    """One-sided improper integral from anchor toward endpoint by Hake limit.

    endpoint may be +-inf or a finite singular abscissa.  The integral is
    accumulated over geometric bands approaching the endpoint; the partial-sum
    sequence is extrapolated with safeguarded Aitken.
    """
    partials: list[complex] = []
    total = 0.0 + 0.0j
    nev = 0
    nonfinite = 0
    quad_err = 0.0
    band_tol = tol * panel_tol_frac

    if math.isinf(endpoint):
        direction = 1.0 if endpoint > 0 else -1.0
        start = anchor
        width = max(1.0, abs(anchor))
        cuts = [start]
        for j in range(max_stages):
            cuts.append(start + direction * width * (2.0 ** (j + 1) - 1.0))
    else:
        direction = 1.0 if endpoint > anchor else -1.0
        gap = abs(endpoint - anchor)
        cuts = [anchor]
        # Geometric cutoffs closing in on the endpoint: remaining gap / 2^j.
        for j in range(1, max_stages + 1):
            cuts.append(endpoint - direction * gap * 0.5**j)

    est = 0.0 + 0.0j
    err = math.inf
    converged = False
    for j in range(len(cuts) - 1):
        lo_c, hi_c = cuts[j], cuts[j + 1]
        res = panel_integrate(f, lo_c, hi_c, tol=band_tol, max_panels=1 << 21)
        nev += res.evaluations
        nonfinite += res.nonfinite
        quad_err += res.error
        total += res.value
        partials.append(total)
        if len(partials) >= 3:
            est, err, accelerated = aitken_limit(partials)
            if err < tol * 0.5:
                converged = True
                break
            if not accelerated:
                # Oscillatory-tail stop: last band below tol with the previous
                # one already small guards against accidental cancellation.
                d_last = abs(partials[-1] - partials[-2])
                d_prev = abs(partials[-2] - partials[-3])
                if d_last < 0.5 * tol and d_prev < 8.0 * tol:
                    est = partials[-1]
                    err = d_last + 0.25 * d_prev
                    converged = True
                    break
        else:
            est = partials[-1]
            err = math.inf
        if nev > eval_budget:
            break

    value = complex(est)
    if value.imag == 0.0:
        value = value.real
    return QuadResult(value, err + quad_err, nev, converged, nonfinite)


def box_integrate(
    f: Integrand,
    lo: Sequence[float],
    hi: Sequence[float],
    tol: float = 1e-10,
    max_panels: int = 4096,
    max_rounds: int = 40,
) -> QuadResult:
    """Adaptive tensor GK15 integration over a finite axis-aligned box.

    f receives an array of shape (m, n) and returns shape (m,).  Panels are
    bisected along their widest axis.  Practical for n <= 3.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = lo.size
    if n == 1:
        res = panel_integrate(lambda x: f(x[:, None]), float(lo[0]), float(hi[0]),
                              tol=tol, max_panels=max(max_panels, 1 << 16))
        return res
    if np.any(hi <= lo):
        if np.any(hi < lo):
            raise ValueError("box_integrate needs lo <= hi")
        return QuadResult(0.0, 0.0, 0, True)

    # split each axis once up front so the embedded error estimate sees
    # structure a single panel would alias away
    init_axes = [np.linspace(lo[ax], hi[ax], 3) for ax in range(n)]

    grids = np.meshgrid(*([_XK] * n), indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=-1)      # (15^n, n)
    wk_grids = np.meshgrid(*([_WK] * n), indexing="ij")
    wk_full = np.ones(offsets.shape[0])
    for ax in range(n):
        wk_full = wk_full * wk_grids[ax].ravel()
    # Gauss sub-rule: positions of the embedded G7 nodes inside the tensor grid.
    strides = [15 ** (n - 1 - ax) for ax in range(n)]
    g_grids = np.meshgrid(*([_GAUSS_IDX] * n), indexing="ij")
    gw_grids = np.meshgrid(*([_WG] * n), indexing="ij")
    g_flat = sum(g_grids[ax].ravel() * strides[ax] for ax in range(n))
    g_w = np.ones(g_flat.size)
    for ax in range(n):
        g_w = g_w * gw_grids[ax].ravel()

    corner_grids = np.meshgrid(*[axv[:-1] for axv in init_axes], indexing="ij")
    upper_grids = np.meshgrid(*[axv[1:] for axv in init_axes], indexing="ij")
    los = np.stack([g.ravel() for g in corner_grids], axis=-1)
    his = np.stack([g.ravel() for g in upper_grids], axis=-1)
    nev = 0
    nonfinite = 0

    def rule(lo_arr, hi_arr):
        nonlocal nev, nonfinite
        mid = 0.5 * (lo_arr + hi_arr)
        half = 0.5 * (hi_arr - lo_arr)
        pts = mid[:, None, :] + half[:, None, :] * offsets[None, :, :]
        flat = pts.reshape(-1, n)
        vals, nbad = _eval_clean(f, flat, (flat.shape[0],))
        nonfinite += nbad
        nev += flat.shape[0]
        vals = vals.reshape(lo_arr.shape[0], -1)
        jac = np.prod(half, axis=1)
        ik = vals @ wk_full * jac
        ig = vals[:, g_flat] @ g_w * jac
        return ik, np.abs(ik - ig)

    vals_i, errs = rule(los, his)
    for _ in range(max_rounds):
        total_err = float(errs.sum())
        if total_err <= tol or los.shape[0] >= max_panels:
            break
        share = max(tol / max(los.shape[0], 1), np.finfo(float).tiny)
        split = errs > 0.5 * share
        if not split.any():
            break
        keep = ~split
        s_lo, s_hi = los[split], his[split]
        widths = s_hi - s_lo
        axis = np.argmax(widths, axis=1)
        mids = s_lo.copy()
        rows = np.arange(s_lo.shape[0])
        mids[rows, axis] = 0.5 * (s_lo[rows, axis] + s_hi[rows, axis])
        left_hi = s_hi.copy()
        left_hi[rows, axis] = mids[rows, axis]
        right_lo = s_lo.copy()
        right_lo[rows, axis] = mids[rows, axis]
        new_lo = np.concatenate([s_lo, right_lo])
        new_hi = np.concatenate([left_hi, s_hi])
        new_vals, new_errs = rule(new_lo, new_hi)
        los = np.concatenate([los[keep], new_lo])
        his = np.concatenate([his[keep], new_hi])
        vals_i = np.concatenate([vals_i[keep], new_vals])
        errs = np.concatenate([errs[keep], new_errs])

    total_err = float(errs.sum())
    value = complex(vals_i.sum())
    if value.imag == 0.0:
        value = value.real
    return QuadResult(value, total_err, nev, total_err <= tol, nonfinite)
