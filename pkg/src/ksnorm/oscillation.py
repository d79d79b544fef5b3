"""Maximal functions, BMO-family seminorms, Zachary norms, heat evolution.

Grid fields are cell samples on [lo, hi]^n treated as piecewise constant
(composite midpoint rule) and extended by zero outside the box; every
quantity here is a norm of the truncated field.  Suprema over "all cubes"
are discretized to cell-aligned cubes (odd cell counts) centered at grid
points with a dyadic ladder of half-extents, reported as certified lower
bounds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import cubes
from .config import DEFAULT_K
from .errors import DomainError
from .reports import NormReport


@dataclass
class GridField:
    """Uniform cell-centered samples over a box; zero outside."""

    values: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        n = self.values.ndim
        self.lo = np.asarray(self.lo, dtype=float).reshape(n)
        self.hi = np.asarray(self.hi, dtype=float).reshape(n)
        if len(set(self.values.shape)) != 1:
            raise DomainError("grid must have equal resolution per axis")
        if not np.all(self.hi > self.lo):
            raise DomainError("box must have positive extent")
        steps = (self.hi - self.lo) / self.values.shape[0]
        if not np.allclose(steps, steps[0], rtol=1e-12):
            raise DomainError("grid spacing must be uniform across axes")
        if not np.all(np.isfinite(np.asarray(self.values, dtype=complex))):
            raise DomainError("grid values must be finite")

    @property
    def n(self) -> int:
        return self.values.ndim

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return float((self.hi[0] - self.lo[0]) / self.N)

    def centers(self, axis: int = 0) -> np.ndarray:
        return self.lo[axis] + (np.arange(self.N) + 0.5) * self.h

    @classmethod
    def sample(cls, field, R: float, N: int) -> "GridField":
        n = field.n
        axes = [(-R + (np.arange(N) + 0.5) * (2.0 * R / N)) for _ in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        vals = field(pts).reshape((N,) * n)
        if np.all(np.abs(np.imag(vals)) == 0):
            vals = np.real(vals)
        return cls(vals, np.full(n, -R), np.full(n, R))

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(values, self.lo.copy(), self.hi.copy())


@dataclass(frozen=True)
class CubeQuery:
    """Cube [center - r, center + r]^n with r from the dyadic cell ladder."""

    center: tuple
    radius: float


def radius_ladder(f: GridField) -> list[float]:
    """Half-extents (c + 1/2) h for c = 0, 1, 2, 4, ... fitting in the grid."""
    out = []
    c = 0
    while 2 * c + 1 <= f.N:
        out.append((c + 0.5) * f.h)
        c = 1 if c == 0 else 2 * c
    return out


def _axis_overlap_weights(f: GridField, axis: int, lo: float, hi: float) -> np.ndarray:
    """Lengths of [lo, hi] overlapped with each grid cell along an axis."""
    edges = f.lo[axis] + np.arange(f.N + 1) * f.h
    left = np.maximum(edges[:-1], lo)
    right = np.minimum(edges[1:], hi)
    return np.maximum(right - left, 0.0)


def integrate_box(f: GridField, lo, hi) -> complex:
    """Integral of the zero-extended piecewise-constant field over a box."""
    lo = np.asarray(lo, dtype=float).reshape(f.n)
    hi = np.asarray(hi, dtype=float).reshape(f.n)
    ws = [_axis_overlap_weights(f, ax, lo[ax], hi[ax]) for ax in range(f.n)]
    acc = f.values
    for ax in range(f.n - 1, -1, -1):
        acc = np.tensordot(acc, ws[ax], axes=([ax], [0]))
    return complex(acc) if np.iscomplexobj(f.values) else float(acc)


def cube_avg(f: GridField, q: CubeQuery) -> complex:
    """Average of f over the cube, composite midpoint rule on grid cells."""
    c = np.asarray(q.center, dtype=float).reshape(f.n)
    if np.any(c - q.radius < f.lo - 1e-12) or np.any(c + q.radius > f.hi + 1e-12):
        raise DomainError("cube query must lie inside the grid box")
    vol = (2.0 * q.radius) ** f.n
    return integrate_box(f, c - q.radius, c + q.radius) / vol


def _window_mean(values: np.ndarray, c: int) -> np.ndarray:
    n = values.ndim
    w = 2 * c + 1
    wins = sliding_window_view(values, (w,) * n)
    return wins.mean(axis=tuple(range(-n, 0)))


def _window_mad(values: np.ndarray, c: int, means: np.ndarray) -> np.ndarray:
    n = values.ndim
    w = 2 * c + 1
    wins = sliding_window_view(values, (w,) * n)
    expand = means[(...,) + (None,) * n]
    return np.abs(wins - expand).mean(axis=tuple(range(-n, 0)))


def _dilate_max(arr: np.ndarray, c: int, N: int) -> np.ndarray:
    """max over valid centers y with |y - x|_inf <= c, padded with -inf."""
    n = arr.ndim
    w = 2 * c + 1
    padded = np.pad(arr, 2 * c, mode="constant", constant_values=-np.inf)
    wins = sliding_window_view(padded, (w,) * n)
    out = wins.max(axis=tuple(range(-n, 0)))
    assert out.shape == (N,) * n
    return out


def _cell_ladder(N: int) -> list[int]:
    out = []
    c = 0
    while 2 * c + 1 <= N:
        out.append(c)
        c = 1 if c == 0 else 2 * c
    return out


def sharp_maximal_grid(f: GridField) -> np.ndarray:
    """M^#(f) at every grid point: max mean oscillation over the cube family."""
    best = np.full((f.N,) * f.n, -np.inf)
    for c in _cell_ladder(f.N):
        means = _window_mean(f.values, c)
        mad = _window_mad(f.values, c, means)
        best = np.maximum(best, _dilate_max(mad, c, f.N))
    return best


def weak_maximal_grid(f: GridField) -> np.ndarray:
    """M^w(f) at every grid point: max |Avg - |Avg|| over the cube family."""
    best = np.full((f.N,) * f.n, -np.inf)
    for c in _cell_ladder(f.N):
        means = _window_mean(f.values, c)
        w = np.abs(means - np.abs(means))
        best = np.maximum(best, _dilate_max(w, c, f.N))
    return best


def _grid_index(f: GridField, x) -> tuple:
    x = np.asarray(x, dtype=float).reshape(f.n)
    idx = np.floor((x - f.lo) / f.h).astype(int)
    if np.any(idx < 0) or np.any(idx >= f.N):
        raise DomainError("point outside the grid")
    return tuple(idx)


def sharp_maximal(f: GridField, x) -> float:
    return float(sharp_maximal_grid(f)[_grid_index(f, x)])


def weak_maximal(f: GridField, x) -> float:
    return float(weak_maximal_grid(f)[_grid_index(f, x)])


def bmo_norms(f: GridField) -> dict:
    """{"bmo": ||M^#(f)||_inf, "bmow": ||M^w(f)||_inf} over the grid."""
    return {
        "bmo": float(sharp_maximal_grid(f).max()),
        "bmow": float(weak_maximal_grid(f).max()),
    }


def _zachary_cube_averages(f: GridField, K: int) -> np.ndarray:
    out = np.empty(K, dtype=complex)
    for k in range(1, K + 1):
        cube = cubes.cube_at(k, f.n)
        out[k - 1] = integrate_box(f, cube.lo, cube.hi) / cube.volume
    return out


def zachary_norm(f: GridField, p: float = 2.0, K: int = DEFAULT_K) -> NormReport:
    """{sum t_k |Avg_k f - |Avg_k f||^p}^{1/p} over the enumerated cubes.

    Cubes are clipped to the grid box through the zero extension of f; the
    per-term tail bound is 2 max|f|.
    """
    if not p >= 1:
        raise DomainError("p must be in [1, inf]")
    avgs = _zachary_cube_averages(f, K)
    terms = np.abs(avgs - np.abs(avgs))
    per_term = 2.0 * float(np.abs(f.values).max())
    if math.isinf(p):
        value = float(terms.max()) if K else 0.0
        tb = cubes.tail_bound(K, p, per_term)
        return NormReport(value=value, p=p, K=K, tail_bound=tb.value,
                          tail_is_heuristic=True)
    weights = np.array([cubes.weight(k) for k in range(1, K + 1)])
    value = float((weights @ terms**p) ** (1.0 / p))
    tb = cubes.tail_bound(K, p, per_term)
    return NormReport(value=value, p=p, K=K, tail_bound=tb.value)


def subtract_min_average(f: GridField, K: int = DEFAULT_K) -> GridField:
    """Canonical representative: shift so the least enumerated-cube average is 0."""
    avgs = np.real(_zachary_cube_averages(f, K))
    return f.with_values(f.values - avgs.min())


# ---------------------------------------------------------------------------
# Heat evolution and Carleson-type norms


def heat_evolve(f: GridField, s: float) -> GridField:
    """Solution at time s of u_t = Laplacian u with u(., 0) = f (zero-padded).

    Separable convolution with a sampled Gaussian of variance 2s per axis,
    normalized to unit mass so constants are fixed points.
    """
    if not s > 0:
        raise DomainError("time must be positive")
    sigma = math.sqrt(2.0 * s)
    rad = int(math.ceil(6.0 * sigma / f.h))
    if rad >= f.N:
        warnings.warn("heat stencil exceeds the grid; boundary truncation dominates")
    offs = np.arange(-rad, rad + 1) * f.h
    w = np.exp(-(offs**2) / (4.0 * s))
    w = w / w.sum()

    def conv(v):
        return np.convolve(np.pad(v, rad), w, mode="valid")

    out = f.values
    for ax in range(f.n):
        out = np.apply_along_axis(conv, ax, out)
    return f.with_values(out)


def _evolved_padded(f: GridField, s: float, pad: int) -> np.ndarray:
    """Heat evolution of the zero-extended field on a grid enlarged by pad cells.

    Needed so gradient stencils near the box boundary see the true outward
    diffusion instead of a hard zero crop.
    """
    sigma = math.sqrt(2.0 * s)
    rad = int(math.ceil(6.0 * sigma / f.h))
    offs = np.arange(-rad, rad + 1) * f.h
    w = np.exp(-(offs**2) / (4.0 * s))
    w = w / w.sum()

    def conv(v):
        return np.convolve(np.pad(v, rad + pad), w, mode="valid")

    out = f.values
    for ax in range(f.n):
        out = np.apply_along_axis(conv, ax, out)
    return out


def _crop(values: np.ndarray, pad: int) -> np.ndarray:
    sl = tuple(slice(pad, -pad) for _ in range(values.ndim))
    return values[sl]


def _gradient4(values: np.ndarray, h: float) -> list[np.ndarray]:
    """4th-order central differences with zero extension outside the box."""
    grads = []
    for ax in range(values.ndim):
        def shift(k):
            padded = np.swapaxes(values, 0, ax)
            out = np.zeros_like(padded)
            if k > 0:
                out[:-k] = padded[k:]
            elif k < 0:
                out[-k:] = padded[:k]
            else:
                out = padded.copy()
            return np.swapaxes(out, 0, ax)

        g = (-shift(2) + 8.0 * shift(1) - 8.0 * shift(-1) + shift(-2)) / (12.0 * h)
        grads.append(g)
    return grads


def _s_grid(f: GridField, radii: Sequence[float], nodes_per_decade: int = 8) -> np.ndarray:
    s_min = (f.h / 4.0) ** 2
    s_max = max(r * r for r in radii)
    decades = max(math.log10(s_max / s_min), 1e-9)
    count = max(int(decades * nodes_per_decade) + 2, 4)
    base = np.geomspace(s_min, s_max, count)
    targets = np.array([r * r for r in radii if r * r >= s_min])
    grid = np.unique(np.concatenate([base, targets]))
    return grid


def _prefix_time_integrals(fields: list[np.ndarray], s_grid: np.ndarray) -> list[np.ndarray]:
    """Cumulative integral over s: left rectangle at s_0, trapezoid after."""
    prefixes = [s_grid[0] * fields[0]]
    for j in range(1, len(s_grid)):
        step = 0.5 * (s_grid[j] - s_grid[j - 1]) * (fields[j] + fields[j - 1])
        prefixes.append(prefixes[-1] + step)
    return prefixes


def _sup_box_mean(arr: np.ndarray, c: int) -> float:
    return float(np.real(_window_mean(arr, c)).max()) if arr.size else 0.0


def carleson_norms(f: GridField, r_ladder: Optional[Sequence[float]] = None,
                   nodes_per_decade: int = 8) -> dict:
    """Heat-evolution characterizations: BMO (|grad u|^2), BMO^{-1} (|u|^2),
    and BMO^{-w} (|integral of u|^2), all sup over centers and ladder radii."""
    radii = list(r_ladder) if r_ladder is not None else radius_ladder(f)
    hw = (f.hi - f.lo) / 2.0
    radii = [r for r in radii if r <= hw.min() / 2.0 + 1e-12] or [radius_ladder(f)[0]]
    s_grid = _s_grid(f, radii, nodes_per_decade)

    grad_sq = []
    u_sq = []
    u_raw = []
    pad = 4
    for s in s_grid:
        u_pad = _evolved_padded(f, float(s), pad)
        gs = [_crop(g, pad) for g in _gradient4(u_pad, f.h)]
        u_vals = _crop(u_pad, pad)
        grad_sq.append(sum(np.abs(g) ** 2 for g in gs))
        u_sq.append(np.abs(u_vals) ** 2)
        u_raw.append(u_vals)

    p_grad = _prefix_time_integrals(grad_sq, s_grid)
    p_usq = _prefix_time_integrals(u_sq, s_grid)
    p_u = _prefix_time_integrals(u_raw, s_grid)

    bmo_c = 0.0
    bmo_m1 = 0.0
    bmo_mw = 0.0
    per_radius = []
    for r in radii:
        j = int(np.searchsorted(s_grid, r * r))
        j = min(j, len(s_grid) - 1)
        c = int(round(r / f.h - 0.5))
        c = max(0, min(c, (f.N - 1) // 2))
        vol = ((2 * c + 1) * f.h) ** f.n
        v_c = math.sqrt(_sup_box_mean(p_grad[j], c))
        v_m1 = math.sqrt(_sup_box_mean(p_usq[j], c))
        means_u = _window_mean(p_u[j], c)
        v_mw = math.sqrt(float((np.abs(means_u) ** 2 * vol).max()))
        bmo_c = max(bmo_c, v_c)
        bmo_m1 = max(bmo_m1, v_m1)
        bmo_mw = max(bmo_mw, v_mw)
        per_radius.append({"r": float(r), "bmo_carleson": v_c,
                           "bmo_minus1": v_m1, "bmo_minusw": v_mw})
    return {"bmo_carleson": bmo_c, "bmo_minus1": bmo_m1, "bmo_minusw": bmo_mw,
            "per_radius": per_radius, "s_nodes": len(s_grid)}


def zachary_neg_norm(f: GridField, p: float = 2.0, K: int = DEFAULT_K,
                     r_ladder: Optional[Sequence[float]] = None,
                     nodes_per_decade: int = 8) -> NormReport:
    """sup over r of {sum t_k (1/vol_k) |int_{Q_k} int_0^{r^2} u ds dy|^p}^{1/p};
    for p = inf the sup over k and r of (1/vol_k)|...|."""
    if not p >= 1:
        raise DomainError("p must be in [1, inf]")
    radii = list(r_ladder) if r_ladder is not None else radius_ladder(f)
    s_grid = _s_grid(f, radii, nodes_per_decade)
    u_raw = [heat_evolve(f, float(s)).values for s in s_grid]
    p_u = _prefix_time_integrals(u_raw, s_grid)

    cube_list = [cubes.cube_at(k, f.n) for k in range(1, K + 1)]
    weights = np.array([cubes.weight(k) for k in range(1, K + 1)])
    vols = np.array([c.volume for c in cube_list])

    best = 0.0
    best_r = radii[0] if radii else 0.0
    max_v = 0.0
    for r in radii:
        j = min(int(np.searchsorted(s_grid, r * r)), len(s_grid) - 1)
        field_j = GridField(p_u[j], f.lo, f.hi)
        ints = np.array([integrate_box(field_j, c.lo, c.hi) for c in cube_list])
        max_v = max(max_v, float(np.abs(p_u[j]).max()))
        if math.isinf(p):
            value = float((np.abs(ints) / vols).max()) if K else 0.0
        else:
            value = float((weights @ (np.abs(ints) ** p / vols)) ** (1.0 / p))
        if value > best:
            best, best_r = value, float(r)

    n = f.n
    vol_max = (0.5 / math.sqrt(n)) ** n
    if math.isinf(p):
        tail = vol_max ** 0 * max_v  # |I_k|/vol_k <= max |V|
        heuristic = True
    else:
        tail = cubes.weight_tail(K) ** (1.0 / p) * vol_max ** ((p - 1.0) / p) * max_v
        heuristic = False
    return NormReport(value=best, p=p, K=K, tail_bound=float(tail),
                      tail_is_heuristic=heuristic,
                      extras={"argmax_r": best_r})
