"""Gauge (Henstock-Kurzweil) integration and the Alexiewicz / Vitali norms.

Production integration uses adaptive Gauss-Kronrod panels plus geometric
Hake limits at improper or singular endpoints; the tag/gauge types are kept
for the definitional operations (is_fine, riemann_sum, fine partitions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .config import DEFAULT_SEARCH_RADIUS
from .errors import DomainError, EvaluationError, NonConvergenceError
from .fields import ScalarField, _as_points
from .quadrature import QuadResult, box_integrate, limit_integrate, panel_integrate
from .reports import IntegralResult, NormReport

_NONFINITE_FRACTION = 1e-3


@dataclass
class Gauge:
    """A positive radius function delta on a closed interval [a, b]."""

    a: float
    b: float
    delta: Callable[[float], float]

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError("gauge domain needs a < b")

    def radius(self, t: float) -> float:
        r = float(self.delta(t))
        if not r > 0:
            raise DomainError(f"gauge must be positive, got delta({t}) = {r}")
        return r


@dataclass
class TaggedPartition:
    """Nodes a = t_0 <= ... <= t_n = b with one tag per cell."""

    nodes: np.ndarray
    tags: np.ndarray

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.tags = np.asarray(self.tags, dtype=float)
        if self.nodes.ndim != 1 or self.tags.ndim != 1:
            raise DomainError("nodes and tags must be 1-d")
        if self.tags.size != self.nodes.size - 1:
            raise DomainError("need exactly one tag per cell")
        if np.any(np.diff(self.nodes) < 0):
            raise DomainError("nodes must be nondecreasing")
        if np.any(self.tags < self.nodes[:-1]) or np.any(self.tags > self.nodes[1:]):
            raise DomainError("tags must interleave their cells")

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @classmethod
    def uniform(cls, a: float, b: float, cells: int, tag_at: str = "mid") -> "TaggedPartition":
        nodes = np.linspace(a, b, cells + 1)
        if tag_at == "mid":
            tags = 0.5 * (nodes[:-1] + nodes[1:])
        elif tag_at == "left":
            tags = nodes[:-1].copy()
        elif tag_at == "right":
            tags = nodes[1:].copy()
        else:
            raise ValueError(tag_at)
        return cls(nodes, tags)


def is_fine(partition: TaggedPartition, gauge: Gauge) -> bool:
    """True iff every cell [t_{i-1}, t_i] lies in (tag - delta(tag), tag + delta(tag))."""
    if not (math.isclose(partition.a, gauge.a) and math.isclose(partition.b, gauge.b)):
        raise DomainError("partition and gauge must share a domain")
    for lo, hi, tag in zip(partition.nodes[:-1], partition.nodes[1:], partition.tags):
        r = gauge.radius(tag)
        if not (tag - r < lo and hi < tag + r):
            return False
    return True


def riemann_sum(f, partition: TaggedPartition) -> complex:
    """Sum of cell width times f(tag)."""
    fn = f if isinstance(f, ScalarField) else ScalarField_from_callable(f)
    vals = fn(partition.tags)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("f is non-finite at a tag")
    total = complex(np.sum(partition.widths * vals))
    return total.real if total.imag == 0 else total


def fine_partition(gauge: Gauge, max_depth: int = 48) -> TaggedPartition:
    """Cousin-style construction: bisect greedily until every cell is fine."""
    nodes = [gauge.a]
    tags = []
    stack = [(gauge.a, gauge.b, 0)]
    out = []
    while stack:
        lo, hi, depth = stack.pop()
        tag = None
        for cand in (0.5 * (lo + hi), lo, hi):
            r = gauge.radius(cand)
            if cand - r < lo and hi < cand + r:
                tag = cand
                break
        if tag is not None:
            out.append((lo, hi, tag))
            continue
        if depth >= max_depth:
            raise NonConvergenceError("no fine partition within depth budget")
        mid = 0.5 * (lo + hi)
        stack.append((mid, hi, depth + 1))
        stack.append((lo, mid, depth + 1))
    out.sort()
    for lo, hi, tag in out:
        nodes.append(hi)
        tags.append(tag)
    return TaggedPartition(np.array(nodes), np.array(tags))


def ScalarField_from_callable(f) -> ScalarField:
    from .fields import CallableField

    if isinstance(f, ScalarField):
        return f
    return CallableField(f, 1)


def _finite_probe(fn: ScalarField, x: float) -> bool:
    with np.errstate(all="ignore"):
        v = fn(np.array([x]))
    return bool(np.isfinite(v[0]))


def _check_nonfinite(res: QuadResult):
    if res.nonfinite > max(8, _NONFINITE_FRACTION * max(res.evaluations, 1)):
        raise EvaluationError(
            f"integrand non-finite at {res.nonfinite} of {res.evaluations} probes")


def hk_integrate_1d(
    f,
    a: float,
    b: float,
    tol: float = 1e-9,
    singularities: Sequence[float] = (),
) -> IntegralResult:
    """HK integral of f over [a, b] (extended-real endpoints allowed).

    Improper endpoints and interior singularities are handled by geometric
    Hake limits; singular abscissae may be supplied or are detected from
    non-finite endpoint probes.
    """
    if not a < b:
        raise DomainError("need a < b")
    fn = ScalarField_from_callable(f)
    raw = lambda x: fn(x)

    sing = sorted(s for s in singularities if a < s < b)
    pts = [a] + sing + [b]

    endpoint_singular = set()
    for endpoint in (a, b):
        if math.isfinite(endpoint):
            near = endpoint + (1e-13 if endpoint == a else -1e-13) * max(1.0, abs(endpoint))
            if not (_finite_probe(fn, endpoint) and _finite_probe(fn, near)):
                endpoint_singular.add(endpoint)

    value = 0.0 + 0.0j
    err = 0.0
    nev = 0
    converged = True

    segments = list(zip(pts[:-1], pts[1:]))
    for u, v in segments:
        u_improper = (not math.isfinite(u)) or (u in endpoint_singular) or (u in sing)
        v_improper = (not math.isfinite(v)) or (v in endpoint_singular) or (v in sing)
        pieces = []
        if u_improper and v_improper:
            if math.isfinite(u) and math.isfinite(v):
                mid = 0.5 * (u + v)
            elif math.isfinite(u):
                mid = u + 1.0
            elif math.isfinite(v):
                mid = v - 1.0
            else:
                mid = 0.0
            pieces = [(u, mid, "lo"), (mid, v, "hi")]
        elif u_improper:
            pieces = [(u, v, "lo")]
        elif v_improper:
            pieces = [(u, v, "hi")]
        else:
            pieces = [(u, v, "none")]

        for lo_, hi_, mode in pieces:
            if mode == "none":
                res = panel_integrate(raw, lo_, hi_, tol=tol * 0.5 / len(pieces))
                value += res.value
            elif mode == "hi":
                res = limit_integrate(raw, anchor=lo_, endpoint=hi_, tol=tol / len(pieces))
                value += res.value
            else:  # singular/infinite lower end: integrate from hi_ toward lo_
                res = limit_integrate(raw, anchor=hi_, endpoint=lo_, tol=tol / len(pieces))
                value -= res.value
            _check_nonfinite(res)
            err += res.error
            nev += res.evaluations
            converged = converged and res.converged

    out = complex(value)
    if out.imag == 0:
        out = out.real
    return IntegralResult(out, float(err), bool(converged), int(nev))


def hk_integrate_box(
    f,
    lo: Sequence[float],
    hi: Sequence[float],
    tol: float = 1e-9,
) -> IntegralResult:
    """Iterated HK integral over a product of intervals, inner axis first.

    Finite boxes with no singular probes use tensor Gauss-Kronrod panels;
    any improper edge falls back to iterated one-dimensional Hake integrals.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = lo.size
    if np.any(hi < lo):
        raise DomainError("box needs lo <= hi")
    if isinstance(f, ScalarField):
        if f.n != n:
            raise DomainError("field dimension does not match box")
        fn = f
    else:
        from .fields import CallableField

        fn = CallableField(f, n)

    if np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)):
        res = box_integrate(lambda p: fn(p), lo, hi, tol=tol)
        _check_nonfinite(res)
        return IntegralResult(res.value, res.error, res.converged, res.evaluations)

    # Iterated route: integrate x_1 innermost, then x_2, ...
    def level(axis: int, fixed: list) -> IntegralResult:
        if axis < 0:
            raise AssertionError
        lo_a, hi_a = float(lo[axis]), float(hi[axis])
        if axis == 0:
            def inner(x, rest=tuple(fixed)):
                pts = np.empty((np.size(x), n))
                pts[:, 0] = x
                for d, val in enumerate(rest):
                    pts[:, d + 1] = val
                return fn(pts)

            return hk_integrate_1d(inner, lo_a, hi_a, tol=tol / n)

        results = {"err": 0.0, "nev": 0, "converged": True}

        def integrand(x):
            outs = np.empty(np.size(x), dtype=complex)
            for idx, xv in enumerate(np.atleast_1d(x)):
                sub = level(axis - 1, [xv] + fixed)
                results["err"] = max(results["err"], sub.abs_error_estimate)
                results["nev"] += sub.evaluations
                results["converged"] = results["converged"] and sub.converged
                outs[idx] = sub.value
            if np.all(outs.imag == 0):
                return outs.real
            return outs

        top = hk_integrate_1d(integrand, lo_a, hi_a, tol=tol / n)
        return IntegralResult(top.value, top.abs_error_estimate + results["err"],
                              top.converged and results["converged"],
                              top.evaluations + results["nev"])

    return level(n - 1, [])


def _corner_integral(fn: ScalarField, upper: np.ndarray, lower_cap: np.ndarray,
                     tol: float) -> IntegralResult:
    """Integral of fn over the corner box (-inf, upper], truncated at lower_cap."""
    lo = lower_cap.copy()
    return hk_integrate_box(fn, lo, upper, tol=tol)


def alexiewicz_norm(
    f,
    search_box: Optional[tuple] = None,
    tol: float = 1e-6,
    base_grid: int = 64,
    max_refine: int = 3,
) -> NormReport:
    """sup over corner points x in search_box of |int_{-inf}^{x} f|.

    The sup is taken over a dyadically refined corner grid with a
    golden-section polish; the returned value is a certified lower bound and
    extras carry the last refinement gap.
    """
    fn = ScalarField_from_callable(f) if not isinstance(f, ScalarField) else f
    n = fn.n
    if search_box is None:
        R = DEFAULT_SEARCH_RADIUS
        lo_s = np.full(n, -R)
        hi_s = np.full(n, R)
    else:
        lo_s = np.asarray(search_box[0], dtype=float).reshape(n)
        hi_s = np.asarray(search_box[1], dtype=float).reshape(n)

    if fn.support is not None:
        lower = np.minimum(fn.support[0], lo_s)
    else:
        lower = np.full(n, -math.inf)

    if n == 1:
        return _alexiewicz_1d(fn, float(lo_s[0]), float(hi_s[0]),
                              float(lower[0]), tol, base_grid, max_refine)
    if n == 2 and np.all(np.isfinite(lower)):
        return _alexiewicz_2d(fn, lo_s, hi_s, lower, tol, max_refine)
    raise DomainError("alexiewicz_norm supports n=1, or n=2 with compactly supported fields")


def _alexiewicz_1d(fn, lo_s, hi_s, lower, tol, base_grid, max_refine) -> NormReport:
    nev = 0
    quad_err = 0.0
    if math.isinf(lower):
        base_res = limit_integrate(lambda x: fn(x), anchor=lo_s, endpoint=-math.inf,
                                   tol=tol * 0.25)
        if not base_res.converged:
            raise NonConvergenceError("corner integral from -inf did not converge")
        base = -base_res.value
        nev += base_res.evaluations
        quad_err += base_res.error
        start = lo_s
    else:
        start = min(lower, lo_s)
        base = 0.0

    sup = None
    gap = math.inf
    m = base_grid
    best_x = None
    for _ in range(max_refine + 1):
        xs = np.linspace(start, hi_s, m + 1)
        incs = np.empty(m, dtype=complex)
        for j in range(m):
            res = panel_integrate(lambda x: fn(x), xs[j], xs[j + 1], tol=tol * 0.25 / m)
            incs[j] = res.value
            nev += res.evaluations
            quad_err += res.error
        G = base + np.concatenate([[0.0], np.cumsum(incs)])
        mask = xs >= lo_s - 1e-15
        vals = np.abs(G[mask])
        new_sup = float(vals.max())
        best_x = float(xs[mask][vals.argmax()])
        if sup is not None:
            gap = abs(new_sup - sup)
            sup = max(sup, new_sup)
            if gap < tol * 0.25:
                break
        else:
            sup = new_sup
        m *= 2

    # golden-section polish of |G| around the best corner
    idx = np.searchsorted(xs, best_x)
    lo_b = xs[max(idx - 1, 0)]
    hi_b = xs[min(idx + 1, len(xs) - 1)]
    g_best = None

    def corner_value(x):
        nonlocal nev, quad_err
        res = panel_integrate(lambda t: fn(t), best_x, x, tol=tol * 0.1) if x != best_x \
            else QuadResult(0.0, 0.0, 0, True)
        nev += res.evaluations
        quad_err += res.error
        base_val = G[idx] if xs[idx] == best_x else G[np.searchsorted(xs, best_x)]
        return abs(base_val + res.value)

    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a_, b_ = lo_b, hi_b
    c_ = b_ - phi * (b_ - a_)
    d_ = a_ + phi * (b_ - a_)
    fc, fd = corner_value(c_), corner_value(d_)
    for _ in range(40):
        if b_ - a_ < max(1e-12, tol * 1e-3):
            break
        if fc < fd:
            a_, c_, fc = c_, d_, fd
            d_ = a_ + phi * (b_ - a_)
            fd = corner_value(d_)
        else:
            b_, d_, fd = d_, c_, fc
            c_ = b_ - phi * (b_ - a_)
            fc = corner_value(c_)
    polished = max(fc, fd, sup)
    gap = min(gap, abs(polished - sup) + tol * 0.25)
    return NormReport(value=float(polished), p=None, K=None, tail_bound=0.0,
                      extras={"sup_gap": float(gap), "quad_error": float(quad_err),
                              "argmax": best_x, "evaluations": int(nev)})


def _alexiewicz_2d(fn, lo_s, hi_s, lower, tol, max_refine) -> NormReport:
    upper = np.maximum(hi_s, fn.support[1] if fn.support is not None else hi_s)
    start = lower
    sup = None
    gap = math.inf
    best = None
    m = 16
    nev = 0
    for _ in range(max_refine + 1):
        xs = np.linspace(start[0], upper[0], m + 1)
        ys = np.linspace(start[1], upper[1], m + 1)
        cells = np.empty((m, m), dtype=complex)
        for i0 in range(m):
            for j0 in range(m):
                res = box_integrate(lambda p: fn(p),
                                    [xs[i0], ys[j0]], [xs[i0 + 1], ys[j0 + 1]],
                                    tol=tol * 0.25 / (m * m))
                cells[i0, j0] = res.value
                nev += res.evaluations
        G = np.zeros((m + 1, m + 1), dtype=complex)
        G[1:, 1:] = np.cumsum(np.cumsum(cells, axis=0), axis=1)
        in_x = xs >= lo_s[0] - 1e-15
        in_y = ys >= lo_s[1] - 1e-15
        sub = np.abs(G[np.ix_(in_x, in_y)])
        new_sup = float(sub.max())
        arg = np.unravel_index(sub.argmax(), sub.shape)
        best = (float(xs[in_x][arg[0]]), float(ys[in_y][arg[1]]))
        if sup is not None:
            gap = abs(new_sup - sup)
            sup = max(sup, new_sup)
            if gap < tol * 0.5:
                break
        else:
            sup = new_sup
        m *= 2

    # coordinate polish; corner values reuse the prefix grid plus two thin
    # strip integrals, so each evaluation stays cheap
    def corner(x, y):
        nonlocal nev
        ix = min(int(np.searchsorted(xs, x, side="right")) - 1, len(xs) - 1)
        iy = min(int(np.searchsorted(ys, y, side="right")) - 1, len(ys) - 1)
        ix, iy = max(ix, 0), max(iy, 0)
        total = G[ix, iy]
        if x > xs[ix]:
            res = box_integrate(lambda p: fn(p), [xs[ix], start[1]], [x, y],
                                tol=tol * 0.05)
            total += res.value
            nev += res.evaluations
        if y > ys[iy]:
            res = box_integrate(lambda p: fn(p), [start[0], ys[iy]], [xs[ix], y],
                                tol=tol * 0.05)
            total += res.value
            nev += res.evaluations
        return abs(total)

    x0, y0 = best
    span_x = (upper[0] - start[0]) / m
    span_y = (upper[1] - start[1]) / m
    val = sup
    for _ in range(2):
        xs_c = np.linspace(max(lo_s[0], x0 - span_x), min(upper[0], x0 + span_x), 9)
        vals = [corner(x, y0) for x in xs_c]
        x0 = float(xs_c[int(np.argmax(vals))])
        val = max(val, max(vals))
        ys_c = np.linspace(max(lo_s[1], y0 - span_y), min(upper[1], y0 + span_y), 9)
        vals = [corner(x0, y) for y in ys_c]
        y0 = float(ys_c[int(np.argmax(vals))])
        val = max(val, max(vals))
        span_x /= 4.0
        span_y /= 4.0
    return NormReport(value=float(val), tail_bound=0.0,
                      extras={"sup_gap": float(gap), "argmax": [x0, y0],
                              "evaluations": int(nev)})


def vitali_variation(f, box: tuple, tol: float = 1e-9) -> float:
    """V(f) = integral over the box of |d^n f / dx_1 ... dx_n|.

    The mixed partial comes from the field's derivative mechanism (symbolic
    for expression fields, 4th-order central differences otherwise).
    """
    fn = ScalarField_from_callable(f) if not isinstance(f, ScalarField) else f
    lo = np.asarray(box[0], dtype=float).reshape(fn.n)
    hi = np.asarray(box[1], dtype=float).reshape(fn.n)
    g = fn
    for axis in range(fn.n):
        g = g.derivative(axis)
    res = box_integrate(lambda p: np.abs(g(p)), lo, hi, tol=tol,
                        max_panels=1 << 15)
    if res.nonfinite:
        raise EvaluationError("mixed partial non-finite on the box")
    return float(np.real(res.value))
