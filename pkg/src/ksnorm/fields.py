"""Scalar and vector fields: expression-backed, callable, or sampled grids.

A ScalarField evaluates on arrays of points of shape (m, n) and may carry a
support box (it is identically zero outside).  Grid-sampled fields
interpolate multilinearly and vanish outside their box.
"""

from __future__ import annotations

import itertools
from typing import Callable, Optional, Sequence

import numpy as np

from . import expr as _expr
from .errors import CapabilityError

_TOKEN_COUNTER = itertools.count(1)


def _as_points(points, n: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if n == 1 and (pts.ndim == 0 or pts.ndim == 1):
        pts = pts.reshape(-1, 1)
    elif pts.ndim == 1 and pts.shape[0] == n:
        pts = pts.reshape(1, n)
    if pts.ndim != 2 or pts.shape[1] != n:
        raise ValueError(f"points must have shape (m, {n})")
    return pts


class ScalarField:
    """Base class; concrete fields implement _evaluate(pts)."""

    def __init__(self, n: int, support: Optional[tuple] = None):
        self.n = n
        if support is not None:
            lo = np.asarray(support[0], dtype=float).reshape(n)
            hi = np.asarray(support[1], dtype=float).reshape(n)
            support = (lo, hi)
        self.support = support
        self.cache_token = next(_TOKEN_COUNTER)

    def _evaluate(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, points) -> np.ndarray:
        pts = _as_points(points, self.n)
        return self._evaluate(pts)

    def at(self, *coords) -> complex:
        out = self(np.array(coords, dtype=float).reshape(1, self.n))
        val = complex(out[0])
        return val.real if val.imag == 0 else val

    def derivative(self, index: int) -> "ScalarField":
        """d/dx_index by 4th-order central differences (subclasses may override)."""
        return _FdDerivative(self, index)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        return _combine(self, other, lambda a, b: a + b)

    def __sub__(self, other):
        return _combine(self, other, lambda a, b: a - b)

    def __mul__(self, other):
        if np.isscalar(other):
            return ScaledField(self, other)
        return _combine(self, other, lambda a, b: a * b, intersect=True)

    __rmul__ = __mul__


class _FdDerivative(ScalarField):
    _STENCIL = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
    _OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])

    def __init__(self, base: ScalarField, index: int, h: float = 1e-4):
        super().__init__(base.n, base.support)
        self.base = base
        self.index = index
        self.h = h

    def _evaluate(self, pts):
        h = self.h
        acc = None
        for c, o in zip(self._STENCIL, self._OFFSETS):
            shifted = pts.copy()
            shifted[:, self.index] += o * h
            term = c * self.base._evaluate(shifted)
            acc = term if acc is None else acc + term
        return acc / h


class ExprField(ScalarField):
    """Field backed by a parsed expression AST; differentiates symbolically."""

    def __init__(self, node: _expr.Node, n: int, support: Optional[tuple] = None):
        super().__init__(n, support)
        self.node = node

    @classmethod
    def parse(cls, text: str, n: int, support: Optional[tuple] = None) -> "ExprField":
        return cls(_expr.parse(text, n), n, support)

    def _evaluate(self, pts):
        return _expr.evaluate(self.node, pts)

    def derivative(self, index: int) -> "ExprField":
        return ExprField(_expr.derivative(self.node, index), self.n, self.support)

    def __repr__(self):
        return f"ExprField({_expr.to_text(self.node)!r}, n={self.n})"


class CallableField(ScalarField):
    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], n: int,
                 support: Optional[tuple] = None,
                 derivatives: Optional[Sequence[Callable]] = None):
        super().__init__(n, support)
        self.fn = fn
        self._derivatives = derivatives

    def _evaluate(self, pts):
        arg = pts[:, 0] if self.n == 1 else pts
        out = np.asarray(self.fn(arg))
        if out.shape != (pts.shape[0],):
            out = np.broadcast_to(out, (pts.shape[0],)).copy()
        return out

    def derivative(self, index: int) -> ScalarField:
        if self._derivatives is not None:
            return CallableField(self._derivatives[index], self.n, self.support)
        return _FdDerivative(self, index)


class ConstantField(ScalarField):
    def __init__(self, value: complex, n: int, support: Optional[tuple] = None):
        super().__init__(n, support)
        self.value = value

    def _evaluate(self, pts):
        return np.full(pts.shape[0], self.value)

    def derivative(self, index: int):
        return ConstantField(0.0, self.n, self.support)


class IndicatorBoxField(ScalarField):
    """Characteristic function of a closed axis-aligned box."""

    def __init__(self, lo, hi, n: int):
        lo = np.asarray(lo, dtype=float).reshape(n)
        hi = np.asarray(hi, dtype=float).reshape(n)
        super().__init__(n, support=(lo, hi))
        self.lo, self.hi = lo, hi

    def _evaluate(self, pts):
        inside = np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        return inside.astype(float)

    def derivative(self, index: int):
        return ConstantField(0.0, self.n, self.support)


class GridSampleField(ScalarField):
    """Multilinear interpolation of node samples on a box; zero outside.

    values has one axis per dimension; node j along axis d sits at
    lo[d] + j * (hi[d]-lo[d]) / (shape[d]-1).
    """

    def __init__(self, values: np.ndarray, lo, hi):
        values = np.asarray(values)
        n = values.ndim
        lo = np.asarray(lo, dtype=float).reshape(n)
        hi = np.asarray(hi, dtype=float).reshape(n)
        super().__init__(n, support=(lo, hi))
        self.values = values
        self.lo, self.hi = lo, hi
        self.shape = np.array(values.shape)
        self.step = (hi - lo) / (self.shape - 1)

    def _evaluate(self, pts):
        inside = np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        out = np.zeros(pts.shape[0], dtype=self.values.dtype if np.iscomplexobj(self.values) else float)
        if not inside.any():
            return out
        p = pts[inside]
        rel = (p - self.lo) / self.step
        base = np.floor(rel).astype(int)
        base = np.minimum(base, self.shape - 2)
        base = np.maximum(base, 0)
        frac = rel - base
        acc = np.zeros(p.shape[0], dtype=out.dtype)
        for corner in itertools.product((0, 1), repeat=self.n):
            weight = np.ones(p.shape[0])
            idx = []
            for d, c in enumerate(corner):
                weight = weight * (frac[:, d] if c else (1.0 - frac[:, d]))
                idx.append(base[:, d] + c)
            acc = acc + weight * self.values[tuple(idx)]
        out[inside] = acc
        return out

    def derivative(self, index: int) -> ScalarField:
        return _FdDerivative(self, index, h=float(self.step[index]) / 4.0)


class ScaledField(ScalarField):
    def __init__(self, base: ScalarField, factor: complex):
        super().__init__(base.n, base.support)
        self.base = base
        self.factor = factor

    def _evaluate(self, pts):
        return self.factor * self.base._evaluate(pts)

    def derivative(self, index: int):
        return ScaledField(self.base.derivative(index), self.factor)


class _Combined(ScalarField):
    def __init__(self, a: ScalarField, b: ScalarField, op, support):
        super().__init__(a.n, support)
        self.a, self.b, self.op = a, b, op

    def _evaluate(self, pts):
        return self.op(self.a._evaluate(pts), self.b._evaluate(pts))


def _merge_support(a: Optional[tuple], b: Optional[tuple], intersect: bool):
    if a is None or b is None:
        if intersect:
            return a if b is None else b
        return None
    if intersect:
        lo = np.maximum(a[0], b[0])
        hi = np.minimum(a[1], b[1])
        return (lo, np.maximum(hi, lo))
    return (np.minimum(a[0], b[0]), np.maximum(a[1], b[1]))


def _combine(a: ScalarField, b, op, intersect: bool = False) -> ScalarField:
    if np.isscalar(b):
        b = ConstantField(b, a.n)
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    return _Combined(a, b, op, _merge_support(a.support, b.support, intersect))


class VectorField:
    """Tuple of scalar components over a common R^n."""

    def __init__(self, components: Sequence[ScalarField]):
        components = list(components)
        if not components:
            raise ValueError("need at least one component")
        n = components[0].n
        if any(c.n != n for c in components):
            raise ValueError("components must share dimension")
        self.components = components
        self.n = n
        self.cache_token = next(_TOKEN_COUNTER)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, j: int) -> ScalarField:
        return self.components[j]

    @property
    def support(self):
        boxes = [c.support for c in self.components]
        if any(b is None for b in boxes):
            return None
        lo = np.min([b[0] for b in boxes], axis=0)
        hi = np.max([b[1] for b in boxes], axis=0)
        return (lo, hi)


def field_from_expression(text: str, n: int, support: Optional[tuple] = None):
    """Parse text into a ScalarField or VectorField (comma-separated components)."""
    comps = _expr.parse_components(text, n)
    fields = [ExprField(node, n, support) for node in comps]
    if len(fields) == 1:
        return fields[0]
    return VectorField(fields)
