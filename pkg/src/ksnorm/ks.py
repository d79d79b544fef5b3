"""KS^p norms and inner products over the enumerated cube family.

The norm of f truncated at level K is {sum_{k<=K} t_k |F_k(f)|^p}^{1/p}
(sup over k <= K when p = inf), where F_k(f) integrates f over cube B_k.
Measures contribute atom weights plus a density integral per cube.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import cubes
from .config import DEFAULT_K
from .errors import DomainError
from .fields import ScalarField
from .quadrature import panel_integrate
from .reports import NormReport

_L1_CACHE: dict = {}


@dataclass
class AtomicMeasure:
    """Finitely many weighted point masses plus an optional density field."""

    atoms: list  # of (location array-like, complex weight)
    density: Optional[ScalarField] = None
    n: int = 1

    def __post_init__(self):
        self.atoms = [(np.asarray(loc, dtype=float).reshape(self.n), complex(w))
                      for loc, w in self.atoms]
        if self.density is not None and self.density.n != self.n:
            raise DomainError("density dimension mismatch")

    def total_variation_bound(self, tol: float = 1e-9) -> float:
        total = sum(abs(w) for _, w in self.atoms)
        if self.density is not None:
            total += _l1_norm(self.density, tol)
        return float(total)


FieldLike = Union[ScalarField, AtomicMeasure]


def _l1_norm(f: ScalarField, tol: float = 1e-8) -> float:
    """integral of |f| over its support box (requires compact support)."""
    key = (f.cache_token, tol)
    if key in _L1_CACHE:
        return _L1_CACHE[key]
    if f.support is None:
        raise DomainError("L1 bound needs a support box")
    from .quadrature import box_integrate

    res = box_integrate(lambda p: np.abs(f(p)), f.support[0], f.support[1], tol=tol)
    out = float(np.real(res.value))
    _L1_CACHE[key] = out
    return out


def functional(k: int, f: FieldLike, tol: float = 1e-10) -> complex:
    """F_k applied to a field or measure."""
    if isinstance(f, AtomicMeasure):
        cube = cubes.cube_at(k, f.n)
        total = 0.0 + 0.0j
        for loc, w in f.atoms:
            if cube.contains(loc):
                total += w
        if f.density is not None:
            total += cubes.indicator_functional(k, f.density, tol)
        return complex(total)
    return cubes.indicator_functional(k, f, tol)


def cube_functionals(f: FieldLike, K: int = DEFAULT_K, tol: float = 1e-10) -> np.ndarray:
    return np.array([functional(k, f, tol) for k in range(1, K + 1)], dtype=complex)


def _per_term_bound(f: FieldLike, n: int, tol: float,
                    sup_bound: Optional[float], l1_bound: Optional[float]) -> float:
    candidates = []
    if l1_bound is not None:
        candidates.append(float(l1_bound))
    if sup_bound is not None:
        vol_max = (0.5 / math.sqrt(n)) ** n
        candidates.append(float(sup_bound) * vol_max)
    if not candidates:
        try:
            if isinstance(f, AtomicMeasure):
                candidates.append(f.total_variation_bound(tol))
            else:
                candidates.append(_l1_norm(f, max(tol, 1e-8)))
        except DomainError:
            return math.inf
    return min(candidates)


def ks_norm(
    f: FieldLike,
    p: float = 2.0,
    K: int = DEFAULT_K,
    tol: float = 1e-10,
    sup_bound: Optional[float] = None,
    l1_bound: Optional[float] = None,
) -> NormReport:
    """Truncated KS^p norm with a rigorous tail bound attached.

    sup_bound (an L-infinity bound on f) or l1_bound sharpen the per-term
    bound sup_{k>K} |F_k(f)| used for the tail; with neither, a compactly
    supported field's L1 norm is computed, otherwise the tail is infinite.
    """
    if not p >= 1:
        raise DomainError("p must be in [1, inf]")
    n = f.n
    vals = np.abs(cube_functionals(f, K, tol))
    per_term = _per_term_bound(f, n, tol, sup_bound, l1_bound)
    tb = cubes.tail_bound(K, p, per_term) if math.isfinite(per_term) else None
    extras = {}
    if math.isinf(p):
        value = float(vals.max()) if K else 0.0
        tail = per_term
        heuristic = True
        if sup_bound is not None:
            vol_max = (0.5 / math.sqrt(n)) ** n
            extras["upper_bound"] = max(value, vol_max * float(sup_bound))
    else:
        weights = np.array([cubes.weight(k) for k in range(1, K + 1)])
        value = float((weights @ vals**p) ** (1.0 / p))
        tail = tb.value if tb is not None else math.inf
        heuristic = False
    return NormReport(value=value, p=p, K=K, tail_bound=float(tail),
                      tail_is_heuristic=heuristic or not math.isfinite(tail),
                      extras=extras)


def ks_inner(f: FieldLike, g: FieldLike, K: int = DEFAULT_K, tol: float = 1e-10) -> complex:
    """<f, g> = sum_{k<=K} t_k F_k(f) conj(F_k(g))."""
    fv = cube_functionals(f, K, tol)
    gv = cube_functionals(g, K, tol)
    weights = np.array([cubes.weight(k) for k in range(1, K + 1)])
    out = complex(np.sum(weights * fv * np.conj(gv)))
    return out


def duality_map(g: FieldLike, f: FieldLike, p: float, K: int = DEFAULT_K,
                tol: float = 1e-10) -> complex:
    """L_g(f) = ||g||^{2-p} sum t_k |F_k(g)|^{p-2} F_k(g) conj(F_k(f)).

    Terms with F_k(g) = 0 contribute 0; normalized so L_g(g) = ||g||^2.
    """
    if not (1 < p < math.inf):
        raise DomainError("duality map needs 1 < p < inf")
    gv = cube_functionals(g, K, tol)
    fv = cube_functionals(f, K, tol)
    weights = np.array([cubes.weight(k) for k in range(1, K + 1)])
    mags = np.abs(gv)
    norm_g = float((weights @ mags**p) ** (1.0 / p))
    if norm_g == 0.0:
        raise DomainError("duality map undefined for ||g|| = 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        factors = np.where(mags > 0, mags ** (p - 2.0), 0.0)
    total = complex(np.sum(weights * factors * gv * np.conj(fv)))
    return norm_g ** (2.0 - p) * total


def delta_approx_error(lam: float, K: int = DEFAULT_K, tol: float = 1e-9) -> float:
    """||s_lam - delta_0||_{KS^2, K} for s_lam(x) = sin(lam x) / (pi x).

    The scale lam/pi normalizes sin(lam x)/(lam x) to unit mass, so the cube
    functionals converge to the delta functionals as lam grows.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    total = 0.0
    for k in range(1, K + 1):
        cube = cubes.cube_at(k, 1)
        lo, hi = float(cube.lo[0]), float(cube.hi[0])
        res = panel_integrate(lambda x: np.sin(lam * x) / (np.pi * x), lo, hi,
                              tol=tol, max_panels=1 << 18)
        target = 1.0 if cube.contains([0.0]) else 0.0
        total += cubes.weight(k) * abs(res.value - target) ** 2
    return math.sqrt(total)


def mixed_convergence_check(
    sequence: Sequence[FieldLike],
    f: FieldLike,
    K: int = DEFAULT_K,
    tol: float = 1e-10,
    target: float = 0.0,
) -> dict:
    """Table of ||f_j - f||_{KS^inf, K} with monotonicity / smallness flags."""
    norms = []
    for fj in sequence:
        diff = fj - f if isinstance(fj, ScalarField) and isinstance(f, ScalarField) else fj
        vals = np.abs(cube_functionals(diff, K, tol))
        norms.append(float(vals.max()))
    norms_arr = np.array(norms)
    mono = bool(np.all(np.diff(norms_arr) <= 1e-12 + 1e-9 * norms_arr[:-1]))
    return {
        "norms": norms,
        "monotone_nonincreasing": mono,
        "final": norms[-1] if norms else 0.0,
        "below_target": bool(norms and norms[-1] <= target) if target else None,
        "K": K,
    }
