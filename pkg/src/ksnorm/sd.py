"""Jones functions and the SD^p construction.

Level k fixes a_k = pi 2^{k-1} and eps_k = 2^{-(k+1)}.  The compactly
supported complex exponential xi_k(x; c) = (1/n) e^{i(x-c)} on
[c - eps_k, c + eps_k] is used in closed form; the mollifier convolution
(jones_chi) is kept as a quadrature cross-check.  Test field number m has
components xi applied per coordinate on the product interval around the m-th
enumerated rational vector, and SD^p norms are the weighted p-sums of
F_m(f) = integral of E_m . f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import cubes
from .config import DEFAULT_K
from .errors import CapabilityError, DomainError
from .fields import ScalarField, VectorField
from .quadrature import box_integrate, panel_integrate
from .reports import NormReport


def level_params(k: int) -> tuple[float, float]:
    """(a_k, eps_k) = (pi 2^{k-1}, 2^{-(k+1)})."""
    if k < 1:
        raise DomainError("level must be >= 1")
    return math.pi * 2.0 ** (k - 1), 2.0 ** (-(k + 1))


def jones_g(x: float, y: float, a: float) -> complex:
    """g(x, y) = exp(-y^a e^{i a x}) for y >= 0."""
    if np.any(np.asarray(y) < 0):
        raise DomainError("y must be >= 0")
    return np.exp(-np.power(y, a) * np.exp(1j * a * np.asarray(x, dtype=float)))


def jones_h(x: float, a: float) -> complex:
    """h(x) = Gamma(1/a + 1) e^{-ix} on (-pi/2a, pi/2a), 0 outside."""
    xa = np.asarray(x, dtype=float)
    half = math.pi / (2.0 * a)
    out = np.where(np.abs(xa) < half,
                   math.gamma(1.0 / a + 1.0) * np.exp(-1j * xa), 0.0 + 0.0j)
    if out.ndim == 0:
        return complex(out)
    return out


@lru_cache(maxsize=1)
def _bump_mass() -> float:
    # integral of exp(1/(u^2-1)) over (-1, 1); scales to every mollifier level
    res = panel_integrate(lambda u: np.exp(1.0 / (u * u - 1.0)), -1.0, 1.0, tol=1e-13)
    return float(np.real(res.value))


def mollifier_constant(k: int) -> float:
    """c_k with integral of the level-k mollifier equal to 1."""
    _, eps = level_params(k)
    return 1.0 / (eps * _bump_mass())


def jones_mollifier(x: float, k: int, center: float = 0.0):
    """f_k^i(x) = c_k exp(eps^2 / (|x-center|^2 - eps^2)) inside, 0 outside."""
    _, eps = level_params(k)
    xa = np.asarray(x, dtype=float)
    d2 = (xa - center) ** 2
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        raw = np.exp(eps * eps / (d2 - eps * eps))
    out = np.where(d2 < eps * eps, mollifier_constant(k) * raw, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


@lru_cache(maxsize=None)
def jones_alpha(k: int) -> complex:
    """alpha_k = chi at its center: Gamma(1/a_k + 1) * int e^{it} f_k(t) dt."""
    a, eps = level_params(k)
    res = panel_integrate(lambda t: np.exp(1j * t) * jones_mollifier(t, k), -eps, eps,
                          tol=1e-13)
    return math.gamma(1.0 / a + 1.0) * complex(res.value)


def jones_chi(x: float, k: int, center: float = 0.0, tol: float = 1e-10) -> complex:
    """Convolution (f_k * h_k)(x), truncated to the closed-form support I_k.

    Inside I_k the mollifier window sits wholly inside the support of h_k, so
    the quadrature must reproduce e^{-i(x-center)} alpha_k.
    """
    _, eps = level_params(k)
    if abs(x - center) >= eps:
        return 0.0
    lo, hi = x - center - eps, x - center + eps

    def integrand(z):
        return jones_mollifier(x - z, k, center) * jones_h(z, level_params(k)[0])

    res = panel_integrate(integrand, lo, hi, tol=tol)
    return complex(res.value)


def jones_xi(x, k: int, center: float = 0.0, n: int = 1):
    """xi_k(x; center) = (1/n) e^{i(x-center)} on [center-eps, center+eps], else 0."""
    if n < 1:
        raise DomainError("n must be >= 1")
    _, eps = level_params(k)
    xa = np.asarray(x, dtype=float)
    inside = np.abs(xa - center) <= eps
    out = np.where(inside, np.exp(1j * (xa - center)) / n, 0.0 + 0.0j)
    if out.ndim == 0:
        return complex(out)
    return out


@dataclass(frozen=True)
class TestField:
    """E_m: components xi_k(x_j; c_j) supported on the product interval."""

    m: int
    n: int
    level: int
    center_index: int
    center: tuple
    eps: float

    @property
    def lo(self) -> np.ndarray:
        return np.array([float(c) for c in self.center]) - self.eps

    @property
    def hi(self) -> np.ndarray:
        return np.array([float(c) for c in self.center]) + self.eps

    def component(self, j: int, pts: np.ndarray) -> np.ndarray:
        inside = np.all((pts >= self.lo - 1e-300) & (pts <= self.hi + 1e-300), axis=1)
        vals = np.exp(1j * (pts[:, j] - float(self.center[j]))) / self.n
        return np.where(inside, vals, 0.0 + 0.0j)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        """All components, shape (m, n)."""
        return np.stack([self.component(j, pts) for j in range(self.n)], axis=1)


def test_field(m: int, n: int) -> TestField:
    k, i = cubes.index_to_pair(m)
    center = cubes.enum_rational_vector(i, n)
    _, eps = level_params(k)
    return TestField(m=m, n=n, level=k, center_index=i, center=center, eps=eps)


def boundary_free_box(K: int, n: int, lo, hi) -> tuple[np.ndarray, np.ndarray]:
    """A sub-box of [lo, hi] whose projections avoid every support boundary
    of the test fields m <= K.

    A field supported in this box is, for each m <= K, either strictly inside
    the support product of E_m or disjoint from it, so integration by parts
    against E_m has no boundary terms.
    """
    lo = np.asarray(lo, dtype=float).reshape(n)
    hi = np.asarray(hi, dtype=float).reshape(n)
    out_lo = np.empty(n)
    out_hi = np.empty(n)
    for axis in range(n):
        cuts = {lo[axis], hi[axis]}
        for m in range(1, K + 1):
            em = test_field(m, n)
            c = float(em.center[axis])
            for edge in (c - em.eps, c + em.eps):
                if lo[axis] < edge < hi[axis]:
                    cuts.add(edge)
        xs = sorted(cuts)
        widths = [b - a for a, b in zip(xs[:-1], xs[1:])]
        j = int(np.argmax(widths))
        a, b = xs[j], xs[j + 1]
        pad = 0.05 * (b - a)
        out_lo[axis], out_hi[axis] = a + pad, b - pad
    return out_lo, out_hi


def e_m_variation(m: int, n: int) -> float:
    """Hardy-Krause-style variation bound for E_m, jumps at the support included.

    Each component is a product of one truncated exponential (1-d variation
    (2 eps + 2)/n) and n-1 interval indicators (variation 2 each); summing the
    n components gives (2 eps_k + 2) 2^{n-1}.
    """
    k, _ = cubes.index_to_pair(m)
    _, eps = level_params(k)
    return (2.0 * eps + 2.0) * 2.0 ** (n - 1)


_SD_CACHE: dict = {}


def sd_functional(m: int, f: VectorField, tol: float = 1e-10) -> complex:
    """F_m(f) = integral over the support box of E_m . f."""
    if not isinstance(f, VectorField):
        raise DomainError("sd_functional needs a VectorField")
    key = (m, f.n, f.cache_token, tol)
    if key in _SD_CACHE:
        return _SD_CACHE[key]
    em = test_field(m, f.n)
    lo, hi = em.lo, em.hi
    if f.support is not None:
        lo = np.maximum(lo, f.support[0])
        hi = np.minimum(hi, f.support[1])
        if np.any(hi <= lo):
            _SD_CACHE[key] = 0.0
            return 0.0

    centers = np.array([float(c) for c in em.center])

    def integrand(pts):
        acc = None
        for j in range(f.n):
            xi = np.exp(1j * (pts[:, j] - centers[j])) / f.n
            term = xi * f[j](pts)
            acc = term if acc is None else acc + term
        return acc

    res = box_integrate(integrand, lo, hi, tol=tol)
    value = complex(res.value)
    _SD_CACHE[key] = value
    return value


def sd_functionals(f: VectorField, K: int = DEFAULT_K, tol: float = 1e-10) -> np.ndarray:
    return np.array([sd_functional(m, f, tol) for m in range(1, K + 1)], dtype=complex)


def sd_norm(f: VectorField, p: float = 2.0, K: int = DEFAULT_K,
            tol: float = 1e-10, per_term_bound: float = math.inf) -> NormReport:
    """Truncated SD^p norm {sum t_m |F_m(f)|^p}^{1/p} (sup for p = inf)."""
    if not p >= 1:
        raise DomainError("p must be in [1, inf]")
    vals = np.abs(sd_functionals(f, K, tol))
    if math.isinf(p):
        value = float(vals.max()) if K else 0.0
        tail = per_term_bound
        heuristic = True
    else:
        weights = np.array([cubes.weight(m) for m in range(1, K + 1)])
        value = float((weights @ vals**p) ** (1.0 / p))
        tb = cubes.tail_bound(K, p, per_term_bound) if math.isfinite(per_term_bound) else None
        tail = tb.value if tb is not None else math.inf
        heuristic = not math.isfinite(tail)
    return NormReport(value=value, p=p, K=K, tail_bound=float(tail),
                      tail_is_heuristic=heuristic)


def sd_inner(f: VectorField, g: VectorField, K: int = DEFAULT_K,
             tol: float = 1e-10) -> complex:
    fv = sd_functionals(f, K, tol)
    gv = sd_functionals(g, K, tol)
    weights = np.array([cubes.weight(m) for m in range(1, K + 1)])
    return complex(np.sum(weights * fv * np.conj(gv)))


def _differentiate(f: VectorField, alpha: Sequence[int]) -> VectorField:
    comps = []
    for comp in f.components:
        g = comp
        for axis, order in enumerate(alpha):
            for _ in range(order):
                g = g.derivative(axis)
        comps.append(g)
    return VectorField(comps)


def dalpha_check(f: VectorField, g: VectorField, alpha: Sequence[int],
                 K: int = DEFAULT_K, tol: float = 1e-10) -> tuple[complex, complex, float]:
    """Compare (D^alpha f, g)_SD against (-i)^{|alpha|} (f, g)_SD.

    Returns (lhs, rhs, residual).  The identity is exact only for fields
    supported strictly inside the test-field interiors with the derivative
    axis matching the nonzero component; callers assert accordingly.
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != f.n or any(a < 0 for a in alpha):
        raise DomainError("alpha must be a multi-index over the field dimension")
    try:
        df = _differentiate(f, alpha)
    except CapabilityError:
        raise
    lhs = sd_inner(df, g, K, tol)
    rhs = (-1j) ** sum(alpha) * sd_inner(f, g, K, tol)
    return lhs, rhs, abs(lhs - rhs)
