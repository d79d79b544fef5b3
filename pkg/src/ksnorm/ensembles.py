"""Seeded random field ensembles shared by the test suite and the CLI.

Streams are drawn from numpy's PCG64 generator; a fixed seed reproduces the
same fields bit-for-bit, which the deterministic suite report relies on.
"""

from __future__ import annotations

import math

import numpy as np

from .fields import CallableField, ScalarField, VectorField


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


class PiecewisePolyField(ScalarField):
    """Polynomial pieces on a uniform lattice over [lo, hi]^n, zero outside.

    1-d pieces are cubics; n-d fields are products of 1-d factors, which
    keeps Vitali variation and corner integrals cheap while exercising the
    same quadrature paths as general fields.
    """

    def __init__(self, factors):
        self._factors = factors  # per axis: (edges, coeffs[pieces, 4])
        n = len(factors)
        lo = np.array([f[0][0] for f in factors])
        hi = np.array([f[0][-1] for f in factors])
        super().__init__(n, support=(lo, hi))

    def _eval_axis(self, ax: int, x: np.ndarray) -> np.ndarray:
        edges, coeffs = self._factors[ax]
        out = np.zeros_like(x)
        inside = (x >= edges[0]) & (x <= edges[-1])
        if not inside.any():
            return out
        xi = x[inside]
        idx = np.clip(np.searchsorted(edges, xi, side="right") - 1, 0, len(edges) - 2)
        t = xi - edges[idx]
        c = coeffs[idx]
        out[inside] = ((c[:, 3] * t + c[:, 2]) * t + c[:, 1]) * t + c[:, 0]
        return out

    def _evaluate(self, pts):
        acc = np.ones(pts.shape[0])
        for ax in range(self.n):
            acc = acc * self._eval_axis(ax, pts[:, ax])
        return acc

    def sup_estimate(self, samples: int = 4001) -> float:
        vals = 1.0
        for ax in range(self.n):
            edges, _ = self._factors[ax]
            xs = np.linspace(edges[0], edges[-1], samples)
            vals = vals * np.abs(self._eval_axis(ax, xs)).max()
        return float(vals)


class GaussianBumpField(ScalarField):
    """Separable Gaussian bump with exact derivatives of every order.

    Each axis carries a polynomial factor P_j(t) times exp(-t^2 / 2 w^2);
    differentiation maps P -> P' - t P / w^2, so derivative() is closed under
    repeated application and stays exact.
    """

    def __init__(self, center, width: float, n: int, polys=None,
                 cutoff: float = 10.0):
        center = np.asarray(center, dtype=float).reshape(n)
        lo = center - cutoff * width
        hi = center + cutoff * width
        super().__init__(n, support=(lo, hi))
        self.center = center
        self.width = width
        self.cutoff = cutoff
        self.polys = [np.array([1.0])] * n if polys is None else list(polys)

    def _evaluate(self, pts):
        acc = np.ones(pts.shape[0])
        w2 = self.width**2
        for ax in range(self.n):
            t = pts[:, ax] - self.center[ax]
            acc = acc * np.polyval(self.polys[ax][::-1], t) * np.exp(-t * t / (2 * w2))
        return acc

    def derivative(self, index: int) -> "GaussianBumpField":
        w2 = self.width**2
        p = self.polys[index]
        dp = np.array([(k + 1) * p[k + 1] for k in range(len(p) - 1)]) \
            if len(p) > 1 else np.zeros(0)
        shifted = np.concatenate([[0.0], p]) / w2  # t * P / w^2
        size = max(len(dp), len(shifted))
        new = np.zeros(size)
        new[: len(dp)] += dp
        new[: len(shifted)] -= shifted
        polys = list(self.polys)
        polys[index] = new
        return GaussianBumpField(self.center, self.width, self.n, polys,
                                 self.cutoff)


def random_piecewise_poly(rng: np.random.Generator, n: int = 1,
                          pieces: int = 4, radius: float = 2.0,
                          nonnegative: bool = False) -> PiecewisePolyField:
    factors = []
    for _ in range(n):
        edges = np.linspace(-radius, radius, pieces + 1)
        coeffs = rng.uniform(-1.0, 1.0, size=(pieces, 4))
        if nonnegative:
            coeffs[:, 0] = np.abs(coeffs[:, 0]) + 1.1 * (
                np.abs(coeffs[:, 1]) + np.abs(coeffs[:, 2]) + np.abs(coeffs[:, 3])
            ) * (edges[1] - edges[0])
        factors.append((edges, coeffs))
    return PiecewisePolyField(factors)


def random_smooth_field(rng: np.random.Generator, n: int = 1,
                        bumps: int = 4, radius: float = 2.0,
                        zero_mean: bool = False) -> ScalarField:
    """Sum of Gaussian bumps with compact support box [-radius, radius]^n."""
    centers = rng.uniform(-0.6 * radius, 0.6 * radius, size=(bumps, n))
    widths = rng.uniform(0.08 * radius, 0.3 * radius, size=bumps)
    amps = rng.normal(0.0, 1.0, size=bumps)
    if zero_mean:
        masses = amps * (np.sqrt(2.0 * np.pi) * widths) ** n
        amps = amps - masses.sum() / ((np.sqrt(2.0 * np.pi) * widths) ** n).sum() * 1.0

    lo = np.full(n, -radius)
    hi = np.full(n, radius)

    def fn(pts):
        pts2 = np.atleast_2d(pts)
        acc = np.zeros(pts2.shape[0])
        for c, w, a in zip(centers, widths, amps):
            d2 = ((pts2 - c) ** 2).sum(axis=1)
            acc = acc + a * np.exp(-d2 / (2.0 * w * w))
        return acc

    return CallableField(fn, n, support=(lo, hi))


def random_step_field(rng: np.random.Generator, n: int = 1, steps: int = 6,
                      radius: float = 1.0, nonnegative: bool = False) -> ScalarField:
    """Axis-aligned random step function (product of 1-d steps)."""
    levels = []
    edges_all = []
    for _ in range(n):
        edges = np.sort(rng.uniform(-radius, radius, size=steps - 1))
        edges = np.concatenate([[-radius], edges, [radius]])
        vals = rng.uniform(0.0, 1.0, size=steps) if nonnegative else rng.uniform(-1.0, 1.0, size=steps)
        edges_all.append(edges)
        levels.append(vals)

    lo = np.full(n, -radius)
    hi = np.full(n, radius)

    def fn(pts):
        pts2 = np.atleast_2d(pts)
        acc = np.ones(pts2.shape[0])
        inside = np.ones(pts2.shape[0], dtype=bool)
        for ax in range(n):
            x = pts2[:, ax]
            ok = (x >= -radius) & (x <= radius)
            inside &= ok
            idx = np.clip(np.searchsorted(edges_all[ax], x, side="right") - 1, 0, steps - 1)
            acc = acc * levels[ax][idx]
        return np.where(inside, acc, 0.0)

    return CallableField(fn, n, support=(lo, hi))


class SineBumpProduct(ScalarField):
    """amp * prod_j sin^2(pi f_j t_j) on a box (t_j normalized), zero outside.

    Vanishes on the whole box boundary — the regime where the
    Alexiewicz-Vitali multiplier inequality is a theorem — and carries exact
    per-axis derivatives, one order per axis (all Vitali variation needs).
    """

    def __init__(self, box_lo, box_hi, freqs, amp: float, orders=None):
        n = len(freqs)
        box_lo = np.asarray(box_lo, dtype=float).reshape(n)
        box_hi = np.asarray(box_hi, dtype=float).reshape(n)
        super().__init__(n, support=(box_lo, box_hi))
        self.freqs = np.asarray(freqs, dtype=float)
        self.amp = float(amp)
        self.orders = tuple(orders) if orders is not None else (0,) * n

    def _evaluate(self, pts):
        lo, hi = self.support
        acc = np.full(pts.shape[0], self.amp)
        inside = np.ones(pts.shape[0], dtype=bool)
        for ax in range(self.n):
            span = hi[ax] - lo[ax]
            t = (pts[:, ax] - lo[ax]) / span
            inside &= (t >= 0) & (t <= 1)
            w = math.pi * self.freqs[ax]
            tc = np.clip(t, 0, 1)
            if self.orders[ax] == 0:
                acc = acc * np.sin(w * tc) ** 2
            else:
                acc = acc * (w / span) * np.sin(2 * w * tc)
        return np.where(inside, acc, 0.0)

    def derivative(self, index: int) -> "SineBumpProduct":
        if self.orders[index] != 0:
            raise NotImplementedError("one derivative per axis is supported")
        orders = list(self.orders)
        orders[index] = 1
        lo, hi = self.support
        return SineBumpProduct(lo, hi, self.freqs, self.amp, orders)


def smooth_multiplier(rng: np.random.Generator, n: int, box_lo, box_hi) -> ScalarField:
    """Random boundary-vanishing multiplier with exact mixed partials."""
    freqs = rng.integers(1, 4, size=n)
    amp = float(rng.uniform(0.5, 2.0))
    return SineBumpProduct(box_lo, box_hi, freqs, amp)


def random_grid_values(rng: np.random.Generator, N: int, n: int,
                       kind: str = "smooth", nonnegative: bool = False) -> np.ndarray:
    """Random sample array for oscillation-module grid fields."""
    shape = (N,) * n
    if kind == "step":
        blocks = rng.integers(3, 9)
        vals = rng.uniform(0.0 if nonnegative else -1.0, 1.0, size=(blocks,) * n)
        reps = int(np.ceil(N / blocks))
        out = np.kron(vals, np.ones((reps,) * n))[tuple(slice(0, N) for _ in range(n))]
        return out
    noise = rng.standard_normal(shape)
    spec = np.fft.fftn(noise)
    k = np.abs(np.fft.fftfreq(N, 1.0 / N))
    mask = np.ones(shape)
    for ax in range(n):
        shape_ax = [1] * n
        shape_ax[ax] = N
        mask = mask * np.exp(-((k.reshape(shape_ax) / (0.08 * N)) ** 2))
    smooth = np.real(np.fft.ifftn(spec * mask))
    smooth /= max(np.abs(smooth).max(), 1e-12)
    if nonnegative:
        smooth = smooth - smooth.min()
    return smooth


def random_vector_field(rng: np.random.Generator, n: int,
                        radius: float = 1.5) -> VectorField:
    return VectorField([random_smooth_field(rng, n, bumps=3, radius=radius)
                        for _ in range(n)])
