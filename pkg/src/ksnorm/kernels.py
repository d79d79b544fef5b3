"""Feynman and heat propagators: KS norms, compositions, Poisson path sums.

Complex amplitudes use the principal branch, (2 pi i tau)^{-n/2} =
(2 pi tau)^{-n/2} e^{-i pi n / 4}.  Compositions run through exact
(complex-)Gaussian algebra; oscillatory quadrature is kept as a flagged
secondary check for the Feynman kernel.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT_K
from .errors import DomainError
from .fields import CallableField, ConstantField, GridSampleField, ScalarField
from .ks import ks_norm
from .quadrature import panel_integrate
from .reports import NormReport


@dataclass(frozen=True)
class KernelSpec:
    kind: str  # "feynman" or "heat"
    n: int
    t: float
    s: float = 0.0

    def __post_init__(self):
        if self.kind not in ("feynman", "heat"):
            raise DomainError("kind must be 'feynman' or 'heat'")
        if not self.t > self.s:
            raise DomainError("need t > s")
        if self.n < 1:
            raise DomainError("n must be >= 1")

    @property
    def tau(self) -> float:
        return self.t - self.s


def _sqdist(x, y, n: int):
    xa = np.asarray(x, dtype=float).reshape(-1, n)
    ya = np.asarray(y, dtype=float).reshape(-1, n)
    return ((xa - ya) ** 2).sum(axis=1)


def feynman_kernel(t: float, x, s: float, y, n: int = 1):
    """(2 pi i (t-s))^{-n/2} exp(i |x-y|^2 / 2(t-s)), principal branch."""
    if not t > s:
        raise DomainError("need t > s")
    tau = t - s
    amp = (2.0 * math.pi * tau) ** (-n / 2.0) * cmath.exp(-1j * math.pi * n / 4.0)
    out = amp * np.exp(1j * _sqdist(x, y, n) / (2.0 * tau))
    return complex(out[0]) if out.size == 1 else out


def heat_kernel(t: float, x, s: float, y, n: int = 1):
    """(2 pi (t-s))^{-n/2} exp(-|x-y|^2 / 2(t-s))."""
    if not t > s:
        raise DomainError("need t > s")
    tau = t - s
    amp = (2.0 * math.pi * tau) ** (-n / 2.0)
    out = amp * np.exp(-_sqdist(x, y, n) / (2.0 * tau))
    return float(out[0]) if out.size == 1 else out


def kernel_field(spec: KernelSpec, x, region: Optional[tuple] = None) -> ScalarField:
    """y -> K(t, x; s, y) 1_B(y) as a ScalarField for norm computations."""
    xa = np.asarray(x, dtype=float).reshape(spec.n)
    tau = spec.tau
    if spec.kind == "heat":
        amp = (2.0 * math.pi * tau) ** (-spec.n / 2.0)

        def fn(pts):
            pts2 = pts.reshape(-1, spec.n)
            return amp * np.exp(-((pts2 - xa) ** 2).sum(axis=1) / (2.0 * tau))
    else:
        amp = (2.0 * math.pi * tau) ** (-spec.n / 2.0) * cmath.exp(-1j * math.pi * spec.n / 4.0)

        def fn(pts):
            pts2 = pts.reshape(-1, spec.n)
            return amp * np.exp(1j * ((pts2 - xa) ** 2).sum(axis=1) / (2.0 * tau))

    support = None
    if region is not None:
        support = (np.asarray(region[0], dtype=float).reshape(spec.n),
                   np.asarray(region[1], dtype=float).reshape(spec.n))
    field = CallableField(lambda p: fn(np.atleast_2d(p)), spec.n, support=support)
    if region is not None:
        lo, hi = support

        def clipped(p):
            p2 = np.atleast_2d(p)
            inside = np.all((p2 >= lo) & (p2 <= hi), axis=1)
            return np.where(inside, fn(p2), 0.0)

        field = CallableField(clipped, spec.n, support=support)
    return field


def kernel_ks_norm(spec: KernelSpec, x, region: Optional[tuple] = None,
                   p: float = math.inf, K: int = DEFAULT_K,
                   tol: float = 1e-9) -> NormReport:
    """KS^p norm of the kernel as a set function restricted to a region."""
    field = kernel_field(spec, x, region)
    sup = (2.0 * math.pi * spec.tau) ** (-spec.n / 2.0)
    return ks_norm(field, p=p, K=K, tol=tol, sup_bound=sup)


# ---------------------------------------------------------------------------
# Gaussian algebra

@dataclass(frozen=True)
class GaussState:
    """Per-axis complex Gaussian A e^{q (x - y)^2}; n-dim value is the product."""

    amp: complex  # per-axis amplitude
    q: complex

    def value(self, x, y, n: int) -> complex:
        xa = np.asarray(x, dtype=float).reshape(n)
        ya = np.asarray(y, dtype=float).reshape(n)
        out = 1.0 + 0.0j
        for j in range(n):
            out *= self.amp * cmath.exp(self.q * (xa[j] - ya[j]) ** 2)
        return out


def kernel_state(spec: KernelSpec, tau: Optional[float] = None) -> GaussState:
    tau = spec.tau if tau is None else tau
    if spec.kind == "heat":
        return GaussState((2.0 * math.pi * tau) ** -0.5, -1.0 / (2.0 * tau))
    amp = (2.0 * math.pi * tau) ** -0.5 * cmath.exp(-1j * math.pi / 4.0)
    return GaussState(amp, 1j / (2.0 * tau))


def compose_states(a: GaussState, b: GaussState) -> GaussState:
    """Exact integral over the shared endpoint of two Gaussian factors."""
    qsum = a.q + b.q
    if qsum == 0:
        raise DomainError("degenerate composition")
    amp = a.amp * b.amp * cmath.sqrt(-math.pi / qsum)
    return GaussState(amp, a.q * b.q / qsum)


def compose_kernels(spec: KernelSpec, tau_mid: float, x, y,
                    tol: float = 1e-10, method: str = "auto") -> complex:
    """Chapman-Kolmogorov composition int K(t,x;tau,z) K(tau,z;s,y) dz.

    method "algebra" is exact complex-Gaussian composition; "quadrature"
    integrates numerically (heat: over the real line; Feynman: on a damped
    truncated window, approximate).  "auto" picks quadrature for heat and
    algebra for Feynman, per their conditioning.
    """
    if not (spec.s < tau_mid < spec.t):
        raise DomainError("intermediate time must satisfy s < tau < t")
    if method == "auto":
        method = "quadrature" if spec.kind == "heat" else "algebra"
    first = kernel_state(spec, spec.t - tau_mid)
    second = kernel_state(spec, tau_mid - spec.s)
    if method == "algebra":
        return compose_states(first, second).value(x, y, spec.n)
    return _compose_quadrature(spec, tau_mid, x, y, tol)


def _compose_quadrature(spec: KernelSpec, tau_mid: float, x, y, tol: float,
                        r_osc: float = 30.0) -> complex:
    xa = np.asarray(x, dtype=float).reshape(spec.n)
    ya = np.asarray(y, dtype=float).reshape(spec.n)
    t1 = spec.t - tau_mid
    t2 = tau_mid - spec.s
    out = 1.0 + 0.0j
    for j in range(spec.n):
        if spec.kind == "heat":
            a1 = (2 * math.pi * t1) ** -0.5
            a2 = (2 * math.pi * t2) ** -0.5
            width = 10.0 * math.sqrt(max(t1, t2))
            lo = min(xa[j], ya[j]) - width
            hi = max(xa[j], ya[j]) + width

            def integrand(z, j=j):
                return (a1 * np.exp(-((xa[j] - z) ** 2) / (2 * t1))
                        * a2 * np.exp(-((z - ya[j]) ** 2) / (2 * t2)))

            res = panel_integrate(integrand, lo, hi, tol=tol)
        else:
            s1 = kernel_state(spec, t1)
            s2 = kernel_state(spec, t2)
            lo, hi = -r_osc, r_osc
            taper = 0.2 * r_osc

            def integrand(z, j=j, s1=s1, s2=s2):
                w = np.ones_like(z)
                edge = np.abs(z) - (r_osc - taper)
                mask = edge > 0
                w[mask] = np.cos(0.5 * math.pi * np.minimum(edge[mask] / taper, 1.0)) ** 2
                return (w * s1.amp * np.exp(s1.q * (xa[j] - z) ** 2)
                        * s2.amp * np.exp(s2.q * (z - ya[j]) ** 2))

            res = panel_integrate(integrand, lo, hi, tol=tol, max_panels=1 << 18)
        out *= res.value
    return complex(out)


def time_sliced_propagator(spec: KernelSpec, N: int, x, y) -> complex:
    """N-fold composition of uniform time slices; semigroup-exact in N."""
    if N < 1:
        raise DomainError("need at least one slice")
    step = spec.tau / N
    state = kernel_state(spec, step)
    acc = state
    for _ in range(N - 1):
        acc = compose_states(acc, state)
    return acc.value(x, y, spec.n)


def poisson_weight(lam: float, t: float) -> float:
    """e^{-lam t} sum_{k <= floor(lam t)} (lam t)^k / k!, overflow-safe."""
    if lam <= 0 or t <= 0:
        raise DomainError("lambda and t must be positive")
    lt = lam * t
    kmax = math.floor(lt)
    terms = [k * math.log(lt) - math.lgamma(k + 1.0) - lt for k in range(kmax + 1)]
    m = max(terms)
    return math.exp(m) * sum(math.exp(v - m) for v in terms)


def apply_kernel(spec: KernelSpec, psi: ScalarField, x, tol: float = 1e-9) -> complex:
    """(K_t psi)(x) = int K(t, x; s, y) psi(y) dy."""
    xa = np.asarray(x, dtype=float).reshape(spec.n)
    if isinstance(psi, ConstantField):
        return complex(psi.value)  # both kernels integrate to 1 over R^n
    if psi.support is None:
        raise DomainError("apply_kernel needs a compactly supported or constant psi")
    state = kernel_state(spec)
    out = None
    if spec.n == 1:
        lo, hi = float(psi.support[0][0]), float(psi.support[1][0])
        if spec.kind == "heat":
            lo = min(lo, xa[0] - 10 * math.sqrt(spec.tau))
            hi = max(hi, xa[0] + 10 * math.sqrt(spec.tau))

        def integrand(yv):
            return state.amp ** spec.n * np.exp(state.q * (xa[0] - yv) ** 2) * psi(yv)

        res = panel_integrate(integrand, lo, hi, tol=tol, max_panels=1 << 18)
        out = res.value
    else:
        from .quadrature import box_integrate

        def integrand(pts):
            phase = np.exp(state.q * ((pts - xa) ** 2).sum(axis=1))
            return state.amp ** spec.n * phase * psi(pts)

        res = box_integrate(integrand, psi.support[0], psi.support[1], tol=tol)
        out = res.value
    return complex(out)


def poisson_path_sum(spec: KernelSpec, lam: float, x, psi: ScalarField,
                     tol: float = 1e-9) -> dict:
    """Poisson-weighted path sum over k-slice compositions up to floor(lam t).

    Each k-slice composition collapses to the single-step propagator by the
    semigroup law (checked separately by time_sliced_propagator), so the sum
    is poisson_weight * (K_t psi)(x).  Weight and value are reported
    separately; no normalization of the weight is endorsed.
    """
    t = spec.tau
    weight = poisson_weight(lam, t)
    evolved = apply_kernel(spec, psi, x, tol=tol)
    return {"value": weight * evolved, "poisson_weight": weight,
            "slices": math.floor(lam * t), "evolved": evolved}


def convolution_extension_check(f: ScalarField, g: ScalarField,
                                K: int = DEFAULT_K, grid_n: int = 4097,
                                tol: float = 1e-8) -> dict:
    """Empirical boundedness of convolution on KS^2: reports
    ||f * g||_{KS^2} / (||f||_{L^1} ||g||_{KS^2}) for one pair."""
    if f.n != 1 or g.n != 1:
        raise DomainError("convolution check is one-dimensional")
    if f.support is None or g.support is None:
        raise DomainError("both fields need compact support")
    lo = float(f.support[0][0] + g.support[0][0])
    hi = float(f.support[1][0] + g.support[1][0])
    a = min(float(f.support[0][0]), float(g.support[0][0]), lo)
    b = max(float(f.support[1][0]), float(g.support[1][0]), hi)
    xs = np.linspace(a, b, grid_n)
    h = xs[1] - xs[0]
    fv = f(xs)
    gv = g(xs)
    # full convolution entry k sits at coordinate 2a + k h; resample to xs
    full = np.convolve(fv, gv, mode="full") * h
    shift = -a / h
    if abs(shift - round(shift)) > 1e-6:
        raise DomainError("support box must align the convolution grid (integer a/h)")
    shift = int(round(shift))
    conv = full[shift : shift + grid_n]
    conv_field = GridSampleField(conv, [a], [b])
    l1_f = float(np.trapezoid(np.abs(fv), xs))
    norm_g = ks_norm(g, p=2, K=K, tol=tol).value
    norm_conv = ks_norm(conv_field, p=2, K=K, tol=tol).value
    ratio = norm_conv / (l1_f * norm_g) if l1_f * norm_g > 0 else 0.0
    return {"norm_conv": norm_conv, "l1_f": l1_f, "norm_g": norm_g,
            "ratio": ratio}
