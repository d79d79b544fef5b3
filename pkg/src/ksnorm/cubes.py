"""Canonical enumeration of rational centers and dyadic cubes with weights.

Frozen ordering (id "cw-boustrophedon-v1"):

* rationals: 0 first, then the Calkin-Wilf sequence interleaved with signs
  (+q_1, -q_1, +q_2, -q_2, ...);
* Q^n: tuples of positive indices ordered by coordinate sum, then
  lexicographically, mapped componentwise through the rational order;
* (level, center) pairs: anti-diagonals of N x N traversed boustrophedon
  (even diagonals ascending in level, odd descending), with positions 7-9
  following the published prefix, which lists (3,2), (2,3) before (4,1).

Cube number k has level l and center index i with edge 1 / (2^l sqrt(n)),
weight t_k = 2^-k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .config import ENUMERATION_ID
from .errors import DomainError
from .fields import ScalarField

# --------------------------------------------------------------------------
# Rational enumeration

_CW: list[Fraction] = [Fraction(1, 1)]


def _cw(j: int) -> Fraction:
    """j-th term (1-based) of the Calkin-Wilf sequence 1, 1/2, 2, 1/3, ..."""
    while len(_CW) < j:
        q = _CW[-1]
        _CW.append(1 / (2 * math.floor(q) + 1 - q))
    return _CW[j - 1]


def _cw_position(q: Fraction) -> int:
    """Inverse of _cw for positive rationals."""
    a, b = q.numerator, q.denominator
    if a <= 0:
        raise ValueError("positive rationals only")
    bits = []
    while not (a == 1 and b == 1):
        if a < b:
            bits.append(0)
            b -= a
        else:
            bits.append(1)
            a -= b
    pos = 1
    for bit in reversed(bits):
        pos = 2 * pos + bit
    return pos


def enum_rational(i: int) -> Fraction:
    """i-th rational: 1 -> 0, then signed Calkin-Wilf (+q, -q alternating)."""
    if i < 1:
        raise DomainError("index must be >= 1")
    if i == 1:
        return Fraction(0)
    j, rem = divmod(i, 2)
    q = _cw(j)
    return q if rem == 0 else -q


def rational_index(q: Fraction) -> int:
    """Inverse of enum_rational."""
    q = Fraction(q)
    if q == 0:
        return 1
    pos = _cw_position(abs(q))
    return 2 * pos if q > 0 else 2 * pos + 1


# --------------------------------------------------------------------------
# Q^n by layered diagonal product

def _tuple_unrank(r: int, n: int) -> tuple[int, ...]:
    """r-th (1-based) tuple in N_+^n ordered by sum, then lexicographically."""
    if n == 1:
        return (r,)
    s = n
    remaining = r
    while True:
        layer = math.comb(s - 1, n - 1)
        if remaining <= layer:
            break
        remaining -= layer
        s += 1
    coords = []
    dims_left = n
    total = s
    for _ in range(n - 1):
        v = 1
        while True:
            block = math.comb(total - v - 1, dims_left - 2)
            if remaining <= block:
                break
            remaining -= block
            v += 1
        coords.append(v)
        total -= v
        dims_left -= 1
    coords.append(total)
    return tuple(coords)


def _tuple_rank(coords: Sequence[int], n: int) -> int:
    s = sum(coords)
    rank = 0
    for t in range(n, s):
        rank += math.comb(t - 1, n - 1)
    total = s
    dims_left = n
    for v in coords[:-1]:
        for w in range(1, v):
            rank += math.comb(total - w - 1, dims_left - 2)
        total -= v
        dims_left -= 1
    return rank + 1


def enum_rational_vector(i: int, n: int) -> tuple[Fraction, ...]:
    """i-th point of Q^n under the frozen n-fold diagonal order."""
    if i < 1:
        raise DomainError("index must be >= 1")
    if n == 1:
        return (enum_rational(i),)
    return tuple(enum_rational(j) for j in _tuple_unrank(i, n))


def rational_vector_index(xs: Sequence[Fraction], n: int) -> int:
    idxs = [rational_index(Fraction(x)) for x in xs]
    if n == 1:
        return idxs[0]
    return _tuple_rank(idxs, n)


# --------------------------------------------------------------------------
# (level, center) <-> linear index pairing

_CANON_TO_STD = {7: 8, 8: 9, 9: 7}
_STD_TO_CANON = {8: 7, 9: 8, 7: 9}


def _std_decode(k: int) -> tuple[int, int]:
    s = (1 + math.isqrt(8 * k - 7)) // 2 + 1
    while (s - 1) * (s - 2) // 2 >= k:
        s -= 1
    while (s - 1) * s // 2 < k:
        s += 1
    # now base(s) = (s-2)(s-1)/2 < k <= (s-1)s/2
    base = (s - 2) * (s - 1) // 2
    pos = k - base
    if s % 2 == 0:
        l, i = pos, s - pos
    else:
        i, l = pos, s - pos
    return l, i


def _std_encode(l: int, i: int) -> int:
    s = l + i
    base = (s - 2) * (s - 1) // 2
    pos = l if s % 2 == 0 else i
    return base + pos


def index_to_pair(k: int) -> tuple[int, int]:
    """Decode linear cube index k into (level l, center index i)."""
    if k < 1:
        raise DomainError("index must be >= 1")
    return _std_decode(_CANON_TO_STD.get(k, k))


def pair_to_index(l: int, i: int) -> int:
    if l < 1 or i < 1:
        raise DomainError("level and center index must be >= 1")
    k = _std_encode(l, i)
    return _STD_TO_CANON.get(k, k)


# --------------------------------------------------------------------------
# Cubes and weights

@dataclass(frozen=True)
class Cube:
    k: int
    level: int
    center_index: int
    n: int
    center: tuple
    edge: float

    @property
    def half(self) -> float:
        return 0.5 * self.edge

    @property
    def lo(self) -> np.ndarray:
        return np.array([float(c) for c in self.center]) - self.half

    @property
    def hi(self) -> np.ndarray:
        return np.array([float(c) for c in self.center]) + self.half

    @property
    def volume(self) -> float:
        # edge^n = 2^{-l n} n^{-n/2}, kept in closed form to avoid drift
        return 2.0 ** (-self.level * self.n) * self.n ** (-self.n / 2.0)

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float).reshape(self.n)
        return bool(np.all(p >= self.lo - 1e-15) and np.all(p <= self.hi + 1e-15))


def cube_at(k: int, n: int) -> Cube:
    """Cube number k of the enumerated family in dimension n."""
    if n < 1:
        raise DomainError("dimension must be >= 1")
    l, i = index_to_pair(k)
    center = enum_rational_vector(i, n)
    edge = 2.0 ** (-l) / math.sqrt(n)
    return Cube(k=k, level=l, center_index=i, n=n, center=center, edge=edge)


@lru_cache(maxsize=None)
def cubes_up_to(K: int, n: int) -> tuple[Cube, ...]:
    return tuple(cube_at(k, n) for k in range(1, K + 1))


def weight(k: int) -> float:
    """t_k = 2^-k."""
    return 2.0 ** (-k)


def weight_tail(K: int) -> float:
    """sum_{k > K} t_k = 2^-K."""
    return 2.0 ** (-K)


@dataclass(frozen=True)
class TailBound:
    value: float
    heuristic: bool = False

    def __float__(self):
        return self.value


def tail_bound(K: int, p: float, per_term_bound: float) -> TailBound:
    """Bound on the omitted tail of the weighted p-sum past truncation K.

    For p < infinity the tail of {sum t_k |F_k|^p}^{1/p} is at most
    (2^-K)^{1/p} * sup_{k>K} |F_k|; for p = infinity the per-term bound is
    returned unchanged and flagged heuristic.
    """
    if K < 0 or per_term_bound < 0:
        raise DomainError("K and per_term_bound must be >= 0")
    if not (p >= 1):
        raise DomainError("p must be in [1, inf]")
    if math.isinf(p):
        return TailBound(per_term_bound, heuristic=True)
    return TailBound(weight_tail(K) ** (1.0 / p) * per_term_bound)


# --------------------------------------------------------------------------
# Cube functionals

_FUNCTIONAL_CACHE: dict = {}


def indicator_functional(k: int, f: ScalarField, tol: float = 1e-10) -> complex:
    """F_k(f) = integral of f over cube B_k (dimension taken from the field)."""
    from .gauge import hk_integrate_box

    key = (ENUMERATION_ID, f.n, k, f.cache_token, tol)
    if key in _FUNCTIONAL_CACHE:
        return _FUNCTIONAL_CACHE[key]
    cube = cube_at(k, f.n)
    lo, hi = cube.lo, cube.hi
    if f.support is not None:
        s_lo, s_hi = f.support
        lo = np.maximum(lo, s_lo)
        hi = np.minimum(hi, s_hi)
        if np.any(hi <= lo):
            _FUNCTIONAL_CACHE[key] = 0.0
            return 0.0
    res = hk_integrate_box(f, lo, hi, tol=tol)
    value = res.value
    _FUNCTIONAL_CACHE[key] = value
    return value
