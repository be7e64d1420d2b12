"""Arithmetic over GF(2^m) with log/antilog tables.

Elements are plain integers in ``0..q-1``; bit ``i-1`` of the integer is the
``i``-th component of the m-bit representation (LSB first).  The element
``alpha`` is always the integer ``2`` (the polynomial ``x``), which is a
primitive element whenever the field polynomial is primitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

FieldElement = int

MIN_M = 2
MAX_M = 10

# Conventional primitive polynomials (bit masks, constant term is bit 0).
DEFAULT_PRIMITIVE_POLYS = {
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0b100011101,  # x^8 + x^4 + x^3 + x^2 + 1
    9: 0b1000010001,  # x^9 + x^4 + 1
    10: 0b10000001001,  # x^10 + x^3 + 1
}


class FieldDomainError(ValueError):
    """Raised for operations undefined at zero (inverse, order, log)."""


def _build_tables(m: int, poly: int):
    q = 1 << m
    antilog = np.zeros(2 * (q - 1), dtype=np.int64)
    log = np.full(q, -1, dtype=np.int64)
    x = 1
    for k in range(q - 1):
        if log[x] != -1:
            raise ValueError(f"polynomial {poly:#x} is not primitive for m={m}")
        antilog[k] = x
        log[x] = k
        x <<= 1
        if x & q:
            x ^= poly
    if x != 1:
        raise ValueError(f"polynomial {poly:#x} is not primitive for m={m}")
    antilog[q - 1:] = antilog[: q - 1]
    return log, antilog


@dataclass(frozen=True, eq=False)
class FieldParams:
    """GF(2^m) description: degree, primitive polynomial and lookup tables.

    ``antilog`` has length ``2(q-1)`` so that ``antilog[log[a] + log[b]]``
    needs no modular reduction.
    """

    m: int
    prim_poly: int = 0
    log_table: np.ndarray = field(init=False, repr=False)
    antilog_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (MIN_M <= self.m <= MAX_M):
            raise ValueError(f"m must be in {MIN_M}..{MAX_M}, got {self.m}")
        poly = self.prim_poly or DEFAULT_PRIMITIVE_POLYS[self.m]
        if poly >> self.m != 1:
            raise ValueError(f"polynomial {poly:#x} does not have degree {self.m}")
        log, antilog = _build_tables(self.m, poly)
        log.flags.writeable = False
        antilog.flags.writeable = False
        object.__setattr__(self, "prim_poly", poly)
        object.__setattr__(self, "log_table", log)
        object.__setattr__(self, "antilog_table", antilog)

    def __eq__(self, other):
        return (
            isinstance(other, FieldParams)
            and self.m == other.m
            and self.prim_poly == other.prim_poly
        )

    def __hash__(self):
        return hash((self.m, self.prim_poly))

    @property
    def q(self) -> int:
        return 1 << self.m

    @property
    def alpha(self) -> FieldElement:
        return 2

    # -- element arithmetic -------------------------------------------------

    def _check(self, a: int) -> int:
        a = int(a)
        if not 0 <= a < self.q:
            raise ValueError(f"{a} is not an element of GF({self.q})")
        return a

    def add(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return self._check(a) ^ self._check(b)

    def mul(self, a: FieldElement, b: FieldElement) -> FieldElement:
        a, b = self._check(a), self._check(b)
        if a == 0 or b == 0:
            return 0
        return int(self.antilog_table[self.log_table[a] + self.log_table[b]])

    def inv(self, a: FieldElement) -> FieldElement:
        a = self._check(a)
        if a == 0:
            raise FieldDomainError("zero has no multiplicative inverse")
        return int(self.antilog_table[(self.q - 1 - self.log_table[a]) % (self.q - 1)])

    def div(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return self.mul(a, self.inv(b))

    def pow(self, a: FieldElement, k: int) -> FieldElement:
        a = self._check(a)
        if k < 0:
            raise ValueError("negative exponents are not supported; use inv()")
        if a == 0:
            return 1 if k == 0 else 0
        return int(self.antilog_table[(self.log_table[a] * k) % (self.q - 1)])

    def exp(self, k: int) -> FieldElement:
        """``alpha**k`` for any integer ``k`` (negative allowed)."""
        return int(self.antilog_table[k % (self.q - 1)])

    def log(self, a: FieldElement) -> int:
        a = self._check(a)
        if a == 0:
            raise FieldDomainError("log of zero is undefined")
        return int(self.log_table[a])

    def order(self, b: FieldElement) -> int:
        """Multiplicative order of ``b``: ``(q-1) / gcd(log b, q-1)``."""
        n = self.q - 1
        return n // math.gcd(self.log(b), n)

    def is_max_order(self, b: FieldElement) -> bool:
        return self.order(b) == self.q - 1

    # -- vectorised helpers used by the decoder -----------------------------

    @cached_property
    def mul_table(self) -> np.ndarray:
        """Full ``q x q`` multiplication table."""
        q = self.q
        t = np.zeros((q, q), dtype=np.int64)
        nz = np.arange(1, q)
        lg = self.log_table[nz]
        t[1:, 1:] = self.antilog_table[lg[:, None] + lg[None, :]]
        t.flags.writeable = False
        return t

    @cached_property
    def bits(self) -> np.ndarray:
        """``(q, m)`` 0/1 matrix of m-bit representations, LSB first."""
        v = np.arange(self.q)[:, None]
        b = (v >> np.arange(self.m)[None, :]) & 1
        b.flags.writeable = False
        return b

    def format(self, a: FieldElement, symbol: str = "α") -> str:
        """Render a field element as ``0``, ``1`` or ``alpha^k``."""
        if a == 0:
            return "0"
        k = self.log(a)
        if k == 0:
            return "1"
        if k == 1:
            return symbol
        return f"{symbol}^{k}"


_FIELD_CACHE: dict[tuple[int, int], FieldParams] = {}


def get_field(m: int, prim_poly: int = 0) -> FieldParams:
    """Cached :class:`FieldParams` constructor."""
    key = (m, prim_poly or DEFAULT_PRIMITIVE_POLYS.get(m, 0))
    f = _FIELD_CACHE.get(key)
    if f is None:
        f = FieldParams(m, prim_poly)
        _FIELD_CACHE[key] = f
    return f


def compute_H(params: FieldParams) -> frozenset[FieldElement]:
    """Union of all proper multiplicative subgroups of GF(2^m)*.

    For each proper divisor ``r`` of ``n = 2^m - 1`` the subgroup of order ``r``
    is ``{alpha^(i n/r) : i = 0..r-1}``.  The union is exactly the set of
    nonzero elements whose order is below ``n``.
    """
    n = params.q - 1
    out: set[int] = set()
    for r in range(1, n):
        if n % r:
            continue
        step = n // r
        out.update(params.exp(i * step) for i in range(r))
    return frozenset(out)


def H_exponents(params: FieldParams) -> list[int]:
    """Sorted alpha-exponents of :func:`compute_H`."""
    return sorted(params.log(b) for b in compute_H(params))


def close_under_inverse(params: FieldParams, H) -> frozenset[FieldElement]:
    return frozenset(H) | frozenset(params.inv(h) for h in H)
