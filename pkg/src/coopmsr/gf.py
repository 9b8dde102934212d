"""Prime-field arithmetic.

Scalar work goes through :class:`FieldElement`; bulk work (encoding, repair)
uses plain ``int64`` numpy arrays reduced mod ``q`` after every operation.
Since ``q < 2**16`` every product fits comfortably in 64 bits.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import FieldMismatchError, ParameterError, SingularMatrixError

MAX_MODULUS = 1 << 16


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self):
        if not 2 < self.q < MAX_MODULUS or not is_prime(self.q):
            raise ParameterError(f"modulus must be an odd prime below 2**16, got {self.q}")

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(int(value) % self.q, self)

    def elements(self):
        return [FieldElement(v, self) for v in range(self.q)]

    @cached_property
    def inverse_table(self) -> np.ndarray:
        """``inverse_table[x]`` is the inverse of x; entry 0 is 0 (unused)."""
        table = np.zeros(self.q, dtype=np.int64)
        for x in range(1, self.q):
            table[x] = pow(x, self.q - 2, self.q)
        return table

    def order(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise ParameterError("zero has no multiplicative order")
        x, k = a, 1
        while x != 1:
            x = x * a % self.q
            k += 1
        return k

    def primitive_root(self) -> int:
        """Smallest generator of the multiplicative group."""
        for a in range(2, self.q):
            if self.order(a) == self.q - 1:
                return a
        raise AssertionError("prime field without a generator")


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: PrimeField

    @property
    def q(self) -> int:
        return self.field.q

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field.q != self.field.q:
                raise FieldMismatchError(f"F_{self.q} vs F_{other.q}")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.q
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement((self.value + o) % self.q, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement((self.value - o) % self.q, self.field)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FieldElement(self.value * o % self.q, self.field)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value % self.q, self.field)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return FieldElement(pow(self.value, e, self.q), self.field)

    def inverse(self) -> FieldElement:
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.q}")
        return FieldElement(pow(self.value, self.q - 2, self.q), self.field)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * FieldElement(o, self.field).inverse()

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.value == other.value and self.q == other.q
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.q
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.q))

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.q})"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def neg(a: FieldElement) -> FieldElement:
    return -a


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def power(a: FieldElement, e: int) -> FieldElement:
    if e < 0:
        raise ParameterError("exponent must be non-negative")
    return a ** e


def is_primitive(a: FieldElement) -> bool:
    if a.value == 0:
        raise ParameterError("zero is never primitive")
    return a.field.order(a.value) == a.q - 1


def solve_vandermonde_like(columns: Sequence[FieldElement],
                           rhs: Sequence[FieldElement]) -> list[FieldElement]:
    """Solve ``sum_j columns[j]**t * x[j] == rhs[t]`` for ``t in range(r)``.

    Plain Gauss-Jordan elimination with row pivoting; no use is made of the
    Vandermonde structure.
    """
    r = len(columns)
    if len(rhs) != r:
        raise ParameterError(f"expected {r} right-hand sides, got {len(rhs)}")
    if r == 0:
        return []
    field = columns[0].field
    for x in list(columns) + list(rhs):
        if x.field.q != field.q:
            raise FieldMismatchError(f"F_{field.q} vs F_{x.q}")
    q = field.q
    rows = [[pow(c.value, t, q) for c in columns] + [rhs[t].value] for t in range(r)]
    for col in range(r):
        pivot = next((i for i in range(col, r) if rows[i][col]), None)
        if pivot is None:
            raise SingularMatrixError(f"column generators are not distinct: {[c.value for c in columns]}")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        scale = pow(rows[col][col], q - 2, q)
        rows[col] = [x * scale % q for x in rows[col]]
        for i in range(r):
            if i != col and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(x - f * y) % q for x, y in zip(rows[i], rows[col])]
    return [field(row[r]) for row in rows]


def vandermonde_powers(x: np.ndarray, r: int, q: int) -> np.ndarray:
    """Stack ``x**0 .. x**(r-1)`` (mod q) along a new leading axis."""
    x = np.asarray(x, dtype=np.int64)
    out = np.empty((r,) + x.shape, dtype=np.int64)
    if r:
        out[0] = 1
    for t in range(1, r):
        out[t] = out[t - 1] * x % q
    return out


def solve_vandermonde_batch(columns: np.ndarray, rhs: np.ndarray, field: PrimeField) -> np.ndarray:
    """Batched :func:`solve_vandermonde_like`.

    ``columns`` and ``rhs`` have shape ``(B, r)``; returns ``x`` of shape ``(B, r)``.
    Elimination runs on all ``B`` systems in lock step, pivoting per system.
    """
    q = field.q
    columns = np.asarray(columns, dtype=np.int64) % q
    rhs = np.asarray(rhs, dtype=np.int64) % q
    B, r = columns.shape
    if rhs.shape != (B, r):
        raise ParameterError(f"rhs shape {rhs.shape} does not match columns {columns.shape}")
    if B == 0 or r == 0:
        return np.zeros((B, r), dtype=np.int64)
    # aug[b, t, j] = columns[b, j]**t, last column the rhs
    aug = np.concatenate([np.moveaxis(vandermonde_powers(columns, r, q), 0, 1), rhs[:, :, None]], axis=2)
    batch = np.arange(B)
    inv_table = field.inverse_table
    for col in range(r):
        nonzero = aug[:, col:, col] != 0
        if not nonzero.any(axis=1).all():
            bad = int(np.flatnonzero(~nonzero.any(axis=1))[0])
            raise SingularMatrixError(
                f"column generators are not distinct: {columns[bad].tolist()}")
        pivot = col + nonzero.argmax(axis=1)
        swap = pivot != col
        if swap.any():
            idx = batch[swap]
            top = aug[idx, col].copy()
            aug[idx, col] = aug[idx, pivot[swap]]
            aug[idx, pivot[swap]] = top
        aug[:, col] = aug[:, col] * inv_table[aug[:, col, col]][:, None] % q
        factors = aug[:, :, col].copy()
        factors[:, col] = 0
        aug = (aug - factors[:, :, None] * aug[:, col][:, None, :]) % q
    return aug[:, :, r]
