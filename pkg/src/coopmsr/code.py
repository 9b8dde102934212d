"""(n, k) Hadamard MSR codes with sub-packetization ``instances * 2**n``.

Node ``i`` has coding matrix ``A_i`` with diagonal entry ``lam[i, a_i]`` in
row ``a``, where ``a_i`` is bit ``i`` of the base coordinate. The matrices
are never built; everything goes through the ``(n, 2)`` lambda table.

A codeword satisfies, for every global coordinate ``c`` and ``t < r``::

    sum_i lambda(i, c)**t * f[i, c] == 0

so the code is an array of N independent (n, k) MDS codes over F_q.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .gf import FieldElement, PrimeField, solve_vandermonde_batch, vandermonde_powers


@dataclass(frozen=True, eq=False)
class CodeParams:
    n: int
    k: int
    q: int
    lam: np.ndarray  # shape (n, 2): lam[i, b] for bit value b
    instances: int = 1

    @property
    def r(self) -> int:
        return self.n - self.k

    @property
    def base_size(self) -> int:
        return 1 << self.n

    @property
    def N(self) -> int:
        return self.instances << self.n

    @cached_property
    def field(self) -> PrimeField:
        return PrimeField(self.q)

    @cached_property
    def lambda_table(self) -> np.ndarray:
        """``(n, 2**n)`` array: entry ``[i, a]`` is the diagonal of ``A_i`` at row ``a``."""
        a = np.arange(self.base_size, dtype=np.int64)
        bits = (a[None, :] >> np.arange(self.n)[:, None]) & 1
        table = self.lam[np.arange(self.n)[:, None], bits]
        table.setflags(write=False)
        return table

    def lambdas(self, nodes, coords) -> np.ndarray:
        """Vectorised lambda lookup; broadcasts ``nodes`` against ``coords``."""
        nodes = np.asarray(nodes, dtype=np.int64)
        coords = np.asarray(coords, dtype=np.int64) % self.base_size
        return self.lam[nodes, (coords >> nodes) & 1]

    def describe(self) -> dict:
        return {
            "n": self.n, "k": self.k, "r": self.r, "q": self.q,
            "instances": self.instances, "N": self.N,
            "lambda": self.lam.tolist(),
        }


def make_params(n: int, k: int, q: int, instances: int = 1, lambdas=None) -> CodeParams:
    """Build code parameters.

    By default ``lam[i] = (alpha**i, -alpha**i)`` with ``alpha`` the smallest
    primitive root of F_q, which needs ``q >= 2n + 1``. An explicit ``(n, 2)``
    table of distinct nonzero values may be passed instead.
    """
    if not 2 <= k < n:
        raise ParameterError(f"need 2 <= k < n, got n={n}, k={k}")
    if n > 32:
        raise ParameterError(f"n={n} gives an unmanageable sub-packetization")
    if instances < 1 or instances % 2 == 0:
        raise ParameterError(f"instances must be odd and positive, got {instances}")
    fld = PrimeField(q)
    if lambdas is None:
        if q < 2 * n + 1:
            raise ParameterError(f"q={q} too small for n={n}: need q >= {2 * n + 1}")
        alpha = fld.primitive_root()
        lam = np.array([[pow(alpha, i, q), (-pow(alpha, i, q)) % q] for i in range(n)], dtype=np.int64)
    else:
        lam = np.asarray(lambdas, dtype=np.int64)
        if lam.shape != (n, 2):
            raise ParameterError(f"lambda table must have shape ({n}, 2), got {lam.shape}")
        if ((lam < 0) | (lam >= q)).any():
            raise ParameterError("lambda values must lie in [0, q)")
    if (lam == 0).any() or len(np.unique(lam)) != 2 * n:
        raise ParameterError(f"lambda values must be 2n distinct nonzero elements: {lam.tolist()}")
    lam.setflags(write=False)
    return CodeParams(n=n, k=k, q=q, lam=lam, instances=instances)


def lambda_at(params: CodeParams, i: int, c: int) -> FieldElement:
    if not 0 <= i < params.n:
        raise ParameterError(f"node {i} out of range [0, {params.n})")
    if not 0 <= c < params.N:
        raise ParameterError(f"coordinate {c} out of range [0, {params.N})")
    a = c % params.base_size
    return params.field(int(params.lam[i, (a >> i) & 1]))


@dataclass(frozen=True, eq=False)
class Shard:
    node_id: int
    symbols: np.ndarray

    def __eq__(self, other):
        return (isinstance(other, Shard) and self.node_id == other.node_id
                and np.array_equal(self.symbols, other.symbols))


@dataclass(eq=False)
class Codeword:
    shards: list[Shard] = field(default_factory=list)

    @classmethod
    def from_array(cls, symbols: np.ndarray) -> Codeword:
        return cls([Shard(i, np.array(row, dtype=np.int64)) for i, row in enumerate(symbols)])

    @property
    def symbols(self) -> np.ndarray:
        """``(n, N)`` array, row ``i`` being node ``i``'s shard."""
        return np.stack([s.symbols for s in self.shards])

    def __eq__(self, other):
        return (isinstance(other, Codeword) and len(self.shards) == len(other.shards)
                and all(a == b for a, b in zip(self.shards, other.shards)))


def _solve_missing(params: CodeParams, known: dict[int, np.ndarray], missing: Sequence[int]) -> np.ndarray:
    """Per-coordinate solve of the parity checks for the ``missing`` nodes' symbols."""
    q, r, N = params.q, params.r, params.N
    coords = np.arange(N)
    rhs = np.zeros((N, r), dtype=np.int64)
    for i, f in known.items():
        pw = vandermonde_powers(params.lambdas(i, coords), r, q)  # (r, N)
        rhs = (rhs - (pw * f[None, :]).T) % q
    columns = params.lambdas(np.asarray(missing)[None, :], coords[:, None])  # (N, r)
    return solve_vandermonde_batch(columns, rhs, params.field).T


def _check_symbols(params: CodeParams, rows) -> list[np.ndarray]:
    out = []
    for row in rows:
        arr = np.asarray(row, dtype=np.int64)
        if arr.shape != (params.N,):
            raise ParameterError(f"expected {params.N} symbols per node, got shape {arr.shape}")
        if ((arr < 0) | (arr >= params.q)).any():
            raise ParameterError(f"symbols must lie in [0, {params.q})")
        out.append(arr)
    return out


def encode(params: CodeParams, data, systematic_ids: Sequence[int] | None = None) -> Codeword:
    """Systematically encode ``k`` data rows onto ``systematic_ids`` (default ``0..k-1``)."""
    if systematic_ids is None:
        systematic_ids = range(params.k)
    systematic_ids = [int(i) for i in systematic_ids]
    if len(systematic_ids) != params.k or len(set(systematic_ids)) != params.k:
        raise ParameterError(f"need {params.k} distinct systematic ids, got {systematic_ids}")
    if any(not 0 <= i < params.n for i in systematic_ids):
        raise ParameterError(f"systematic ids out of range: {systematic_ids}")
    rows = _check_symbols(params, data)
    if len(rows) != params.k:
        raise ParameterError(f"expected {params.k} data rows, got {len(rows)}")
    known = dict(zip(systematic_ids, rows))
    parity = [i for i in range(params.n) if i not in known]
    solved = _solve_missing(params, known, parity)
    out = np.zeros((params.n, params.N), dtype=np.int64)
    for i, row in known.items():
        out[i] = row
    out[parity] = solved
    return Codeword.from_array(out)


def parity_residuals(params: CodeParams, symbols: np.ndarray) -> np.ndarray:
    """``(r, N)`` array of parity-check sums; all zero iff ``symbols`` is a codeword."""
    q, r = params.q, params.r
    coords = np.arange(params.N)
    acc = np.zeros((r, params.N), dtype=np.int64)
    for i in range(params.n):
        pw = vandermonde_powers(params.lambdas(i, coords), r, q)
        acc = (acc + pw * symbols[i][None, :]) % q
    return acc


def verify_codeword(params: CodeParams, codeword: Codeword) -> bool:
    symbols = codeword.symbols
    if symbols.shape != (params.n, params.N):
        return False
    return not parity_residuals(params, symbols % params.q).any()


def mds_reconstruct(params: CodeParams, shards: Sequence[Shard]) -> Codeword:
    """Rebuild the full codeword from exactly ``k`` shards."""
    ids = [s.node_id for s in shards]
    if len(shards) != params.k:
        raise ParameterError(f"need exactly {params.k} shards, got {len(shards)}")
    if len(set(ids)) != len(ids):
        raise ParameterError(f"duplicate node ids: {ids}")
    if any(not 0 <= i < params.n for i in ids):
        raise ParameterError(f"node ids out of range: {ids}")
    known = dict(zip(ids, _check_symbols(params, [s.symbols for s in shards])))
    missing = [i for i in range(params.n) if i not in known]
    out = np.zeros((params.n, params.N), dtype=np.int64)
    for i, row in known.items():
        out[i] = row
    out[missing] = _solve_missing(params, known, missing)
    return Codeword.from_array(out)
