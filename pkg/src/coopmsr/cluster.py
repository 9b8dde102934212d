"""In-memory storage cluster: placement, failure injection and a transfer ledger.

Bandwidth figures in a :class:`RepairReport` are tallied from the ledger,
never from closed-form expressions, so optimality is measured.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .code import CodeParams, Codeword, encode
from .errors import ParameterError, ProtocolError
from .grouping import helper_selection, make_scenario
from .repair import COOPERATIVE, DOWNLOAD, cooperative_repair

__all__ = ["Cluster", "TransferRecord", "RepairReport", "helper_selection", "optimal_bandwidth"]


@dataclass(frozen=True)
class TransferRecord:
    phase: str
    src: int
    dst: int
    n_symbols: int
    provenance: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> str:
        return json.dumps({"phase": self.phase, "from": self.src, "to": self.dst,
                           "n_symbols": self.n_symbols, "plan_provenance": self.provenance},
                          sort_keys=True)


@dataclass
class RepairReport:
    beta1: int
    beta2: int
    gamma1: int
    gamma2: int
    gamma_total: int
    gamma_optimal: int
    optimal: bool
    correct: bool

    def to_json(self, **kw) -> str:
        return json.dumps(asdict(self), **kw)

    def __add__(self, other: RepairReport) -> RepairReport:
        """Combine reports of independent stripes repaired under the same scenario."""
        return RepairReport(
            beta1=self.beta1 + other.beta1, beta2=self.beta2 + other.beta2,
            gamma1=self.gamma1 + other.gamma1, gamma2=self.gamma2 + other.gamma2,
            gamma_total=self.gamma_total + other.gamma_total,
            gamma_optimal=self.gamma_optimal + other.gamma_optimal,
            optimal=self.optimal and other.optimal, correct=self.correct and other.correct,
        )


def optimal_bandwidth(h: int, k: int, N: int, d: int | None = None) -> Fraction:
    """Cut-set lower bound ``h (d + h - 1) N / (d - k + h)`` on cooperative repair traffic."""
    d = k + 1 if d is None else d
    if h == 0:
        return Fraction(0)
    return Fraction(h * (d + h - 1) * N, d - k + h)


def report_from_ledger(records: Sequence[TransferRecord], h: int, k: int, N: int, correct: bool) -> RepairReport:
    down = [r for r in records if r.phase == DOWNLOAD]
    coop = [r for r in records if r.phase == COOPERATIVE]
    gamma1 = sum(r.n_symbols for r in down)
    gamma2 = sum(r.n_symbols for r in coop)
    sizes = {r.n_symbols for r in records}
    links = Counter((r.phase, r.src, r.dst) for r in records)
    uniform = len(sizes) <= 1 and all(c == 1 for c in links.values())
    bound = optimal_bandwidth(h, k, N)
    return RepairReport(
        beta1=max((r.n_symbols for r in down), default=0),
        beta2=max((r.n_symbols for r in coop), default=0),
        gamma1=gamma1, gamma2=gamma2, gamma_total=gamma1 + gamma2,
        gamma_optimal=int(bound) if bound.denominator == 1 else float(bound),
        optimal=uniform and gamma1 + gamma2 == bound,
        correct=correct,
    )


class Cluster:
    """One codeword spread over ``n`` nodes.

    Originals of erased shards are kept aside for auditing; reading them while
    a repair is running raises, so the protocol cannot lean on them.
    """

    def __init__(self, params: CodeParams, codeword: Codeword):
        if len(codeword.shards) != params.n:
            raise ParameterError(f"codeword has {len(codeword.shards)} shards, code has n={params.n}")
        self.params = params
        self.shards: dict[int, np.ndarray | None] = {
            s.node_id: np.array(s.symbols, dtype=np.int64) for s in codeword.shards}
        self._hidden: dict[int, np.ndarray] = {}
        self.ledger: list[TransferRecord] = []
        self.reads: list[tuple[int, np.ndarray, np.ndarray]] = []  # (helper, left, right)
        self._repairing = False

    @classmethod
    def from_data(cls, params: CodeParams, data, systematic_ids=None) -> Cluster:
        return cls(params, encode(params, data, systematic_ids))

    @classmethod
    def random(cls, params: CodeParams, rng: np.random.Generator) -> Cluster:
        data = rng.integers(0, params.q, size=(params.k, params.N))
        return cls.from_data(params, data)

    @property
    def erased(self) -> tuple[int, ...]:
        return tuple(sorted(i for i, s in self.shards.items() if s is None))

    @property
    def survivors(self) -> tuple[int, ...]:
        return tuple(sorted(i for i, s in self.shards.items() if s is not None))

    def codeword(self) -> Codeword:
        if self.erased:
            raise ProtocolError(f"nodes {list(self.erased)} are erased")
        return Codeword.from_array(np.stack([self.shards[i] for i in range(self.params.n)]))

    def originals(self) -> dict[int, np.ndarray]:
        if self._repairing:
            raise ProtocolError("hidden originals read during repair")
        return {i: s.copy() for i, s in self._hidden.items()}

    def inject_failures(self, erased: Sequence[int]) -> None:
        erased = sorted(set(int(i) for i in erased))
        if not erased:
            return
        if any(not 0 <= i < self.params.n for i in erased):
            raise ParameterError(f"failed nodes out of range: {erased}")
        total = len(set(erased) | set(self.erased))
        if total > self.params.r - 1:
            raise ParameterError(
                f"{total} failures leave no room for k+1={self.params.k + 1} helpers (max r-1={self.params.r - 1})")
        for i in erased:
            if self.shards[i] is not None:
                self._hidden[i] = self.shards[i]
                self.shards[i] = None

    def read_pair_sums(self, helper: int, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        shard = self.shards.get(helper)
        if shard is None:
            raise ProtocolError(f"helper {helper} holds no shard")
        self.reads.append((helper, np.array(left), np.array(right)))
        return (shard[left] + shard[right]) % self.params.q

    def record(self, phase: str, src: int, dst: int, n_symbols: int, provenance: dict | None = None) -> None:
        if n_symbols <= 0:
            raise ProtocolError(f"empty transfer {src} -> {dst}")
        self.ledger.append(TransferRecord(phase, src, dst, n_symbols, provenance or {}))

    def run_repair(self, erased: Sequence[int] | None = None, helpers: Sequence[int] | None = None,
                   debug: bool = True) -> RepairReport:
        if erased is not None:
            self.inject_failures(erased)
        erased = self.erased
        if not erased:
            return report_from_ledger([], 0, self.params.k, self.params.N, correct=True)
        scenario = make_scenario(self.params, erased, helpers)
        self._repairing = True
        try:
            repaired, records = cooperative_repair(scenario, self, debug=debug)
        finally:
            self._repairing = False
        originals = self.originals()
        correct = all(np.array_equal(repaired[i], originals[i]) for i in erased)
        for i in erased:
            self.shards[i] = repaired[i]
            del self._hidden[i]
        return report_from_ledger(records, scenario.h, self.params.k, self.params.N, correct)
