"""Repair scenarios, index groups and per-node pairing plans.

Every pair ``(left, right)`` produced here differs, as base coordinates, in
exactly the bit of the failed node it serves. That makes the failed node's
lambda differ across the pair while every other node's lambda agrees, which
is what the per-pair solve in :mod:`coopmsr.repair` relies on.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence, Union

import numpy as np

from .code import CodeParams
from .errors import ParameterError, ProtocolError
from .hamming import StandardArray, standard_array


@dataclass(frozen=True)
class Divisible:
    """``h + 1 == 2**m``: one instance, groups on all ``h`` failed bits."""
    m: int
    kind = "divisible"

    @property
    def ell(self) -> int:
        return 0


@dataclass(frozen=True)
class NonDivisible:
    """``h + 1 == (2*ell + 1) * 2**m`` with ``ell >= 1``: ``2*ell + 1`` stacked instances."""
    m: int
    ell: int
    kind = "nondivisible"


Case = Union[Divisible, NonDivisible]


def classify(h: int) -> Case:
    if h < 1:
        raise ParameterError(f"need at least one failure, got h={h}")
    m = 0
    odd = h + 1
    while odd % 2 == 0:
        odd //= 2
        m += 1
    if odd == 1:
        return Divisible(m)
    return NonDivisible(m, (odd - 1) // 2)


def instances_for(h: int) -> int:
    return 2 * classify(h).ell + 1


def helper_selection(survivors: Sequence[int], k: int, override: Sequence[int] | None = None) -> tuple[int, ...]:
    """Pick ``k + 1`` helpers: the lowest-indexed survivors unless ``override`` is given."""
    survivors = sorted(set(int(s) for s in survivors))
    if override is not None:
        chosen = tuple(sorted(int(j) for j in override))
        if len(chosen) != k + 1 or len(set(chosen)) != k + 1:
            raise ParameterError(f"need {k + 1} distinct helpers, got {list(override)}")
        if not set(chosen) <= set(survivors):
            raise ParameterError(f"helpers {list(chosen)} are not all survivors {survivors}")
        return chosen
    if len(survivors) < k + 1:
        raise ParameterError(f"only {len(survivors)} survivors, need {k + 1} helpers")
    return tuple(survivors[:k + 1])


@dataclass(frozen=True, eq=False)
class RepairScenario:
    params: CodeParams
    erased: tuple[int, ...]
    helpers: tuple[int, ...]
    case: Case

    @property
    def h(self) -> int:
        return len(self.erased)

    @property
    def m(self) -> int:
        return self.case.m

    @property
    def ell(self) -> int:
        return self.case.ell

    @property
    def h_prime(self) -> int:
        """Hamming word length used for grouping (``h`` itself when divisible)."""
        return (1 << self.m) - 1

    @property
    def unconnected(self) -> tuple[int, ...]:
        used = set(self.erased) | set(self.helpers)
        return tuple(i for i in range(self.params.n) if i not in used)

    @property
    def grouping_nodes(self) -> tuple[int, ...]:
        """Failed nodes whose coordinate bits define the groups; bit ``u`` of ``g`` is node ``[u]``."""
        step = 2 * self.ell + 1
        return tuple(self.erased[step * u] for u in range(self.h_prime))

    def rank(self, node: int) -> int:
        return self.erased.index(node)

    def split_rank(self, u: int) -> tuple[int, int]:
        """``u == (2*ell + 1) * u1 + u2``."""
        return divmod(u, 2 * self.ell + 1)

    def share(self) -> int:
        """Symbols per link, ``N / (h + 1)``."""
        return self.params.N // (self.h + 1)

    def describe(self) -> dict:
        d = {
            "n": self.params.n, "k": self.params.k, "q": self.params.q,
            "instances": self.params.instances, "N": self.params.N,
            "erased": list(self.erased), "helpers": list(self.helpers),
            "unconnected": list(self.unconnected),
            "case": self.case.kind, "m": self.m, "ell": self.ell,
        }
        return d


def make_scenario(params: CodeParams, erased: Sequence[int], helpers: Sequence[int] | None = None) -> RepairScenario:
    erased = tuple(sorted(int(i) for i in erased))
    if len(set(erased)) != len(erased):
        raise ParameterError(f"duplicate failed nodes: {list(erased)}")
    if any(not 0 <= i < params.n for i in erased):
        raise ParameterError(f"failed nodes out of range: {list(erased)}")
    h = len(erased)
    if h > params.r - 1:
        raise ParameterError(f"h={h} failures exceed r-1={params.r - 1} for repair from k+1 helpers")
    case = classify(h)
    expected = 2 * case.ell + 1
    if params.instances != expected:
        raise ParameterError(f"h={h} needs {expected} instance(s), code has {params.instances}")
    survivors = [i for i in range(params.n) if i not in erased]
    chosen = helper_selection(survivors, params.k, helpers)
    return RepairScenario(params, erased, chosen, case)


@dataclass(frozen=True, eq=False)
class GroupTable:
    """Default-ordered groups: ``groups[(w, g)][v]`` is the base coordinate ``S_{w,g}(v)``."""
    instances: int
    width: int  # number of grouping bits h'
    rows: np.ndarray  # (2**width, 2**(n - width)), row g ascending

    def __getitem__(self, key: tuple[int, int]) -> np.ndarray:
        w, g = key
        if not 0 <= w < self.instances:
            raise KeyError(key)
        return self.rows[g]

    @property
    def groups(self) -> dict[tuple[int, int], np.ndarray]:
        return {(w, g): self.rows[g] for w in range(self.instances) for g in range(len(self.rows))}


def _group_rows(n: int, positions: Sequence[int]) -> np.ndarray:
    a = np.arange(1 << n, dtype=np.int64)
    key = np.zeros_like(a)
    for u, pos in enumerate(positions):
        key |= ((a >> pos) & 1) << u
    order = np.argsort(key, kind="stable")
    rows = a[order].reshape(1 << len(positions), -1)
    rows.setflags(write=False)
    return rows


def build_groups_divisible(scenario: RepairScenario) -> GroupTable:
    if not isinstance(scenario.case, Divisible):
        raise ParameterError("scenario is not divisible")
    return GroupTable(1, scenario.h, _group_rows(scenario.params.n, scenario.erased))


def build_groups_nondivisible(scenario: RepairScenario) -> GroupTable:
    if not isinstance(scenario.case, NonDivisible):
        raise ParameterError("scenario is not non-divisible")
    return GroupTable(scenario.params.instances, scenario.h_prime,
                      _group_rows(scenario.params.n, scenario.grouping_nodes))


class PairRecord(NamedTuple):
    left: int
    right: int
    g: int
    g_prime: int
    v: int
    w: int
    w_prime: int


@dataclass(frozen=True, eq=False)
class NodePlan:
    node: int
    rank: int
    case: int  # 1: intra-instance, 2: cross-instance on V_{u1}, 3: cross-instance on V_{h'}
    left: np.ndarray
    right: np.ndarray
    g: np.ndarray
    g_prime: np.ndarray
    v: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray

    def __len__(self):
        return len(self.left)

    def pairs(self) -> Iterator[PairRecord]:
        cols = (self.left, self.right, self.g, self.g_prime, self.v, self.w, self.w_prime)
        for row in zip(*(c.tolist() for c in cols)):
            yield PairRecord(*row)


@dataclass(frozen=True, eq=False)
class PairingPlan:
    scenario: RepairScenario
    nodes: dict[int, NodePlan]

    def __getitem__(self, node: int) -> NodePlan:
        return self.nodes[node]

    def to_json(self) -> str:
        doc = {
            "scenario": self.scenario.describe(),
            "plans": [
                {"node": p.node, "rank": p.rank, "case": p.case,
                 "pairs": [list(rec) for rec in p.pairs()]}
                for p in self.nodes.values()
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _node_plan(node, rank, case, base, left_rows, right_rows, gs, gps, w, wp) -> NodePlan:
    width = left_rows.shape[1]
    rep = lambda x: np.repeat(np.asarray(x, dtype=np.int64), width)
    return NodePlan(
        node=node, rank=rank, case=case,
        left=(w * base + left_rows).ravel(),
        right=(wp * base + right_rows).ravel(),
        g=rep(gs), g_prime=rep(gps),
        v=np.tile(np.arange(width, dtype=np.int64), len(gs)),
        w=np.full(len(gs) * width, w, dtype=np.int64),
        w_prime=np.full(len(gs) * width, wp, dtype=np.int64),
    )


def pair_divisible(scenario: RepairScenario, table: GroupTable, array: StandardArray | None = None) -> PairingPlan:
    """Node ``i_u`` pairs ``S_g(v)`` with ``S_{g ^ (1 << u)}(v)`` for every ``g`` in ``V_0``."""
    if not isinstance(scenario.case, Divisible):
        raise ParameterError("scenario is not divisible")
    array = array or standard_array(scenario.m)
    if array.word_length != scenario.h:
        raise ParameterError(f"standard array has word length {array.word_length}, need {scenario.h}")
    base = scenario.params.base_size
    v0 = list(array[0])
    nodes = {}
    for u, node in enumerate(scenario.erased):
        gp = [g ^ (1 << u) for g in v0]
        nodes[node] = _node_plan(node, u, 1, base, table.rows[v0], table.rows[gp], v0, gp, 0, 0)
    return PairingPlan(scenario, nodes)


def pair_nondivisible(scenario: RepairScenario, table: GroupTable, array: StandardArray | None = None) -> PairingPlan:
    """Intra-instance pairs for ranks with ``u2 == 0``, cross-instance pairs otherwise.

    Cross-instance partners are reordered as ``S_g(v) ^ (1 << i_u)``; bit
    ``i_u`` is not a grouping bit for those ranks, so this permutes ``S_g``.
    """
    if not isinstance(scenario.case, NonDivisible):
        raise ParameterError("scenario is not non-divisible")
    hp = scenario.h_prime
    array = array or standard_array(scenario.m)
    if array.word_length != hp:
        raise ParameterError(f"standard array has word length {array.word_length}, need {hp}")
    base = scenario.params.base_size
    nodes = {}
    for u, node in enumerate(scenario.erased):
        u1, u2 = scenario.split_rank(u)
        if u1 < hp and u2 == 0:
            gs = list(array[0])
            gp = [g ^ (1 << u1) for g in gs]
            nodes[node] = _node_plan(node, u, 1, base, table.rows[gs], table.rows[gp], gs, gp, 0, 0)
            continue
        if u1 < hp:
            case, coset, w_right = 2, u1, u2
        elif u1 == hp and u2 < 2 * scenario.ell:
            case, coset, w_right = 3, hp, u2 + 1
        else:
            raise ParameterError(f"rank {u} out of range for h={scenario.h}")
        gs = list(array[coset])
        rows = table.rows[gs]
        nodes[node] = _node_plan(node, u, case, base, rows, rows ^ (1 << node), gs, gs, 0, w_right)
    return PairingPlan(scenario, nodes)


def build_plan(scenario: RepairScenario) -> tuple[GroupTable, PairingPlan]:
    """Grouping followed by pairing, dispatched on the scenario's case."""
    array = standard_array(scenario.m)
    if isinstance(scenario.case, Divisible):
        table = build_groups_divisible(scenario)
        return table, pair_divisible(scenario, table, array)
    table = build_groups_nondivisible(scenario)
    return table, pair_nondivisible(scenario, table, array)


def condition_mask(params: CodeParams, node: int, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """True where a pair lets ``node`` run the per-pair solve.

    Evaluated directly from lambda values: ``node``'s lambda must differ across
    the pair and every other node's must agree.
    """
    nodes = np.arange(params.n)[:, None]
    la = params.lambdas(nodes, np.asarray(left)[None, :])
    lb = params.lambdas(nodes, np.asarray(right)[None, :])
    same = la == lb
    others = np.delete(same, node, axis=0).all(axis=0)
    return ~same[node] & others


def check_plan(plan: PairingPlan) -> None:
    params = plan.scenario.params
    for p in plan.nodes.values():
        ok = condition_mask(params, p.node, p.left, p.right)
        if not ok.all():
            bad = int(np.flatnonzero(~ok)[0])
            raise ProtocolError(
                f"pair ({int(p.left[bad])}, {int(p.right[bad])}) of node {p.node} breaks the pairing conditions")
