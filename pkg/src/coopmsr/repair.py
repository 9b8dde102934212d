"""Two-phase cooperative repair with ``k + 1`` helpers.

Download phase: every failed node receives, from each helper, the sums
``f[j, left] + f[j, right]`` over its pairing plan and solves one r x r
system per pair. That yields its own two symbols plus the pair sums of the
other failed (and unconnected) nodes.

Cooperative phase: each failed node forwards to every other failed node the
pair sums it learned for that node. The recipient peels unknowns off one
message at a time, each step needing one side of every pair already known.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ProtocolError
from .gf import solve_vandermonde_batch, solve_vandermonde_like, vandermonde_powers
from .grouping import NodePlan, PairingPlan, RepairScenario, build_plan, check_plan

log = logging.getLogger(__name__)

DOWNLOAD = "download"
COOPERATIVE = "cooperative"


@dataclass(frozen=True, eq=False)
class DownloadMessage:
    sender: int  # helper
    recipient: int  # failed node
    payload: np.ndarray


@dataclass(frozen=True, eq=False)
class CoopMessage:
    sender: int
    recipient: int
    payload: np.ndarray


@dataclass
class PairSolveOutput:
    own_left: int
    own_right: int
    sums: dict[int, int]


@dataclass(eq=False)
class DownloadResult:
    node: int
    own_left: np.ndarray
    own_right: np.ndarray
    sums: dict[int, np.ndarray]  # other failed node -> pair sums over this node's plan
    unconnected_sums: dict[int, np.ndarray]  # kept for debugging only
    messages: list[DownloadMessage] = field(default_factory=list)


def _unknown_layout(scenario: RepairScenario, node: int) -> list[tuple[str, int]]:
    """Order of the r unknowns: own right symbol, then E (own left at ``node``), then U."""
    layout = [("own_right", node)]
    layout += [("own_left" if i == node else "sum", i) for i in scenario.erased]
    layout += [("sum", z) for z in scenario.unconnected]
    return layout


def pair_solve(scenario: RepairScenario, node: int, pair: tuple[int, int],
               helper_sums: Mapping[int, int]) -> PairSolveOutput:
    """Solve one pair ``(a, b)`` for ``node`` from the ``k + 1`` helper sums."""
    params = scenario.params
    fld = params.field
    a, b = pair
    missing = set(scenario.helpers) - set(helper_sums)
    if missing:
        raise ProtocolError(f"missing helper sums from {sorted(missing)}")
    rhs = []
    for t in range(params.r):
        acc = fld(0)
        for j in scenario.helpers:
            acc -= fld(int(params.lambdas(j, a))) ** t * fld(int(helper_sums[j]))
        rhs.append(acc)
    layout = _unknown_layout(scenario, node)
    columns = [fld(int(params.lambdas(i, b if role == "own_right" else a))) for role, i in layout]
    x = solve_vandermonde_like(columns, rhs)
    out = PairSolveOutput(own_left=0, own_right=0, sums={})
    for (role, i), val in zip(layout, x):
        if role == "sum":
            out.sums[i] = val.value
        else:
            setattr(out, role, val.value)
    return out


def solve_node_pairs(scenario: RepairScenario, plan: NodePlan,
                     helper_payloads: Mapping[int, np.ndarray]) -> tuple[np.ndarray, np.ndarray, dict[int, np.ndarray]]:
    """All of ``plan``'s pair solves at once; same algebra as :func:`pair_solve`."""
    params = scenario.params
    q, r = params.q, params.r
    a, b = plan.left, plan.right
    rhs = np.zeros((len(a), r), dtype=np.int64)
    for j in scenario.helpers:
        pw = vandermonde_powers(params.lambdas(j, a), r, q)
        rhs = (rhs - (pw * helper_payloads[j][None, :]).T) % q
    layout = _unknown_layout(scenario, plan.node)
    columns = np.stack([params.lambdas(i, b if role == "own_right" else a) for role, i in layout], axis=1)
    x = solve_vandermonde_batch(columns, rhs, params.field)
    own_left = own_right = None
    sums = {}
    for col, (role, i) in enumerate(layout):
        if role == "own_left":
            own_left = x[:, col]
        elif role == "own_right":
            own_right = x[:, col]
        else:
            sums[i] = x[:, col]
    return own_left, own_right, sums


def _provenance(plan: NodePlan) -> dict:
    return {"node": plan.node, "rank": plan.rank, "case": plan.case,
            "cosets_left": sorted(set(plan.g.tolist())),
            "instance_right": int(plan.w_prime[0]) if len(plan) else 0,
            "pairs": len(plan)}


def download_phase(scenario: RepairScenario, plans: PairingPlan, cluster) -> dict[int, DownloadResult]:
    results = {}
    failed = set(scenario.erased)
    for node in scenario.erased:
        plan = plans[node]
        messages = []
        for j in scenario.helpers:
            payload = cluster.read_pair_sums(j, plan.left, plan.right)
            cluster.record(DOWNLOAD, j, node, len(payload), _provenance(plan))
            messages.append(DownloadMessage(j, node, payload))
        own_left, own_right, sums = solve_node_pairs(
            scenario, plan, {m.sender: m.payload for m in messages})
        results[node] = DownloadResult(
            node=node, own_left=own_left, own_right=own_right,
            sums={i: s for i, s in sums.items() if i in failed},
            unconnected_sums={i: s for i, s in sums.items() if i not in failed},
            messages=messages,
        )
    return results


def _apply_sums(values: np.ndarray, known: np.ndarray, left: np.ndarray, right: np.ndarray,
                sums: np.ndarray, q: int, where: str) -> None:
    kl, kr = known[left], known[right]
    if not (kl | kr).all():
        raise ProtocolError(f"{where}: {int((~(kl | kr)).sum())} pair sums have neither side known")
    fill_right = kl & ~kr
    values[right[fill_right]] = (sums[fill_right] - values[left[fill_right]]) % q
    fill_left = kr & ~kl
    values[left[fill_left]] = (sums[fill_left] - values[right[fill_left]]) % q
    known[right] = True
    known[left] = True


def _coop_order(scenario: RepairScenario, plans: PairingPlan, node: int) -> list[int]:
    """Senders in processing order for ``node``.

    A cross-instance node with ``u1 > 0`` first needs coset ``V_0`` of
    instance 0, which the intra-instance node of rank ``(2l+1)(u1-1)`` pairs
    against ``V_{u1}``. Then intra-instance senders complete instance 0, and
    cross-instance senders fill the remaining instances.
    """
    others = [i for i in scenario.erased if i != node]
    order = []
    u1, _ = scenario.split_rank(scenario.rank(node))
    if plans[node].case != 1 and u1 > 0:
        order.append(scenario.erased[(2 * scenario.ell + 1) * (u1 - 1)])
    order += [i for i in others if plans[i].case == 1 and i not in order]
    order += [i for i in others if plans[i].case != 1]
    return order


def cooperative_phase(scenario: RepairScenario, plans: PairingPlan,
                      downloads: Mapping[int, DownloadResult], cluster) -> dict[int, np.ndarray]:
    params = scenario.params
    q, N = params.q, params.N
    messages = []
    for node in scenario.erased:
        for sender in scenario.erased:
            if sender == node:
                continue
            payload = downloads[sender].sums[node]
            cluster.record(COOPERATIVE, sender, node, len(payload), _provenance(plans[sender]))
            messages.append(CoopMessage(sender, node, payload))
    inbox = {(m.sender, m.recipient): m for m in messages}

    repaired = {}
    for node in scenario.erased:
        plan = plans[node]
        values = np.zeros(N, dtype=np.int64)
        known = np.zeros(N, dtype=bool)
        values[plan.left] = downloads[node].own_left
        values[plan.right] = downloads[node].own_right
        known[plan.left] = known[plan.right] = True
        for sender in _coop_order(scenario, plans, node):
            msg = inbox.get((sender, node))
            if msg is None:
                raise ProtocolError(f"node {node} has no message from {sender}")
            sp = plans[sender]
            _apply_sums(values, known, sp.left, sp.right, msg.payload, q,
                        f"node {node} applying sums from {sender}")
        if not known.all():
            raise ProtocolError(f"node {node} left {int((~known).sum())} symbols unrecovered")
        repaired[node] = values
    return repaired


def cooperative_repair(scenario: RepairScenario, cluster, debug: bool = True):
    """Grouping, pairing, download phase, cooperative phase.

    Returns the repaired shards and the transfer records written during this run.
    """
    start = len(cluster.ledger)
    _, plans = build_plan(scenario)
    if debug:
        check_plan(plans)
    downloads = download_phase(scenario, plans, cluster)
    repaired = cooperative_phase(scenario, plans, downloads, cluster)
    log.debug("repaired %s with %d transfers", scenario.erased, len(cluster.ledger) - start)
    return repaired, cluster.ledger[start:]
