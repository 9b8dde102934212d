import numpy as np
import pytest

from coopmsr import repair
from coopmsr.cluster import Cluster
from coopmsr.code import make_params
from coopmsr.errors import ProtocolError
from coopmsr.grouping import build_plan, instances_for, make_scenario
from coopmsr.repair import (COOPERATIVE, DOWNLOAD, cooperative_phase, download_phase, pair_solve,
                            solve_node_pairs)


def rank_mod_p(rows, p):
    """Plain row reduction over F_p on Python ints."""
    m = [[x % p for x in row] for row in rows]
    rank, cols = 0, len(m[0])
    for c in range(cols):
        piv = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][c], p - 2, p)
        m[rank] = [x * inv % p for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


def setup(n, k, q, erased, seed=0, helpers=None):
    params = make_params(n, k, q, instances_for(len(erased)))
    cluster = Cluster.random(params, np.random.default_rng(seed))
    truth = {i: cluster.shards[i].copy() for i in range(n)}
    cluster.inject_failures(erased)
    scenario = make_scenario(params, erased, helpers)
    return params, cluster, truth, scenario


@pytest.fixture(scope="module")
def ex14():
    return setup(14, 2, 29, [0, 1, 2])


def test_pair_system_full_rank_for_n14():
    q, alpha = 29, 2
    gens = [q - 1, 1, alpha, alpha ** 2] + [pow(alpha, e, q) for e in range(6, 14)]
    assert len(set(gens)) == 12
    V = [[pow(x, t, q) for x in gens] for t in range(12)]
    assert rank_mod_p(V, q) == 12


def test_pair_solve_columns_match_generators(ex14):
    params, _, _, scenario = ex14
    layout = repair._unknown_layout(scenario, 0)
    cols = sorted(int(params.lambdas(i, 1 if role == "own_right" else 0)) for role, i in layout)
    assert cols == sorted([28, 1, 2, 4] + [pow(2, e, 29) for e in range(6, 14)])


def test_pair_sum_equations_hold_on_codewords(ex14):
    # adding the r checks at a and b, where only the repaired node's lambda differs
    params, _, truth, scenario = ex14
    q, node = params.q, 1
    _, plan = build_plan(scenario)
    p = plan[node]
    for a, b in list(zip(p.left.tolist(), p.right.tolist()))[:50]:
        for t in range(params.r):
            acc = 0
            for i in range(params.n):
                la, lb = int(params.lambdas(i, a)), int(params.lambdas(i, b))
                if i != node:
                    assert la == lb
                    acc += pow(la, t, q) * (truth[i][a] + truth[i][b])
                else:
                    acc += pow(la, t, q) * truth[i][a] + pow(lb, t, q) * truth[i][b]
            assert acc % q == 0


def test_pair_solve_recovers_truth(ex14):
    params, _, truth, scenario = ex14
    _, plan = build_plan(scenario)
    q = params.q
    for node in scenario.erased:
        p = plan[node]
        for a, b in list(zip(p.left.tolist(), p.right.tolist()))[:5]:
            hs = {j: (truth[j][a] + truth[j][b]) % q for j in scenario.helpers}
            out = pair_solve(scenario, node, (a, b), hs)
            assert (out.own_left, out.own_right) == (truth[node][a], truth[node][b])
            for i, s in out.sums.items():
                assert s == (truth[i][a] + truth[i][b]) % q
            assert set(out.sums) == set(scenario.erased) - {node} | set(scenario.unconnected)


def test_pair_solve_zero():
    params = make_params(6, 2, 13)
    s = make_scenario(params, [0, 1, 2])
    out = pair_solve(s, 0, (0, 1), {j: 0 for j in s.helpers})
    assert out.own_left == out.own_right == 0 and not any(out.sums.values())


def test_pair_solve_missing_helper():
    params = make_params(6, 2, 13)
    s = make_scenario(params, [0, 1, 2])
    with pytest.raises(ProtocolError):
        pair_solve(s, 0, (0, 1), {3: 0, 4: 0})


def test_batched_matches_scalar():
    params, _, truth, scenario = setup(9, 3, 19, [0, 2, 3, 5, 7], seed=4)
    _, plan = build_plan(scenario)
    q = params.q
    node = 3
    p = plan[node]
    payloads = {j: (truth[j][p.left] + truth[j][p.right]) % q for j in scenario.helpers}
    own_left, own_right, sums = solve_node_pairs(scenario, p, payloads)
    for idx in range(0, len(p), 37):
        out = pair_solve(scenario, node, (int(p.left[idx]), int(p.right[idx])),
                         {j: int(v[idx]) for j, v in payloads.items()})
        assert (out.own_left, out.own_right) == (own_left[idx], own_right[idx])
        assert all(out.sums[i] == sums[i][idx] for i in out.sums)


def test_download_phase_counts():
    params, cluster, truth, scenario = setup(6, 2, 13, [0, 1, 2], seed=1)
    _, plan = build_plan(scenario)
    res = download_phase(scenario, plan, cluster)
    assert len(cluster.ledger) == 9
    assert {r.n_symbols for r in cluster.ledger} == {16}
    assert all(r.phase == DOWNLOAD for r in cluster.ledger)
    for node, d in res.items():
        own = np.concatenate([d.own_left, d.own_right])
        assert len(own) == 32
        coords = np.concatenate([plan[node].left, plan[node].right])
        assert np.array_equal(own, truth[node][coords])
        assert set(d.sums) == set(scenario.erased) - {node}
        assert len(d.messages) == 3


def test_cooperative_phase_counts_and_result(ex14):
    params, _, truth, scenario = ex14
    cluster = Cluster.random(params, np.random.default_rng(0))
    cluster.inject_failures(scenario.erased)
    _, plan = build_plan(scenario)
    downloads = download_phase(scenario, plan, cluster)
    before = len(cluster.ledger)
    repaired = cooperative_phase(scenario, plan, downloads, cluster)
    coop = cluster.ledger[before:]
    assert all(r.phase == COOPERATIVE for r in coop)
    h, N = scenario.h, params.N
    for node in scenario.erased:
        got = sum(r.n_symbols for r in coop if r.dst == node)
        assert got == (h - 1) * N // (h + 1)
        assert np.array_equal(repaired[node], truth[node])
    # node 0 learns pair sums of node 1 over the (0,2), (7,5) pairing
    assert sorted(set(plan[1].g_prime.tolist())) == [2, 5]
    assert sorted(set(plan[2].g_prime.tolist())) == [3, 4]


def test_unlock_order_repairs_nondivisible():
    params, cluster, truth, scenario = setup(14, 2, 29, list(range(11)), seed=2)
    _, plan = build_plan(scenario)
    assert repair._coop_order(scenario, plan, 4)[0] == 0
    assert repair._coop_order(scenario, plan, 7)[0] == 3
    assert repair._coop_order(scenario, plan, 10)[0] == 6
    report = cluster.run_repair()
    assert report.correct and report.optimal


def test_naive_order_fails(monkeypatch):
    monkeypatch.setattr(repair, "_coop_order", lambda s, p, n: [i for i in s.erased if i != n])
    params, cluster, _, _ = setup(14, 2, 29, list(range(11)), seed=3)
    with pytest.raises(ProtocolError, match="neither side known"):
        cluster.run_repair()


def test_missing_message_raises(monkeypatch):
    params, cluster, _, scenario = setup(6, 2, 13, [0, 1, 2], seed=5)
    _, plan = build_plan(scenario)
    downloads = download_phase(scenario, plan, cluster)
    orig = repair._coop_order
    monkeypatch.setattr(repair, "_coop_order", lambda s, p, n: orig(s, p, n) + [n])
    with pytest.raises(ProtocolError, match="no message"):
        cooperative_phase(scenario, plan, downloads, cluster)


@pytest.mark.parametrize("n,k,q,E", [(6, 2, 13, [3, 4, 5]), (6, 3, 13, [0, 5]), (8, 2, 17, [2]),
                                     (9, 3, 19, [1, 2, 4, 6, 8]), (10, 2, 23, [9, 0, 1, 4, 5, 6, 7])])
def test_end_to_end(n, k, q, E):
    params, cluster, truth, scenario = setup(n, k, q, E, seed=n + k)
    repaired, records = repair.cooperative_repair(scenario, cluster)
    for i in E:
        assert np.array_equal(repaired[i], truth[i])
    assert len(records) == len(E) * (k + 1) + len(E) * (len(E) - 1)
