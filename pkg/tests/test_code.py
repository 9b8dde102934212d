import itertools

import numpy as np
import pytest

from coopmsr.code import (Codeword, Shard, encode, lambda_at, make_params, mds_reconstruct,
                          verify_codeword)
from coopmsr.errors import ParameterError


@pytest.fixture(scope="module")
def p14():
    return make_params(14, 2, 29)


def test_make_params_n14_lambdas(p14):
    alpha = 2  # smallest primitive root of 29
    assert p14.lam[0].tolist() == [1, 28]
    assert p14.lam[1].tolist() == [alpha, 29 - alpha]
    assert p14.lam[13].tolist() == [pow(alpha, 13, 29), (-pow(alpha, 13, 29)) % 29]
    assert p14.N == 1 << 14 and p14.r == 12


def test_make_params_small_field():
    p = make_params(4, 2, 11)
    values = {pow(2, i, 11) for i in range(4)} | {(-pow(2, i, 11)) % 11 for i in range(4)}
    assert len(values) == 8
    assert set(p.lam.ravel().tolist()) == values


@pytest.mark.parametrize("args", [(4, 2, 7, 1), (4, 2, 9, 1), (4, 1, 11, 1), (4, 4, 11, 1), (4, 2, 11, 2)])
def test_make_params_rejects(args):
    with pytest.raises(ParameterError):
        make_params(*args)


def test_explicit_lambda_table():
    p = make_params(3, 2, 7, lambdas=[[1, 2], [3, 4], [5, 6]])
    assert p.lam.tolist() == [[1, 2], [3, 4], [5, 6]]
    with pytest.raises(ParameterError):
        make_params(3, 2, 7, lambdas=[[1, 2], [3, 4], [5, 5]])
    with pytest.raises(ParameterError):
        make_params(3, 2, 7, lambdas=[[0, 2], [3, 4], [5, 6]])


def test_lambda_at(p14):
    assert lambda_at(p14, 0, 1).value == 28
    assert lambda_at(p14, 5, 0).value == p14.lam[5, 0]
    assert lambda_at(p14, 13, 1 << 13).value == (-pow(2, 13, 29)) % 29
    with pytest.raises(ParameterError):
        lambda_at(p14, 14, 0)
    with pytest.raises(ParameterError):
        lambda_at(p14, 0, 1 << 14)


def test_lambda_instance_invariance():
    p = make_params(5, 2, 11, instances=3)
    for i in range(5):
        for c in range(p.N):
            assert lambda_at(p, i, c) == lambda_at(p, i, c % 32)


def test_encode_zero():
    p = make_params(4, 2, 11)
    cw = encode(p, np.zeros((2, 16), dtype=int))
    assert not cw.symbols.any()
    assert verify_codeword(p, cw)


def test_encode_random_verifies():
    p = make_params(4, 2, 11)
    rng = np.random.default_rng(0)
    cw = encode(p, rng.integers(0, 11, (2, 16)))
    assert verify_codeword(p, cw)


def test_encode_single_coordinate_hand_solve():
    # n=4, k=2: parity nodes 2, 3 solve x2 + x3 = -(f0 + f1), l2 x2 + l3 x3 = -(l0 f0 + l1 f1)
    p = make_params(4, 2, 11)
    rng = np.random.default_rng(3)
    data = rng.integers(0, 11, (2, 16))
    cw = encode(p, data).symbols
    q = 11
    for c in range(16):
        l = [int(p.lam[i, (c >> i) & 1]) for i in range(4)]
        s0 = -(data[0, c] + data[1, c]) % q
        s1 = -(l[0] * data[0, c] + l[1] * data[1, c]) % q
        det = (l[3] - l[2]) % q
        x3 = (s1 - l[2] * s0) * pow(det, q - 2, q) % q
        x2 = (s0 - x3) % q
        assert (cw[2, c], cw[3, c]) == (x2, x3)


def test_verify_detects_tamper():
    p = make_params(4, 2, 11)
    cw = encode(p, np.random.default_rng(1).integers(0, 11, (2, 16)))
    sym = cw.symbols
    sym[3, 5] = (sym[3, 5] + 1) % 11
    assert not verify_codeword(p, Codeword.from_array(sym))


def test_arbitrary_systematic_placement():
    p = make_params(5, 2, 11)
    data = np.random.default_rng(2).integers(0, 11, (2, 32))
    cw = encode(p, data, systematic_ids=[4, 1])
    assert verify_codeword(p, cw)
    assert np.array_equal(cw.symbols[4], data[0]) and np.array_equal(cw.symbols[1], data[1])


def test_reconstruct_from_systematic():
    p = make_params(6, 2, 13)
    cw = encode(p, np.random.default_rng(4).integers(0, 13, (2, 64)))
    assert mds_reconstruct(p, cw.shards[:2]) == cw


def test_reconstruct_zero():
    p = make_params(6, 2, 13)
    zero = [Shard(i, np.zeros(64, dtype=np.int64)) for i in (3, 5)]
    assert not mds_reconstruct(p, zero).symbols.any()


def test_reconstruct_errors():
    p = make_params(6, 2, 13)
    cw = encode(p, np.zeros((2, 64), dtype=int))
    with pytest.raises(ParameterError):
        mds_reconstruct(p, cw.shards[:3])
    with pytest.raises(ParameterError):
        mds_reconstruct(p, [cw.shards[1], cw.shards[1]])


@pytest.mark.parametrize("n,k,q,inst", [(6, 2, 13, 1), (5, 3, 11, 3), (8, 3, 17, 1), (8, 5, 17, 1)])
def test_roundtrip_every_subset(n, k, q, inst):
    p = make_params(n, k, q, inst)
    cw = encode(p, np.random.default_rng(n * k).integers(0, q, (k, p.N)))
    for subset in itertools.combinations(range(n), k):
        assert mds_reconstruct(p, [cw.shards[i] for i in subset]) == cw


def test_per_coordinate_locality():
    p = make_params(5, 2, 11)
    data = np.random.default_rng(5).integers(0, 11, (2, 32))
    base = encode(p, data).symbols
    data[1, 9] = (data[1, 9] + 3) % 11
    changed = np.flatnonzero((encode(p, data).symbols != base).any(axis=0))
    assert changed.tolist() == [9]
