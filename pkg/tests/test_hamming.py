import itertools

import numpy as np
import pytest

from coopmsr.hamming import hamming_codewords, standard_array


def null_space_words(m):
    """Brute force: words x with H x = 0 over GF(2), H's columns being 1..2**m-1."""
    nprime = (1 << m) - 1
    H = np.array([[(j >> row) & 1 for j in range(1, nprime + 1)] for row in range(m)], dtype=int)
    words = []
    for bits in itertools.product([0, 1], repeat=nprime):
        x = np.array(bits[::-1])  # x[j] = bit j
        if not (H @ x % 2).any():
            words.append(sum(b << j for j, b in enumerate(x)))
    return sorted(words)


def test_codewords_examples():
    assert hamming_codewords(2) == [0, 7]
    assert hamming_codewords(1) == [0]
    assert hamming_codewords(0) == [0]


def test_m2_check_matrix_layout():
    # columns 1, 2, 3 with bit 0 on row 0 give [[1,0,1],[0,1,1]]
    H = [[(j >> row) & 1 for j in (1, 2, 3)] for row in range(2)]
    assert H == [[1, 0, 1], [0, 1, 1]]


def test_m3_codewords():
    words = hamming_codewords(3)
    assert words == null_space_words(3)
    assert len(words) == 16
    dist = min(bin(a ^ b).count("1") for a, b in itertools.combinations(words, 2))
    assert dist == 3


def test_standard_array_examples():
    sa = standard_array(2)
    assert [list(c) for c in sa.cosets] == [[0, 7], [1, 6], [2, 5], [4, 3]]
    assert [list(c) for c in standard_array(1).cosets] == [[0], [1]]
    sa3 = standard_array(3)
    assert len(sa3) == 8 and all(len(c) == 16 for c in sa3.cosets)
    assert sorted(itertools.chain(*sa3.cosets)) == list(range(128))


@pytest.mark.parametrize("m", [0, 1, 2, 3, 4])
def test_disjoint_cover_and_sizes(m):
    sa = standard_array(m)
    hp = (1 << m) - 1
    everything = list(itertools.chain(*sa.cosets))
    assert len(everything) == 1 << hp
    assert set(everything) == set(range(1 << hp))
    assert all(len(c) == 1 << (hp - m) for c in sa.cosets)
    assert (hp + 1) * (1 << (hp - m)) == 1 << hp


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_positional_pairing(m):
    sa = standard_array(m)
    for i in range(1, len(sa)):
        for v, c in enumerate(sa[0]):
            assert sa[i][v] == c ^ (1 << (i - 1))
            assert sa.coset_of(sa[i][v]) == i
