"""Binary Hamming codes and their standard arrays.

Words are integers; bit ``j`` is coordinate ``j``. The parity-check matrix of
the length ``2**m - 1`` code has as column ``j`` the binary expansion of
``j + 1``, so a word is a codeword iff the XOR of ``j + 1`` over its set bits
is zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache


def word_length(m: int) -> int:
    return (1 << m) - 1


def syndrome(word: int) -> int:
    s, j = 0, 1
    while word:
        if word & 1:
            s ^= j
        word >>= 1
        j += 1
    return s


@lru_cache(maxsize=None)
def _codewords(m: int) -> tuple[int, ...]:
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    return tuple(w for w in range(1 << word_length(m)) if syndrome(w) == 0)


def hamming_codewords(m: int) -> list[int]:
    """Codewords of the ``(2**m - 1, 2**m - 1 - m)`` Hamming code, ascending.

    ``m = 1`` gives the zero-dimensional length-1 code and ``m = 0`` the
    empty word; both are just ``[0]``.
    """
    return list(_codewords(m))


@dataclass(frozen=True)
class StandardArray:
    m: int
    cosets: tuple[tuple[int, ...], ...]

    @property
    def word_length(self) -> int:
        return word_length(self.m)

    def __getitem__(self, i: int) -> tuple[int, ...]:
        return self.cosets[i]

    def __len__(self):
        return len(self.cosets)

    def coset_of(self, word: int) -> int:
        """Index ``i`` of the coset ``V_i`` holding ``word`` (the syndrome, by construction)."""
        return syndrome(word)


@lru_cache(maxsize=None)
def standard_array(m: int) -> StandardArray:
    """Cosets ``V_0 .. V_{2**m - 1}``; ``V_i[v] == V_0[v] ^ (1 << (i - 1))`` for ``i >= 1``."""
    v0 = _codewords(m)
    cosets = [v0] + [tuple(c ^ (1 << (i - 1)) for c in v0) for i in range(1, word_length(m) + 1)]
    return StandardArray(m, tuple(cosets))
