"""Binary shard files and the byte <-> field-element packing used by the CLI.

Layout (little-endian)::

    0   4  magic      b"HMSR"
    4   1  version    1
    5   1  n
    6   1  k
    7   2  q
    9   1  instances
    10  1  node_id
    11  5  payload byte length of the encoded input (0 if not from a file)
    16  .  body: uint16 symbols, stripe after stripe, N per stripe

A body of ``S * N`` symbols holds ``S`` independent codeword stripes.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .code import CodeParams
from .errors import ShardFormatError

MAGIC = b"HMSR"
VERSION = 1
HEADER = struct.Struct("<4sBBBHBB5s")
SUFFIX = ".hmsr"


@dataclass(eq=False)
class ShardFile:
    n: int
    k: int
    q: int
    instances: int
    node_id: int
    symbols: np.ndarray  # (stripes, N)
    length: int = 0

    @property
    def N(self) -> int:
        return self.instances << self.n

    @property
    def stripes(self) -> int:
        return self.symbols.shape[0]

    def to_bytes(self) -> bytes:
        head = HEADER.pack(MAGIC, VERSION, self.n, self.k, self.q, self.instances,
                           self.node_id, self.length.to_bytes(5, "little"))
        return head + self.symbols.astype("<u2").tobytes()

    @classmethod
    def from_bytes(cls, raw: bytes, check: bool = True) -> ShardFile:
        if len(raw) < HEADER.size:
            raise ShardFormatError(f"file too short for a header: {len(raw)} bytes")
        magic, version, n, k, q, instances, node_id, length = HEADER.unpack_from(raw)
        if magic != MAGIC:
            raise ShardFormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise ShardFormatError(f"unsupported version {version}")
        if not (0 <= node_id < n) or instances < 1:
            raise ShardFormatError(f"inconsistent header: n={n}, node_id={node_id}, instances={instances}")
        body = raw[HEADER.size:]
        N = instances << n
        if len(body) == 0 or len(body) % (2 * N):
            raise ShardFormatError(f"body of {len(body)} bytes is not a whole number of {N}-symbol stripes")
        symbols = np.frombuffer(body, dtype="<u2").astype(np.int64).reshape(-1, N)
        if check and (symbols >= q).any():
            raise ShardFormatError(f"symbol out of range for q={q}")
        return cls(n, k, q, instances, node_id, symbols, int.from_bytes(length, "little"))

    def write(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def read(cls, path, check: bool = True) -> ShardFile:
        return cls.from_bytes(Path(path).read_bytes(), check=check)

    def matches(self, other: ShardFile) -> bool:
        return ((self.n, self.k, self.q, self.instances, self.stripes, self.length)
                == (other.n, other.k, other.q, other.instances, other.stripes, other.length))


def shard_path(directory, node_id: int) -> Path:
    return Path(directory) / f"node_{node_id:02d}{SUFFIX}"


def bits_per_symbol(q: int) -> int:
    return q.bit_length() - 1


def pack_bytes(data: bytes, params: CodeParams) -> np.ndarray:
    """Split ``data`` into ``(stripes, k, N)`` symbols, ``floor(log2 q)`` bits each, zero padded."""
    b = bits_per_symbol(params.q)
    per_stripe = params.k * params.N
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    n_sym = -(-len(bits) // b)
    stripes = max(1, -(-n_sym // per_stripe))
    padded = np.zeros(stripes * per_stripe * b, dtype=np.uint8)
    padded[:len(bits)] = bits
    weights = 1 << np.arange(b, dtype=np.int64)
    symbols = padded.reshape(-1, b).astype(np.int64) @ weights
    return symbols.reshape(stripes, params.k, params.N)


def unpack_bytes(symbols: np.ndarray, q: int, length: int) -> bytes:
    b = bits_per_symbol(q)
    flat = np.asarray(symbols, dtype=np.int64).ravel()
    bits = ((flat[:, None] >> np.arange(b)) & 1).astype(np.uint8).ravel()
    return np.packbits(bits[:length * 8], bitorder="little").tobytes()
