# coding: utf-8

# # Encoding and decoding
#
# A code with n=6 nodes and k=2 data nodes over F_13. Every node stores
# N = 2**6 = 64 field symbols; any two nodes are enough to rebuild the rest.

import itertools

import numpy as np

from coopmsr import encode, make_params, mds_reconstruct, verify_codeword

params = make_params(6, 2, 13)
print(params.describe())

# The lambda table: row i holds the two diagonal values node i switches
# between, chosen by bit i of the coordinate.

print(params.lam)

rng = np.random.default_rng(2024)
data = rng.integers(0, params.q, size=(params.k, params.N))
cw = encode(params, data)
print("parity checks hold:", verify_codeword(params, cw))
print(cw.symbols[:, :8])

# Throw away four nodes at a time and decode from the two that are left.

ok = 0
for pair in itertools.combinations(range(params.n), 2):
    back = mds_reconstruct(params, [cw.shards[i] for i in pair])
    ok += back == cw
print(f"{ok} of 15 two-node subsets decode exactly")
