# coding: utf-8

# # Repairing three failed nodes at once
#
# With h=3 failures and d=k+1 helpers, h+1 = 4 is a power of two, so the
# coordinates split into four groups keyed on the bits of the failed nodes.

import numpy as np

from coopmsr import Cluster, build_plan, make_params, make_scenario

params = make_params(14, 2, 29)
cluster = Cluster.random(params, np.random.default_rng(7))

scenario = make_scenario(params, [0, 1, 2], [3, 4, 5])
print(scenario.describe())

# Each failed node pairs coordinate a with a ^ (1 << node). Node 1 pairs
# group 0 with group 2 and group 7 with group 5:

table, plan = build_plan(scenario)
p = plan[1]
print(sorted(set(zip(p.g.tolist(), p.g_prime.tolist()))))
print("first pairs:", list(zip(p.left[:4].tolist(), p.right[:4].tolist())))

# Run it. The report is tallied from the transfer ledger.

report = cluster.run_repair([0, 1, 2], helpers=[3, 4, 5])
print(report.to_json(indent=2))

for rec in cluster.ledger[:4]:
    print(rec.phase, rec.src, "->", rec.dst, rec.n_symbols)

# Lower bound h(d+h-1)N/(d-k+h) with d=3:

h, k, N = 3, 2, params.N
print("bound:", h * (k + h) * N // (h + 1), "measured:", report.gamma_total)
