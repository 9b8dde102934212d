# coding: utf-8

# # When h+1 is not a power of two
#
# For h=5 we have h+1 = 6 = 3 * 2. Three copies of the code are stacked, so
# each node holds N = 3 * 2**9 symbols, and pairs may cross instances.

import numpy as np

from coopmsr import Cluster, build_plan, classify, make_params, make_scenario
from coopmsr.hamming import standard_array

print(classify(5))

# The grouping is steered by a standard array of a short Hamming code. For
# m=2 the first coset is the codeword set {0, 7}.

for i, coset in enumerate(standard_array(2).cosets):
    print(f"V_{i} = {list(coset)}")

params = make_params(9, 3, 19, instances=3)
scenario = make_scenario(params, [0, 2, 3, 5, 7])
_, plan = build_plan(scenario)
base = 1 << params.n
for node in scenario.erased:
    p = plan[node]
    print(node, "rank", scenario.rank(node), "case", p.case,
          "instances", sorted(set((p.left // base).tolist())), "->", sorted(set((p.right // base).tolist())))

cluster = Cluster.random(params, np.random.default_rng(3))
report = cluster.run_repair(scenario.erased)
print(report)
