# coding: utf-8

# # Bandwidth against the cut-set bound
#
# Sweep a few (n, k, h) points. Every row should show measured == optimal.

from coopmsr.cli import cmd_bench, cmd_params

rows = cmd_bench([6, 8, 10], [2, 3], [1, 2, 3], seed=1)
cols = ["n", "k", "h", "case", "N", "gamma", "gamma_optimal", "optimal", "seconds"]
print(" ".join(f"{c:>13}" for c in cols))
for row in rows:
    print(" ".join(f"{str(row[c]):>13}" for c in cols), row["error"])

# Sub-packetization next to h+1 stacked copies of the binary code.

for h in (3, 7, 5, 11):
    info = cmd_params(14, 2, 29, h)
    print(h, info["case"], info["N"], info["prior_N"], info["ratio"])
