# %% [markdown]
# # Random Rastrigin-like problems, with and without constraints
#
# delta = -1 pushes the minimizer into a corner of [-5.12, 5.12]^3.
# qBnB(2) assumes an interior minimizer; it is forced on here to show what
# goes wrong.

# %%
import dataclasses

import numpy as np

from qbnb import SearchConfig, random_rastrigin_like, solve

cfg = SearchConfig(eps=1e-8, time_limit=120)

for delta in (-1.0, 1.0):
    table = {a: [] for a in ("lipgrad", "qbnb2", "cqbnb2")}
    for seed in range(1, 11):
        p = random_rastrigin_like(seed, delta)
        for algo in table:
            q = dataclasses.replace(p, unconstrained=True) if algo == "qbnb2" else p
            table[algo].append(solve(q, algo, cfg))
    best = [min(table[a][i].f_best for a in table) for i in range(10)]
    print(f"delta = {delta:+.0f}")
    for algo, rs in table.items():
        cubes = np.mean([r.work["cubes"] for r in rs])
        err = np.mean([r.f_best - b for r, b in zip(rs, best)])
        print(f"  {algo:8s} mean cubes {cubes:8.0f}   mean error {err:.1e}")

# %% the minimizer of seed 1 sits on a corner
p = random_rastrigin_like(1, -1.0)
r = solve(p, "cqbnb2", cfg)
print(p.metadata["alpha"], r.x_best, r.f_best)
