# %% [markdown]
# # Cube counts by depth on the 2-d Rastrigin function
#
# Four rules on the same problem, eps = 1e-8. The Lipschitz rule gets a
# short time limit; it would run for hours otherwise.

# %%
import numpy as np

from qbnb import SearchConfig, rastrigin, solve

p = rastrigin(2)
print(p.name, "L1=%.2f L2=%.2f L3=%.1f" % (p.L1, p.L2, p.L3))

runs = {}
for algo in ["lipschitz", "qbnb2", "qbnb23", "alphabb"]:
    limit = 15.0 if algo == "lipschitz" else 120.0
    runs[algo] = solve(p, algo, SearchConfig(eps=1e-8, time_limit=limit))
    r = runs[algo]
    print(f"{algo:10s} {r.status.value:11s} f_best={r.f_best:.2e} gap={r.gap:.1e} "
          f"cubes={r.total_cubes} time={r.wall_time:.2f}s")

# %% cumulative cubes per depth (every 4th generation)
depth = max(len(r.generations) for r in runs.values())
print("depth " + " ".join(f"{a:>10s}" for a in runs))
for g in range(0, depth, 4):
    cells = []
    for r in runs.values():
        cells.append(f"{r.generations[g].cumulative_cubes:10d}" if g < len(r.generations) else " " * 10)
    print(f"{g:5d} " + " ".join(cells))

# %% the error ub - lb per generation for qBnB(2+3): note the sudden drop
for rec in runs["qbnb23"].generations[-6:]:
    print(rec.depth, "%.3e" % rec.gap)

# %% where did the Lipschitz run stall
lip = runs["lipschitz"]
print("lipschitz reached depth", len(lip.generations) - 1, "with gap %.2e" % lip.gap)
print("frontier size at the end:", lip.generations[-1].cubes_processed)
