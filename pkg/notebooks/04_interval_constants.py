# %% [markdown]
# # Interval Lipschitz constants for the benchmark catalog
#
# The interval bounds on the Hessian and third-derivative norms next to the
# largest values seen on a regular grid. The ratio shows how loose the
# enclosures are; Shekel's nested quotients are the worst case.

# %%
from qbnb import dixon_szego
from qbnb.functions import DIXON_SZEGO
from qbnb.interval import sampled_derivative_norm

print(f"{'function':16s} {'d':>2s} {'L2':>11s} {'grid':>11s} {'L3':>11s} {'grid':>11s}")
for name in DIXON_SZEGO:
    p = dixon_szego(name)
    g2 = sampled_derivative_norm(p.expression, p.domain, 2, n_points=10**5)
    g3 = sampled_derivative_norm(p.expression, p.domain, 3, n_points=10**5)
    print(f"{name:16s} {p.dim:2d} {p.L2:11.4g} {g2:11.4g} {p.L3:11.4g} {g3:11.4g}")

# %% expressions can also be parsed from text
from qbnb import Box, expr as ex, lipschitz_bound

e = ex.parse("exp(-x1^2) * sin(3*x2)")
print(ex.to_text(ex.differentiate(e, 0)))
print(lipschitz_bound(e, Box([-1, -1], [1, 1]), 2))
