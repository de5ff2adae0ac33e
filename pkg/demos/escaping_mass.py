# %% [markdown]
# Always moving right (u = 1) from y = 0.  The averaging measures put weight
# 1/S on each of 0..S-1, so mass on any bounded box vanishes as S grows.
# On the compactified grid the limit sits entirely at INF.

# %%
import numpy as np

from occulp import lp
from occulp.discretize import GridSpec, build
from occulp.measures import averaging_measure
from occulp.system import make_system

model = make_system("drift", cost=("bump", {"center": 2.0}))
big = build(model, GridSpec([0.0], [1000.0], [1000]))

R = 5
for S in (10, 100, 1000):
    mu = averaging_measure(big, 0, lambda s: 1, S)
    print(f"S={S}: mass on [0,{R}] x U = {mu.mass(lambda s, u: big.coords[s, 0] <= R)}")

# %% the compactified stationary LP can park mass at INF when that is cheap
small = build(model, GridSpec([0.0], [10.0], [10]), cost_at_inf=-1.0)
B = lp.indicator_basis(small)
for compact in (False, True):
    sol = lp.solve(lp.build_average_lp(small, B, compactified=compact))
    prof = lp.infinity_mass_profile(sol, small, [2, 5, 10])
    print("compactified" if compact else "restricted  ", sol.objective, "inf mass", sol.inf_mass,
          "tail", prof["tail_mass"])
