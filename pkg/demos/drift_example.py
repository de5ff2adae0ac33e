# %% [markdown]
# Drift on a half line: y+ = y + u, u in {0, 1}, cost g(y) = 1 - 1/(1 + (y-2)^2).
# Parking at y = 2 costs nothing, so the best long-run average is 0.

# %%
import numpy as np

from occulp import dp, lp
from occulp.discretize import GridSpec, build
from occulp.limits import g_star
from occulp.measures import discounted_measure
from occulp.system import make_system

model = make_system("drift", cost=("bump", {"center": 2.0}))
dsys = build(model, GridSpec([0.0], [10.0], [10]))
print(dsys.n_states, "states (last one is INF)", dsys.n_controls, "controls")

# %% stationary LP over G with indicator test functions (flow balance)
sol = g_star(dsys, lp.indicator_basis(dsys))
print("g* =", sol.objective, "measure", sol.weights)

# %% the same answer from the dynamic-programming side
for alpha in (0.9, 0.99, 0.999):
    vf = dp.value_iteration(dsys, alpha)
    print(f"alpha={alpha}: min V = {dp.min_over_states(vf)}")
for S in (10, 100, 1000):
    print(f"S={S}: min V(S,.) = {dp.min_over_states(dp.finite_horizon(dsys, S))}")

# %% optimal discounted measure from y0 = 0: walk to 2, then stay
vf = dp.value_iteration(dsys, 0.5, 1e-12)
mu = discounted_measure(dsys, 0, dp.greedy_policy(dsys, vf), 0.5)
print(mu.weights)
dlp = lp.solve(lp.build_discounted_lp(dsys, lp.indicator_basis(dsys), 0.5, 0))
print("discounted LP at y0=0:", dlp.objective, "VI:", vf.values[0])

# %% a smooth basis gives a relaxation (fewer rows), never a larger optimum
for count in (0, 2, 5):
    B = lp.smooth_basis(dsys, count)
    print(f"smooth({count}): {len(B)} rows, optimum {g_star(dsys, B).objective:.6f}")
