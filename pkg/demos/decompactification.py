# %% [markdown]
# Moment distance (10 bounded probes) between discounted-LP optima and the
# stationary-LP optimum on the drift example.

# %%
from occulp import lp
from occulp.discretize import GridSpec, build
from occulp.limits import decompactification_profile
from occulp.system import make_system

dsys = build(make_system("drift", cost=("bump", {"center": 2.0})), GridSpec([0.0], [10.0], [10]))
alphas = [0.9, 0.99, 0.999, 0.9999]

# best initial state: the optimal discounted measure is already the point mass at (2, 0)
prof = decompactification_profile(dsys, None, alphas)
print("probes:", prof["probes"])
print("min over y0:", prof["distances"])

# from a fixed start the transient before reaching 2 carries weight ~ 1 - alpha^k
# (y0 = 5 never gets back to 2: moves only go right, so the distance stays put)
for y0 in (0, 1, 5):
    prof = decompactification_profile(dsys, None, alphas, y0=y0)
    print(f"y0={y0}:", [f"{d:.3e}" for d in prof["distances"]], "monotone", prof["monotone"])
