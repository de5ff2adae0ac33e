# %% [markdown]
# Abel and Cesaro sweeps on a small random system.  The optimum is the
# cycle 0 -> 2 -> 0, so the Abel gap shrinks like 1 - alpha while the Cesaro
# gap from state 0 is already zero at every even horizon.

# %%
import numpy as np

from occulp.discretize import random_system
from occulp.limits import abel_sweep, cesaro_sweep

dsys = random_system(3, 2, 0)
print("next states\n", dsys.next_state, "\ncosts\n", np.round(dsys.cost, 3))

ra = abel_sweep(dsys, alphas=[0.9, 0.99, 0.999, 0.9999], tol=1e-12)
rc = cesaro_sweep(dsys, Ss=[10, 100, 1000, 10000])
print("g* =", ra.g_star)
for a, gap in zip(ra.schedule, ra.gaps):
    print(f"alpha={a}: gap {gap:.3e}  gap/(1-alpha) {gap / (1 - a):.4f}")
for S, gap in zip(rc.schedule, rc.gaps):
    print(f"S={S}: gap {gap:.3e}")
print(ra.verdict, rc.verdict)
