# %% [markdown]
# Unbounded cost g(y) = (y-2)^2 on the drift system.  Capping at M changes
# nothing once M exceeds the cost on the set where optimal processes live.

# %%
from occulp.discretize import GridSpec
from occulp.limits import truncated_sweep
from occulp.system import make_system

model = make_system("drift", cost=("quadratic", {"center": 2.0}))
rep = truncated_sweep(model, GridSpec([0.0], [10.0], [10]), None, [1.0, 10.0, 100.0],
                      [0.9, 0.99, 0.999], [10, 100, 1000])
for M, ra, rc, a2 in zip(rep.levels, rep.abel, rep.cesaro, rep.a2):
    print(f"M={M}: abel {ra.min_values} cesaro {rc.min_values} radius {a2['radius']} {a2['verdict']}")
print("stabilized:", rep.stabilized)

# %% a cost bounded below by 5 is capped everywhere when M = 1
flat = make_system("drift", cost=("constant", {"value": 5.0}))
rep = truncated_sweep(flat, GridSpec([0.0], [10.0], [10]), None, [1.0, 2.0], [0.9], [10])
print([r.min_values for r in rep.abel], "stabilized:", rep.stabilized)
