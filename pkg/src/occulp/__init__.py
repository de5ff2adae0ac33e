"""Occupational-measure linear programming for infinite-horizon discrete-time control.

Modules: ``system`` (controlled dynamics catalog), ``discretize`` (grid
systems with an absorbing infinity node), ``measures`` (occupational
measures), ``dp`` (value iteration and finite-horizon recursion), ``lp``
(flow-balance linear programs), ``limits`` (Abel/Cesaro sweeps, cost
truncation, moment distances), ``cli``.
"""

from .discretize import DiscretizedSystem, GridSpec, build, from_tables, random_system, restrict_to_G
from .dp import finite_horizon, greedy_policy, min_over_states, value_iteration
from .limits import abel_sweep, cesaro_sweep, moment_distance, truncated_sweep
from .lp import (build_average_lp, build_discounted_lp, indicator_basis, smooth_basis, solve,
                 standard_probes)
from .measures import averaging_measure, constraint_residual, discounted_measure, integrate
from .system import SystemModel, make_system, simulate, step

__version__ = "0.1.0"
