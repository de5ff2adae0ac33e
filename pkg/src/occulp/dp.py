"""Dynamic programming on a DiscretizedSystem.

Values are normalized like the control problems they solve:

    V_alpha(y) = (1-alpha) min sum_t alpha^t g(y(t), u(t))
    V(S, y)    = (1/S)     min sum_{t<S} g(y(t), u(t))

Both serve as the independent oracle for the linear programs in ``lp``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discretize import DiscretizedSystem
from .measures import trajectory_cycle


class ConvergenceError(RuntimeError):
    pass


@dataclass
class ValueFunction:
    values: np.ndarray
    kind: str  # "discounted" or "finite_horizon"
    param: float  # alpha or S
    residual: float = 0.0
    iterations: int = 0
    inf_index: int | None = None
    update_norms: np.ndarray = field(default=None, repr=False)
    policy_table: np.ndarray = field(default=None, repr=False)

    def optimal_controls(self, dsys: DiscretizedSystem, y0: int) -> list[int]:
        """Realized optimal S-step control sequence from ``y0`` (finite horizon only)."""
        if self.kind != "finite_horizon":
            raise ValueError("only finite-horizon value functions carry control sequences")
        S = int(self.param)
        s, out = int(y0), []
        for k in range(S, 0, -1):
            u = int(self.policy_table[k - 1, s])
            out.append(u)
            s = int(dsys.next_state[s, u])
        return out


def viable_states(dsys: DiscretizedSystem) -> np.ndarray:
    """Boolean mask of states from which an infinite admissible path exists."""
    alive = dsys.available.any(axis=1)
    nxt = np.where(dsys.available, dsys.next_state, 0)
    while True:
        new = alive & (dsys.available & alive[nxt]).any(axis=1)
        if np.array_equal(new, alive):
            return alive
        alive = new


def _padded(dsys: DiscretizedSystem, usable: np.ndarray):
    rows = np.arange(dsys.n_states)[:, None]
    cost = np.where(usable, dsys.cost, np.inf)
    nxt = np.where(usable, dsys.next_state, rows)
    return cost, nxt


def value_iteration(dsys: DiscretizedSystem, alpha: float, tol: float = 1e-8,
                    max_iter: int = 1_000_000) -> ValueFunction:
    """Fixed point of V(y) = min_u [(1-alpha) g(y,u) + alpha V(f(y,u))].

    Stops once the sup-norm update drops below tol*(1-alpha)/alpha, which
    bounds the distance to the fixed point by ``tol``.  The iteration starts
    from min_u g(y,u).  States with no
    infinite admissible path get +inf.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0,1)")
    alive = viable_states(dsys)
    idx = np.flatnonzero(alive)
    local = np.full(dsys.n_states, -1)
    local[idx] = np.arange(len(idx))
    usable = dsys.available & alive[np.where(dsys.available, dsys.next_state, 0)]
    cost, nxt = _padded(dsys, usable)
    base = (1.0 - alpha) * cost[idx]
    nxt_l = local[nxt[idx]]

    threshold = tol * (1.0 - alpha) / alpha
    # start from the stage-cost minimum: exact at once for constant costs
    V = np.min(cost[idx], axis=1) if len(idx) else np.zeros(0)
    norms = []
    for it in range(1, max_iter + 1):
        Vn = np.min(base + alpha * V[nxt_l], axis=1)
        d = float(np.max(np.abs(Vn - V))) if len(V) else 0.0
        norms.append(d)
        V = Vn
        if d <= threshold:
            break
    else:
        raise ConvergenceError(
            f"value iteration did not converge in {max_iter} sweeps (alpha={alpha}, last update {d:.3g})")

    residual = float(np.max(np.abs(np.min(base + alpha * V[nxt_l], axis=1) - V))) if len(V) else 0.0
    values = np.full(dsys.n_states, np.inf)
    values[idx] = V
    return ValueFunction(values, "discounted", float(alpha), residual, it, dsys.inf,
                         update_norms=np.array(norms))


def finite_horizon(dsys: DiscretizedSystem, S: int) -> ValueFunction:
    """Backward recursion J_{k+1}(y) = min_u [g(y,u) + J_k(f(y,u))]; V(S,.) = J_S/S.

    ``policy_table[k-1, y]`` is the optimal control with k steps to go.
    """
    S = int(S)
    if S < 1:
        raise ValueError("S must be a positive integer")
    cost, nxt = _padded(dsys, dsys.available)
    J = np.zeros(dsys.n_states)
    table = np.empty((S, dsys.n_states), dtype=np.int64)
    for k in range(S):
        Q = cost + J[nxt]
        table[k] = np.argmin(Q, axis=1)
        J = np.min(Q, axis=1)
    return ValueFunction(J / S, "finite_horizon", S, inf_index=dsys.inf, policy_table=table)


def q_values(dsys: DiscretizedSystem, vf: ValueFunction) -> np.ndarray:
    alpha = vf.param
    usable = dsys.available & np.isfinite(vf.values[np.where(dsys.available, dsys.next_state, 0)])
    cost, nxt = _padded(dsys, usable)
    return (1.0 - alpha) * cost + alpha * np.where(usable, vf.values[nxt], 0.0)


def greedy_policy(dsys: DiscretizedSystem, vf: ValueFunction, tie_tol: float = 1e-12) -> np.ndarray:
    """Argmin of the Bellman expression; near-ties go to the lowest control index.

    States with no finite value get -1.
    """
    if vf.kind != "discounted":
        raise ValueError("greedy_policy needs a discounted value function")
    Q = q_values(dsys, vf)
    best = np.min(Q, axis=1)
    pol = np.full(dsys.n_states, -1)
    ok = np.isfinite(best)
    near = Q <= best[:, None] + tie_tol * np.maximum(1.0, np.abs(best))[:, None]
    pol[ok] = np.argmax(near[ok], axis=1)
    return pol


def min_over_states(vf: ValueFunction, exclude_inf: bool = True) -> tuple[int, float]:
    v = vf.values
    if exclude_inf and vf.inf_index is not None:
        v = v[: vf.inf_index]
    i = int(np.argmin(v))
    return i, float(v[i])


def tie_cluster(vf: ValueFunction, atol: float = 1e-12, exclude_inf: bool = True) -> list[int]:
    """All states whose value is within ``atol`` of the minimum."""
    v = vf.values
    if exclude_inf and vf.inf_index is not None:
        v = v[: vf.inf_index]
    return np.flatnonzero(v <= np.min(v) + atol).tolist()


# -- boundedness of optimal processes -------------------------------------

def optimal_pairs(dsys: DiscretizedSystem, vf: ValueFunction, y0: int) -> list[tuple[int, int]]:
    """Pairs of an optimal process from ``y0``.

    Discounted: the greedy trajectory up to its first repeat (pre-period and
    one cycle).  Finite horizon: the realized S-step sequence.
    """
    if vf.kind == "discounted":
        pairs, _ = trajectory_cycle(dsys, y0, greedy_policy(dsys, vf))
        return pairs
    s, out = int(y0), []
    for u in vf.optimal_controls(dsys, y0):
        out.append((s, u))
        s = int(dsys.next_state[s, u])
    return out


def a1_point(dsys: DiscretizedSystem, vf: ValueFunction) -> dict:
    """Boundedness diagnostics of the optimal process started at the argmin state."""
    y0, vmin = min_over_states(vf)
    pairs = optimal_pairs(dsys, vf, y0)
    norms = dsys.norms()
    inf = dsys.inf
    states = {s for s, _ in pairs} | {int(dsys.next_state[s, u]) for s, u in pairs}
    touches = inf is not None and inf in states
    finite = [s for s in states if s != inf]
    radius = float(max(norms[s] for s in finite)) if finite else float("nan")
    on_face = False
    if dsys.grid is not None and finite:
        lo, hi = np.array(dsys.grid.lower), np.array(dsys.grid.upper)
        pts = dsys.coords[finite]
        on_face = bool(np.any(np.isclose(pts, hi)) or np.any(np.isclose(pts, lo)))
    return {"kind": vf.kind, "param": vf.param, "argmin": y0, "min_value": vmin,
            "radius": radius, "touches_inf": bool(touches), "on_box_face": on_face}


@dataclass
class A1Report:
    points: list
    verdict: str

    @property
    def radius(self) -> float:
        return max(p["radius"] for p in self.points)


def check_A1(dsys: DiscretizedSystem, alphas=(), Ss=(), tol: float = 1e-8) -> A1Report:
    """Run optimal processes over the schedules and check they stay off INF."""
    points = [a1_point(dsys, value_iteration(dsys, a, tol)) for a in alphas]
    points += [a1_point(dsys, finite_horizon(dsys, S)) for S in Ss]
    ok = points and not any(p["touches_inf"] for p in points) and np.all(np.isfinite([p["radius"] for p in points]))
    return A1Report(points, "A1-consistent" if ok else "A1-violated")
