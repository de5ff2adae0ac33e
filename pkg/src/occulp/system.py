"""Controlled dynamical systems y(t+1) = f(y(t), u(t)) with state constraint y in Y.

Systems are built from a small catalog of parametrized builders (``drift``,
``linear``, ``fixed-point``) combined with a cost from the cost catalog.
Controls are a finite list U0; ``control_set(y)`` returns the indices of the
controls admissible at ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class ConstraintViolation(RuntimeError):
    """A rollout left the state constraint set."""

    def __init__(self, t, state):
        self.t = t
        self.state = np.asarray(state)
        super().__init__(f"state constraint violated at t={t}: y={self.state.tolist()}")


def as_state(y) -> np.ndarray:
    return np.atleast_1d(np.asarray(y, dtype=float))


@dataclass(frozen=True, eq=False)
class SystemModel:
    """A deterministic controlled system with finitely many controls.

    ``dynamics`` and ``cost`` receive the state vector and the control *value*
    (a row of ``controls``); ``control_set`` returns admissible control
    *indices*.  ``bounds`` is ``None`` for an unbounded state set, otherwise a
    ``(lower, upper)`` box containing Y.
    """

    name: str
    state_dim: int
    controls: np.ndarray
    dynamics: Callable[[np.ndarray, np.ndarray], np.ndarray]
    control_set: Callable[[np.ndarray], list]
    state_constraint: Callable[[np.ndarray], bool]
    cost: Callable[[np.ndarray, np.ndarray], float]
    cost_lower_bound: float
    bounds: tuple | None = None
    parameters: dict = field(default_factory=dict)

    @property
    def unbounded(self) -> bool:
        return self.bounds is None

    @property
    def n_controls(self) -> int:
        return len(self.controls)

    def f(self, y, u: int) -> np.ndarray:
        return as_state(self.dynamics(as_state(y), self.controls[u]))

    def g(self, y, u: int) -> float:
        return float(self.cost(as_state(y), self.controls[u]))

    def check_invariants(self, points) -> list[str]:
        """Return a list of problems found at the sampled states (empty if none)."""
        problems = []
        for y in points:
            y = as_state(y)
            if not self.state_constraint(y):
                continue
            us = self.control_set(y)
            if len(us) == 0:
                problems.append(f"no admissible control at y={y.tolist()}")
            for u in us:
                if self.g(y, u) < self.cost_lower_bound:
                    problems.append(f"cost below declared bound at y={y.tolist()}, u={u}")
        return problems


def step(model: SystemModel, y, u: int) -> np.ndarray:
    y = as_state(y)
    if u not in model.control_set(y):
        raise ValueError(f"control {u} not admissible at y={y.tolist()}")
    return model.f(y, u)


def simulate(model: SystemModel, y0, policy, horizon: int) -> list[tuple[np.ndarray, int]]:
    """Roll out ``policy`` (state -> control index) for ``horizon`` steps.

    Returns ``[(y(0), u(0)), ..., (y(h-1), u(h-1))]``.  Every pair must stay in
    G, i.e. y(t+1) must satisfy the state constraint too.
    """
    if horizon < 1:
        raise ValueError("horizon must be positive")
    y = as_state(y0)
    if not model.state_constraint(y):
        raise ConstraintViolation(0, y)
    traj = []
    for t in range(horizon):
        u = int(policy(y))
        y_next = step(model, y, u)
        traj.append((y, u))
        if not model.state_constraint(y_next):
            raise ConstraintViolation(t + 1, y_next)
        y = y_next
    return traj


@dataclass
class CoercivityReport:
    radii: list
    minima: list
    verdict: str
    witness: dict | None = None


def _sphere_samples(dim: int, r: float, n: int) -> np.ndarray:
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    if dim == 1 or n <= 0:
        return r * axes
    rng = np.random.default_rng(0)
    d = rng.standard_normal((n, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return r * np.vstack([axes, d])


def check_infinity_coercivity(model: SystemModel, radii: Sequence[float],
                              samples_per_radius: int = 16,
                              box_radius: float = 0.0) -> CoercivityReport:
    """Sample |f(y,u)| on spheres |y| = r and check that it grows with r.

    Only radii beyond ``box_radius`` take part in the verdict.  The check is
    empirical: "consistent" means the sampled minima are strictly increasing.
    """
    if not model.unbounded:
        raise ValueError("coercivity check needs a model with unbounded state set")
    radii = [float(r) for r in radii]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be nonempty and increasing")

    minima, argmins = [], []
    for r in radii:
        best, arg = np.inf, None
        for y in _sphere_samples(model.state_dim, r, samples_per_radius):
            if not model.state_constraint(y):
                continue
            for u in model.control_set(y):
                v = float(np.linalg.norm(model.f(y, u)))
                if v < best:
                    best, arg = v, (y, u)
        minima.append(best if arg is not None else float("nan"))
        argmins.append(arg)

    considered = [i for i, r in enumerate(radii) if r > box_radius and np.isfinite(minima[i])]
    for i, j in zip(considered, considered[1:]):
        if not minima[j] > minima[i]:
            y, u = argmins[j]
            witness = {"radius": radii[j], "state": y.tolist(), "control": int(u),
                       "norm_image": minima[j], "previous_min": minima[i]}
            return CoercivityReport(radii, minima, "violated", witness)
    return CoercivityReport(radii, minima, "consistent")


# -- cost catalog ----------------------------------------------------------

def _cost_constant(value=1.0):
    value = float(value)
    return (lambda y, u: value), value


def _cost_bump(center=2.0):
    # 1 - 1/(1+|y-c|^2): bounded, strict minimum 0 at c
    c = np.atleast_1d(np.asarray(center, dtype=float))

    def g(y, u):
        d = y - c
        return 1.0 - 1.0 / (1.0 + float(d @ d))
    return g, 0.0


def _cost_quadratic(center=2.0):
    c = np.atleast_1d(np.asarray(center, dtype=float))

    def g(y, u):
        d = y - c
        return float(d @ d)
    return g, 0.0


def _cost_reciprocal():
    def g(y, u):
        return 1.0 / (1.0 + float(np.linalg.norm(y)))
    return g, 0.0


def _cost_control(weights=(0.0, 1.0)):
    # g(y,u) = weights[index of u]; needs integer-valued scalar controls
    w = [float(x) for x in weights]

    def g(y, u):
        return w[int(round(float(np.ravel(u)[0])))]
    return g, min(w)


COSTS = {
    "constant": _cost_constant,
    "bump": _cost_bump,
    "quadratic": _cost_quadratic,
    "reciprocal": _cost_reciprocal,
    "control": _cost_control,
}


def make_cost(name: str, parameters: dict | None = None):
    """Return ``(g, lower_bound)`` for a catalog cost."""
    if name not in COSTS:
        raise KeyError(f"unknown cost {name!r}; known: {sorted(COSTS)}")
    return COSTS[name](**(parameters or {}))


# -- system catalog --------------------------------------------------------

def _control_array(controls) -> np.ndarray:
    arr = np.asarray(controls, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def _build_drift(cost, controls=(0.0, 1.0)):
    U = _control_array(controls)
    g, lb = cost
    return SystemModel(
        name="drift", state_dim=1, controls=U,
        dynamics=lambda y, u: y + u,
        control_set=lambda y: list(range(len(U))),
        state_constraint=lambda y: bool(y[0] >= 0.0),
        cost=g, cost_lower_bound=lb, bounds=None,
        parameters={"controls": U[:, 0].tolist()},
    )


def _build_linear(cost, A=((0.5,),), B=((1.0,),), controls=(0.0, 1.0)):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    U = _control_array(controls)
    if A.shape[0] != A.shape[1] or B.shape[0] != A.shape[0] or B.shape[1] != U.shape[1]:
        raise ValueError("incompatible shapes for A, B and controls")
    g, lb = cost
    return SystemModel(
        name="linear", state_dim=A.shape[0], controls=U,
        dynamics=lambda y, u: A @ y + B @ u,
        control_set=lambda y: list(range(len(U))),
        state_constraint=lambda y: True,
        cost=g, cost_lower_bound=lb, bounds=None,
        parameters={"A": A.tolist(), "B": B.tolist(), "controls": U.tolist()},
    )


def _build_fixed_point(cost, dim=1, n_controls=2):
    dim, n_controls = int(dim), int(n_controls)
    U = np.arange(n_controls, dtype=float)[:, None]
    g, lb = cost
    return SystemModel(
        name="fixed-point", state_dim=dim, controls=U,
        dynamics=lambda y, u: y.copy(),
        control_set=lambda y: list(range(n_controls)),
        state_constraint=lambda y: True,
        cost=g, cost_lower_bound=lb, bounds=None,
        parameters={"dim": dim, "n_controls": n_controls},
    )


@dataclass(frozen=True)
class SystemCatalogEntry:
    name: str
    parameters: dict
    builder: Callable


CATALOG = {
    "drift": SystemCatalogEntry("drift", {"controls": [0.0, 1.0]}, _build_drift),
    "linear": SystemCatalogEntry("linear", {"A": [[0.5]], "B": [[1.0]], "controls": [0.0, 1.0]},
                                 _build_linear),
    "fixed-point": SystemCatalogEntry("fixed-point", {"dim": 1, "n_controls": 2}, _build_fixed_point),
}


def make_system(name: str, parameters: dict | None = None, cost=("constant", None)) -> SystemModel:
    """Instantiate a catalog system.

    ``cost`` is either a catalog ``(name, parameters)`` pair or an explicit
    ``(callable, lower_bound)`` pair.
    """
    if name not in CATALOG:
        raise KeyError(f"unknown system {name!r}; known: {sorted(CATALOG)}")
    entry = CATALOG[name]
    params = dict(entry.parameters)
    unknown = set(parameters or {}) - set(params)
    if unknown:
        raise KeyError(f"unknown parameters for {name!r}: {sorted(unknown)}")
    params.update(parameters or {})
    if callable(cost[0]):
        cost_pair = (cost[0], float(cost[1]))
    else:
        cost_pair = make_cost(cost[0], cost[1])
    return entry.builder(cost_pair, **params)
