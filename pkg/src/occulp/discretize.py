"""Finite state-control systems on a grid, with an absorbing node at infinity.

A grid image that leaves the box or the state constraint is sent to the
extra node INF (always the last state index).  INF loops to itself under
every control, which is the discrete picture of the one-point
compactification: escaping trajectories are visible as mass at INF.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .system import SystemModel


class NoAdmissiblePairs(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid; ``steps_per_dim[j]`` intervals (so steps+1 points) per axis."""

    lower: tuple
    upper: tuple
    steps_per_dim: tuple

    def __post_init__(self):
        lo = tuple(float(x) for x in np.atleast_1d(self.lower))
        hi = tuple(float(x) for x in np.atleast_1d(self.upper))
        st = tuple(int(x) for x in np.atleast_1d(self.steps_per_dim))
        if not (len(lo) == len(hi) == len(st)):
            raise ValueError("lower, upper and steps_per_dim must have equal length")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("grid needs lower < upper componentwise")
        if any(s < 1 for s in st):
            raise ValueError("steps_per_dim must be positive")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "steps_per_dim", st)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def spacing(self) -> np.ndarray:
        return (np.array(self.upper) - np.array(self.lower)) / np.array(self.steps_per_dim)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(a, b, s + 1) for a, b, s in zip(self.lower, self.upper, self.steps_per_dim)]

    def points(self) -> np.ndarray:
        """All grid points in C (lexicographic) order."""
        return np.array(list(itertools.product(*self.axes())), dtype=float).reshape(-1, self.dim)

    def nearest(self, z: np.ndarray) -> int | None:
        """Flat index of the nearest grid point, ties to the lower index; None outside the box."""
        lo, hi, h = np.array(self.lower), np.array(self.upper), self.spacing
        slack = 1e-9 * h
        if np.any(z < lo - slack) or np.any(z > hi + slack):
            return None
        t = (z - lo) / h
        idx = np.clip(np.ceil(t - 0.5), 0, np.array(self.steps_per_dim)).astype(int)
        return int(np.ravel_multi_index(tuple(idx), tuple(s + 1 for s in self.steps_per_dim)))


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscretizedSystem:
    """Finite deterministic system.

    Arrays are indexed ``[state, control]`` over all states, INF included
    when ``has_inf``.  Unavailable controls carry ``next_state == -1`` and a
    NaN cost.
    """

    coords: np.ndarray
    controls: np.ndarray
    available: np.ndarray
    next_state: np.ndarray
    cost: np.ndarray
    has_inf: bool = False
    cost_at_inf: float | None = None
    cost_at_inf_rule: str | None = None
    grid: GridSpec | None = None

    def __post_init__(self):
        for name in ("coords", "controls", "available", "next_state", "cost"):
            object.__setattr__(self, name, _freeze(getattr(self, name)))

    @property
    def n_states(self) -> int:
        """Number of states including INF."""
        return self.available.shape[0]

    @property
    def n_controls(self) -> int:
        return self.available.shape[1]

    @property
    def inf(self) -> int | None:
        return self.n_states - 1 if self.has_inf else None

    @property
    def state_dim(self) -> int:
        return self.coords.shape[1]

    def is_inf(self, s: int) -> bool:
        return self.has_inf and s == self.n_states - 1

    def controls_of(self, s: int) -> list[int]:
        return np.flatnonzero(self.available[s]).tolist()

    def next(self, s: int, u: int) -> int:
        if not self.available[s, u]:
            raise ValueError(f"control {u} not available at state {s}")
        return int(self.next_state[s, u])

    def cost_of(self, s: int, u: int) -> float:
        if not self.available[s, u]:
            raise ValueError(f"control {u} not available at state {s}")
        return float(self.cost[s, u])

    def pairs(self) -> list[tuple[int, int]]:
        """All available (state, control) pairs, INF pairs included."""
        return [tuple(p) for p in np.argwhere(self.available).tolist()]

    @property
    def admissible_pairs(self) -> list[tuple[int, int]]:
        """The finite analogue of G: pairs at grid states whose image is a grid state."""
        inf = self.inf
        return [(s, u) for s, u in self.pairs() if s != inf and self.next_state[s, u] != inf]

    def norms(self) -> np.ndarray:
        """Euclidean norm of each state; INF gets +inf."""
        r = np.linalg.norm(self.coords, axis=1)
        return np.append(r, np.inf) if self.has_inf else r

    def state_label(self, s: int) -> list:
        return ["inf"] * self.state_dim if self.is_inf(s) else self.coords[s].tolist()

    def with_cost(self, cost: np.ndarray, cost_at_inf: float | None = None, rule: str | None = None):
        cost = np.where(self.available, cost, np.nan)
        if self.has_inf:
            cost[-1] = cost_at_inf
        return DiscretizedSystem(self.coords, self.controls, self.available, self.next_state, cost,
                                 self.has_inf, cost_at_inf if self.has_inf else None,
                                 rule if self.has_inf else None, self.grid)


def build(model: SystemModel, grid: GridSpec, cost_at_inf="sup", truncation: float | None = None
          ) -> DiscretizedSystem:
    """Snap ``model`` onto ``grid`` and append the absorbing INF node.

    ``cost_at_inf`` is an explicit number, ``"sup"`` (largest cost over grid
    pairs) or ``"truncation"`` (the level ``truncation``).  With
    ``truncation=M`` every cost is capped at M.
    """
    if grid.dim != model.state_dim:
        raise ValueError("grid dimension does not match the model")
    pts = grid.points()
    keep = np.array([bool(model.state_constraint(y)) for y in pts])
    flat_to_state = np.full(len(pts), -1)
    flat_to_state[keep] = np.arange(keep.sum())
    coords = pts[keep]
    n, K = len(coords), model.n_controls
    if n == 0:
        raise NoAdmissiblePairs("no grid point satisfies the state constraint")
    inf = n

    available = np.zeros((n + 1, K), dtype=bool)
    nxt = np.full((n + 1, K), -1, dtype=int)
    cost = np.full((n + 1, K), np.nan)
    for s, y in enumerate(coords):
        us = model.control_set(y)
        if len(us) == 0:
            raise ValueError(f"model is not viable at grid state {y.tolist()}")
        for u in us:
            z = model.f(y, u)
            t = inf
            if model.state_constraint(z):
                k = grid.nearest(z)
                if k is not None and flat_to_state[k] >= 0:
                    t = int(flat_to_state[k])
            available[s, u] = True
            nxt[s, u] = t
            cost[s, u] = model.g(y, u)

    if truncation is not None:
        cost[:n] = np.minimum(cost[:n], float(truncation))
    if cost_at_inf is None:
        cost_at_inf = "truncation" if truncation is not None else "sup"
    if cost_at_inf == "sup":
        c_inf, rule = float(np.nanmax(cost[:n])), "sup"
    elif cost_at_inf == "truncation":
        if truncation is None:
            raise ValueError("cost_at_inf='truncation' requires a truncation level")
        c_inf, rule = float(truncation), f"truncation M={float(truncation):g}"
    else:
        c_inf, rule = float(cost_at_inf), f"explicit {float(cost_at_inf):g}"
    available[inf] = True
    nxt[inf] = inf
    cost[inf] = c_inf

    dsys = DiscretizedSystem(coords, model.controls, available, nxt, cost, True, c_inf, rule, grid)
    if not dsys.admissible_pairs:
        raise NoAdmissiblePairs("no admissible pairs: every grid image leaves the grid")
    return dsys


def restrict_to_G(dsys: DiscretizedSystem) -> DiscretizedSystem:
    """Drop INF and every pair that leads to it."""
    if not dsys.has_inf:
        return dsys
    n = dsys.n_states - 1
    available = dsys.available[:n] & (dsys.next_state[:n] != n)
    if not available.any():
        raise NoAdmissiblePairs("no admissible pairs remain after removing INF")
    nxt = np.where(available, dsys.next_state[:n], -1)
    cost = np.where(available, dsys.cost[:n], np.nan)
    return DiscretizedSystem(dsys.coords, dsys.controls, available, nxt, cost, False, None, None, dsys.grid)


def from_tables(next_state, cost, coords=None, available=None) -> DiscretizedSystem:
    """A system without INF from explicit ``[state, control]`` tables."""
    nxt = np.asarray(next_state, dtype=int)
    cost = np.asarray(cost, dtype=float)
    n, K = nxt.shape
    if available is None:
        available = np.ones((n, K), dtype=bool)
    available = np.asarray(available, dtype=bool)
    if coords is None:
        coords = np.arange(n, dtype=float)[:, None]
    coords = np.asarray(coords, dtype=float).reshape(n, -1)
    if np.any((nxt[available] < 0) | (nxt[available] >= n)):
        raise ValueError("next_state entries must index states")
    nxt = np.where(available, nxt, -1)
    cost = np.where(available, cost, np.nan)
    return DiscretizedSystem(coords, np.arange(K, dtype=float)[:, None], available, nxt, cost)


def random_system(n_states: int, n_controls: int, rng) -> DiscretizedSystem:
    """Random deterministic system with uniform transitions and costs in [0, 1)."""
    rng = np.random.default_rng(rng)
    nxt = rng.integers(0, n_states, size=(n_states, n_controls))
    cost = rng.random((n_states, n_controls))
    return from_tables(nxt, cost)
