"""Discounted and averaging occupational measures of deterministic processes.

Weights live on (state index, control index) pairs and are stored sparsely.
Discounted measures are exact: a stationary policy on a finite state set
produces an eventually periodic trajectory, so the geometric tail is summed
in closed form over the cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .discretize import DiscretizedSystem


@dataclass(frozen=True)
class OccupationalMeasure:
    weights: dict
    kind: str  # "discounted" or "averaging"
    param: float  # alpha or S
    origin: int
    exact: bool = True
    tail_tol: float = 0.0
    counts: dict | None = field(default=None, compare=False)

    @property
    def alpha(self) -> float:
        if self.kind != "discounted":
            raise AttributeError("averaging measure has no discount factor")
        return self.param

    @property
    def total(self) -> float:
        return math.fsum(self.weights.values())

    def dense(self, n_states: int, n_controls: int) -> np.ndarray:
        out = np.zeros((n_states, n_controls))
        for (s, u), w in self.weights.items():
            out[s, u] += w
        return out

    def mass(self, where) -> float:
        """Total weight of pairs with ``where(s, u)`` true.

        Averaging measures sum integer visit counts first, so the result is
        exactly count/S.
        """
        if self.counts is not None:
            return sum(c for p, c in self.counts.items() if where(*p)) / int(self.param)
        return math.fsum(w for p, w in self.weights.items() if where(*p))


def as_policy(policy):
    """Normalize a policy given as callable, mapping or sequence to a callable."""
    if callable(policy):
        return policy
    if isinstance(policy, dict):
        return policy.__getitem__
    table = np.asarray(policy, dtype=int)
    return lambda s: int(table[s])


def _step(dsys: DiscretizedSystem, s: int, u: int) -> int:
    if not (0 <= u < dsys.n_controls) or not dsys.available[s, u]:
        raise ValueError(f"policy control {u} is not admissible at state {s}")
    return int(dsys.next_state[s, u])


def trajectory_cycle(dsys: DiscretizedSystem, y0: int, policy) -> tuple[list, int]:
    """Pairs visited before the first repeat, and the index where the cycle starts."""
    pi = as_policy(policy)
    first_seen = {}
    pairs = []
    s = int(y0)
    while s not in first_seen:
        first_seen[s] = len(pairs)
        u = int(pi(s))
        pairs.append((s, u))
        s = _step(dsys, s, u)
    return pairs, first_seen[s]


def discounted_measure(dsys: DiscretizedSystem, y0: int, policy, alpha: float,
                       exact: bool = True, eps: float = 1e-15) -> OccupationalMeasure:
    """gamma(Q) = (1-alpha) sum_t alpha^t 1_Q(y(t), u(t)) for a stationary policy.

    With ``exact=False`` the series is cut at T = ceil(log eps / log alpha)
    and renormalized; that path is kept as an independent check.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0,1)")
    if not exact:
        return _truncated_discounted(dsys, y0, policy, alpha, eps)
    pairs, start = trajectory_cycle(dsys, y0, policy)
    c = len(pairs) - start
    one_minus_ac = -math.expm1(c * math.log(alpha))
    weights = {}
    for t, p in enumerate(pairs):
        w = (1.0 - alpha) * alpha ** t
        if t >= start:
            w /= one_minus_ac
        weights[p] = weights.get(p, 0.0) + w
    return OccupationalMeasure(dict(sorted(weights.items())), "discounted", float(alpha), int(y0))


def _truncated_discounted(dsys, y0, policy, alpha, eps):
    pi = as_policy(policy)
    T = int(math.ceil(math.log(eps) / math.log(alpha)))
    weights = {}
    s = int(y0)
    for t in range(T):
        u = int(pi(s))
        weights[(s, u)] = weights.get((s, u), 0.0) + (1.0 - alpha) * alpha ** t
        s = _step(dsys, s, u)
    z = math.fsum(weights.values())
    weights = {p: w / z for p, w in sorted(weights.items())}
    return OccupationalMeasure(weights, "discounted", float(alpha), int(y0), exact=False, tail_tol=eps)


def _averaging_from_pairs(pairs, S, y0):
    counts = {}
    for p in pairs:
        counts[p] = counts.get(p, 0) + 1
    counts = dict(sorted(counts.items()))
    weights = {p: k / S for p, k in counts.items()}
    return OccupationalMeasure(weights, "averaging", S, int(y0), counts=counts)


def averaging_measure(dsys: DiscretizedSystem, y0: int, policy, S: int) -> OccupationalMeasure:
    """gamma(Q) = (1/S) sum_{t<S} 1_Q(y(t), u(t)) for a stationary policy."""
    S = int(S)
    if S < 1:
        raise ValueError("S must be a positive integer")
    pi = as_policy(policy)
    pairs = []
    s = int(y0)
    for _ in range(S):
        u = int(pi(s))
        pairs.append((s, u))
        s = _step(dsys, s, u)
    return _averaging_from_pairs(pairs, S, y0)


def open_loop_averaging_measure(dsys: DiscretizedSystem, y0: int, controls) -> OccupationalMeasure:
    """Averaging measure of an open-loop control sequence u(0..S-1)."""
    controls = [int(u) for u in controls]
    if not controls:
        raise ValueError("empty control sequence")
    pairs = []
    s = int(y0)
    for u in controls:
        pairs.append((s, u))
        s = _step(dsys, s, u)
    return _averaging_from_pairs(pairs, len(controls), y0)


def integrate(mu, q) -> float:
    """Weighted sum of ``q`` over the support of ``mu``.

    ``q`` is a callable ``(s, u) -> float`` or an array indexed ``[s, u]``.
    """
    weights = mu.weights
    if callable(q):
        return math.fsum(w * float(q(s, u)) for (s, u), w in weights.items())
    q = np.asarray(q)
    return math.fsum(w * float(q[s, u]) for (s, u), w in weights.items())


def constraint_residual(mu, dsys: DiscretizedSystem, phi, mode=None) -> float:
    """Value of the linear constraint integral for test function ``phi``.

    ``mode`` is ``"stationary"`` (integrand phi(f) - phi) or
    ``("discounted", alpha, y0)`` (integrand alpha(phi(f) - phi) +
    (1-alpha)(phi(y0) - phi)).  Defaults to the measure's own kind.
    """
    if mode is None:
        mode = ("discounted", mu.param, mu.origin) if mu.kind == "discounted" else "stationary"
    phi = np.array([phi(s) for s in range(dsys.n_states)]) if callable(phi) else np.asarray(phi, float)
    terms = []
    if mode == "stationary":
        for (s, u), w in mu.weights.items():
            terms.append(w * (phi[dsys.next_state[s, u]] - phi[s]))
    else:
        _, alpha, y0 = mode
        for (s, u), w in mu.weights.items():
            d = alpha * (phi[dsys.next_state[s, u]] - phi[s]) + (1 - alpha) * (phi[y0] - phi[s])
            terms.append(w * d)
    return math.fsum(terms)
