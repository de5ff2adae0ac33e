"""Finite linear programs over occupational-measure weights.

Variables are the weights gamma(s,u) >= 0 of the available pairs of a
DiscretizedSystem.  Each test function phi of a basis contributes one
equality row, and a final row enforces sum gamma = 1:

    discounted:  sum_p gamma_p [alpha(phi(f(p)) - phi(s_p)) + (1-alpha)(phi(y0) - phi(s_p))] = 0
    average:     sum_p gamma_p [phi(f(p)) - phi(s_p)] = 0

With the per-state indicator basis these are the classical flow-balance LPs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .discretize import DiscretizedSystem, restrict_to_G


@dataclass(frozen=True, eq=False)
class TestFunctionBasis:
    """Functions on grid states (``values[k, s]``) with declared values at INF."""

    __test__ = False  # not a pytest class

    name: str
    values: np.ndarray
    inf_values: np.ndarray

    def __len__(self):
        return len(self.values)

    def on(self, dsys: DiscretizedSystem) -> np.ndarray:
        """Basis values over every state of ``dsys`` (INF column appended if present)."""
        n = dsys.n_states - (1 if dsys.has_inf else 0)
        if self.values.shape[1] != n:
            raise ValueError("basis was built for a different state set")
        if dsys.has_inf:
            return np.hstack([self.values, self.inf_values[:, None]])
        return self.values


def _grid_states(dsys):
    return dsys.coords


def indicator_basis(dsys: DiscretizedSystem) -> TestFunctionBasis:
    n = len(_grid_states(dsys))
    return TestFunctionBasis("indicator", np.eye(n), np.zeros(n))


def _far_sign(dsys, j):
    # declared limit of y_j/(1+|y|) at INF: sign of the farther box face
    y = dsys.coords[:, j]
    lo, hi = float(y.min()), float(y.max())
    return 1.0 if abs(hi) >= abs(lo) else -1.0


def _bump_centers(dsys, count):
    y = dsys.coords
    lo, hi = y.min(axis=0), y.max(axis=0)
    return [lo + (k + 0.5) / count * (hi - lo) for k in range(count)]


def smooth_basis(dsys: DiscretizedSystem, count: int = 5, width: float | None = None) -> TestFunctionBasis:
    """Constant, mapped coordinates y_j/(1+|y|), radial |y|/(1+|y|) and Gaussian bumps."""
    y = dsys.coords
    r = np.linalg.norm(y, axis=1)
    rows, at_inf = [np.ones(len(y))], [1.0]
    for j in range(y.shape[1]):
        rows.append(y[:, j] / (1.0 + r))
        at_inf.append(_far_sign(dsys, j))
    rows.append(r / (1.0 + r))
    at_inf.append(1.0)
    if count > 0:
        span = float(np.max(y.max(axis=0) - y.min(axis=0))) or 1.0
        w = width if width is not None else span / count
        for c in _bump_centers(dsys, count):
            rows.append(np.exp(-np.sum((y - c) ** 2, axis=1) / (2 * w * w)))
            at_inf.append(0.0)
    return TestFunctionBasis(f"smooth({count})", np.array(rows), np.array(at_inf))


def standard_probes(dsys: DiscretizedSystem, bumps: int = 5) -> tuple[list[str], list[np.ndarray]]:
    """Bounded probe integrands on pairs: smooth basis functions plus control indicators.

    For a 1-D system with two controls this gives 10 probes.  Control
    indicators are declared 0 at INF.
    """
    basis = smooth_basis(dsys, bumps)
    phis = basis.on(dsys)
    K = dsys.n_controls
    names = ["const"] + [f"y{j}/(1+|y|)" for j in range(dsys.state_dim)] + ["|y|/(1+|y|)"]
    names += [f"bump{k}" for k in range(bumps)]
    probes = [np.repeat(phi[:, None], K, axis=1) for phi in phis]
    for k in range(K):
        q = np.zeros((dsys.n_states, K))
        q[:, k] = 1.0
        if dsys.has_inf:
            q[-1] = 0.0
        probes.append(q)
        names.append(f"u=={k}")
    return names, probes


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """min c.x  s.t.  A x = b, x >= 0, one variable per (state, control) pair."""

    pairs: np.ndarray
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    row_names: tuple
    kind: str
    alpha: float | None = None
    y0: int | None = None
    inf_state: int | None = None

    @property
    def n_rows(self) -> int:
        return len(self.b)


@dataclass
class LPSolution:
    pairs: np.ndarray
    x: np.ndarray | None
    objective: float
    residual: float
    certificate: float
    inf_mass: float
    status: str  # optimal | infeasible | unbounded | stalled
    message: str = ""

    @property
    def weights(self) -> dict:
        if self.x is None:
            return {}
        return {(int(s), int(u)): float(w) for (s, u), w in zip(self.pairs, self.x) if w > 0}


def _pairs_array(dsys):
    return np.array(dsys.pairs(), dtype=int).reshape(-1, 2)


def build_discounted_lp(dsys: DiscretizedSystem, basis: TestFunctionBasis, alpha: float, y0: int
                        ) -> LinearProgram:
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0,1)")
    if dsys.is_inf(y0):
        raise ValueError("y0 must be a grid state, not INF")
    phi = basis.on(dsys)
    pairs = _pairs_array(dsys)
    s, u = pairs[:, 0], pairs[:, 1]
    nxt = dsys.next_state[s, u]
    rows = alpha * (phi[:, nxt] - phi[:, s]) + (1.0 - alpha) * (phi[:, [y0]] - phi[:, s])
    A = np.vstack([rows, np.ones(len(pairs))])
    b = np.zeros(len(A))
    b[-1] = 1.0
    names = tuple(f"{basis.name}[{k}]" for k in range(len(basis))) + ("normalization",)
    return LinearProgram(pairs, dsys.cost[s, u].copy(), A, b, names, "discounted",
                         float(alpha), int(y0), dsys.inf)


def build_average_lp(dsys: DiscretizedSystem, basis: TestFunctionBasis, compactified: bool = False
                     ) -> LinearProgram:
    """Stationarity LP over G (``compactified=False``) or over G with INF."""
    if compactified:
        if not dsys.has_inf:
            raise ValueError("compactified LP needs a system with an INF node")
        sys_ = dsys
    else:
        sys_ = restrict_to_G(dsys)
    phi = basis.on(sys_)
    pairs = _pairs_array(sys_)
    s, u = pairs[:, 0], pairs[:, 1]
    rows = phi[:, sys_.next_state[s, u]] - phi[:, s]
    A = np.vstack([rows, np.ones(len(pairs))])
    b = np.zeros(len(A))
    b[-1] = 1.0
    names = tuple(f"{basis.name}[{k}]" for k in range(len(basis))) + ("normalization",)
    return LinearProgram(pairs, sys_.cost[s, u].copy(), A, b, names,
                         "average-compactified" if compactified else "average", inf_state=sys_.inf)


_STATUS = {0: "optimal", 1: "stalled", 2: "infeasible", 3: "unbounded", 4: "stalled"}


def solve(lp: LinearProgram, tol: float = 1e-9, max_iter: int | None = None) -> LPSolution:
    """Solve with the HiGHS dual simplex and certify with the returned duals.

    ``certificate`` is the larger of the duality gap and the worst negative
    reduced cost.
    """
    options = {"primal_feasibility_tolerance": max(tol * 0.1, 1e-10),
               "dual_feasibility_tolerance": max(tol * 0.1, 1e-10),
               "presolve": True}
    if max_iter is not None:
        options["maxiter"] = int(max_iter)
    res = linprog(lp.c, A_eq=lp.A, b_eq=lp.b, bounds=(0, None), method="highs-ds", options=options)
    status = _STATUS.get(res.status, "stalled")
    if res.x is None:
        return LPSolution(lp.pairs, None, float("nan"), float("nan"), float("nan"), float("nan"),
                          status, res.message)

    x = np.maximum(res.x, 0.0)
    objective = float(lp.c @ x)
    residual = float(np.max(np.abs(lp.A @ x - lp.b)))
    certificate = float("nan")
    if res.eqlin is not None and res.eqlin.marginals is not None:
        y = res.eqlin.marginals
        reduced = lp.c - lp.A.T @ y
        certificate = max(abs(objective - float(lp.b @ y)), max(0.0, -float(reduced.min())))
    inf_mass = 0.0
    if lp.inf_state is not None:
        inf_mass = float(x[lp.pairs[:, 0] == lp.inf_state].sum())
    message = res.message
    if status == "optimal" and not (residual <= tol and certificate <= tol):
        status = "stalled"
        message = f"solver tolerance not met: residual {residual:.3g}, certificate {certificate:.3g}"
    return LPSolution(lp.pairs, x, objective, residual, certificate, inf_mass, status, message)


def verify_eq_res1(dsys: DiscretizedSystem, basis: TestFunctionBasis, alpha: float, y0: int,
                   tol: float = 1e-6, vi_tol: float = 1e-10, vf=None) -> dict:
    """Compare the discounted-LP optimum at y0 with the value-iteration value."""
    from .dp import value_iteration

    sol = solve(build_discounted_lp(dsys, basis, alpha, y0))
    if vf is None:
        vf = value_iteration(dsys, alpha, vi_tol)
    diff = abs(sol.objective - float(vf.values[y0]))
    return {"alpha": alpha, "y0": int(y0), "lp_value": sol.objective, "vi_value": float(vf.values[y0]),
            "diff": diff, "lp_status": sol.status, "passed": bool(sol.status == "optimal" and diff <= tol)}


def infinity_mass_profile(sol: LPSolution, dsys: DiscretizedSystem, radii) -> dict:
    """Mass outside each radius (INF counts as outside every radius) and mass at INF."""
    norms = dsys.norms()
    if sol.x is None:
        return {"radii": list(radii), "tail_mass": [float("nan")] * len(radii), "inf_mass": float("nan")}
    r = norms[sol.pairs[:, 0]]
    tail = [float(sol.x[r > rad].sum()) for rad in radii]
    return {"radii": [float(x) for x in radii], "tail_mass": tail, "inf_mass": sol.inf_mass,
            "supported_on_G": bool(sol.inf_mass <= 0.0)}


def export_text(lp: LinearProgram) -> str:
    """Plain-text standard form: min c.x s.t. A x = b, x >= 0."""
    from .io import fmt

    names = [f"({s},{u})" for s, u in lp.pairs]
    lines = [f"# kind={lp.kind} alpha={lp.alpha} y0={lp.y0}",
             "# minimize c.x subject to A x = b, x >= 0",
             "variables " + " ".join(names),
             "objective " + " ".join(fmt(v) for v in lp.c)]
    for name, row, rhs in zip(lp.row_names, lp.A, lp.b):
        lines.append(f"row {name} " + " ".join(fmt(v) for v in row) + f" = {fmt(rhs)}")
    return "\n".join(lines) + "\n"
