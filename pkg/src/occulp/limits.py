"""Abel (alpha -> 1) and Cesaro (S -> infinity) sweeps against the stationary LP optimum.

The sweeps tabulate min_y V_alpha(y) and min_y V(S, y) over a schedule and
compare each against g*, the optimum of the stationarity LP over G.  They
report evidence of convergence; they do not prove a limit.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dp
from .discretize import DiscretizedSystem, GridSpec, build, restrict_to_G
from .lp import (LPSolution, build_average_lp, build_discounted_lp, indicator_basis, solve,
                 standard_probes)
from .measures import integrate
from .system import SystemModel


def _workers(n: int) -> int:
    cap = os.environ.get("OCCULP_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(n, limit))


def _map(func, items):
    items = list(items)
    if _workers(len(items)) == 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=_workers(len(items))) as pool:
        return list(pool.map(func, items))


def _verdict(gaps, slack=1e-12) -> str:
    tail = list(gaps)[-3:]
    if not tail or any(not math.isfinite(g) for g in tail):
        return "non-converging"
    ok = all(b <= a + slack for a, b in zip(tail, tail[1:]))
    return "converging" if ok else "non-converging"


@dataclass
class SweepReport:
    kind: str  # "abel" or "cesaro"
    schedule: list
    points: list
    g_star: float
    g_star_status: str
    verdict: str
    hypotheses: str
    vi_tol: float
    lp_tol: float
    compactified: dict = field(default_factory=dict)
    cost_at_inf_rule: str | None = None

    @property
    def gaps(self) -> list:
        return [p["gap"] for p in self.points]

    @property
    def min_values(self) -> list:
        return [p["min_value"] for p in self.points]

    def summary(self) -> dict:
        doc = {"kind": self.kind, "schedule": self.schedule, "g_star": self.g_star,
               "g_star_status": self.g_star_status, "verdict": self.verdict,
               "hypotheses": self.hypotheses, "tolerances": {"vi_tol": self.vi_tol, "lp_tol": self.lp_tol},
               "gaps": self.gaps, "min_values": self.min_values,
               "ties": [p.get("ties") for p in self.points],
               "errors": [p.get("error") for p in self.points], "compactified": self.compactified}
        if self.compactified.get("inf_mass", 0.0) > 0.0 or any(p.get("touches_inf") for p in self.points):
            doc["cost_at_inf_rule"] = self.cost_at_inf_rule
        return doc


def g_star(dsys: DiscretizedSystem, basis=None, lp_tol: float = 1e-9) -> LPSolution:
    """Optimum of the stationarity LP over G (INF and pairs leading to it removed)."""
    basis = basis if basis is not None else indicator_basis(dsys)
    return solve(build_average_lp(dsys, basis, compactified=False), lp_tol)


def _compactified_info(dsys, basis, lp_tol) -> dict:
    if not dsys.has_inf:
        return {}
    sol = solve(build_average_lp(dsys, basis, compactified=True), lp_tol)
    return {"objective": sol.objective, "inf_mass": sol.inf_mass, "status": sol.status}


def _sweep(kind, dsys, basis, schedule, tol, lp_tol, solver) -> SweepReport:
    basis = basis if basis is not None else indicator_basis(dsys)
    gs = g_star(dsys, basis, lp_tol)
    gval = gs.objective if gs.status == "optimal" else float("nan")

    def point(v):
        try:
            vf = solver(v)
            a1 = dp.a1_point(dsys, vf)
            return {"value": v, "min_value": a1["min_value"], "argmin": a1["argmin"],
                    "gap": abs(a1["min_value"] - gval), "a1_radius": a1["radius"],
                    "touches_inf": a1["touches_inf"], "on_box_face": a1["on_box_face"],
                    "ties": len(dp.tie_cluster(vf, 1e-12)), "error": None}
        except Exception as exc:  # one failed point must not abort the sweep
            return {"value": v, "min_value": float("nan"), "argmin": None, "gap": float("nan"),
                    "a1_radius": float("nan"), "touches_inf": False, "on_box_face": False,
                    "ties": 0, "error": f"{type(exc).__name__}: {exc}"}

    points = _map(point, schedule)
    inside = all(p["error"] is None and not p["touches_inf"] for p in points)
    return SweepReport(kind, list(schedule), points, gval, gs.status, _verdict([p["gap"] for p in points]),
                       "within theorem hypotheses" if inside else "outside theorem hypotheses",
                       tol, lp_tol, _compactified_info(dsys, basis, lp_tol), dsys.cost_at_inf_rule)


def abel_sweep(dsys: DiscretizedSystem, basis=None, alphas=(0.9, 0.99, 0.999), tol: float = 1e-8,
               lp_tol: float = 1e-9) -> SweepReport:
    alphas = [float(a) for a in alphas]
    if not alphas or any(not 0.0 < a < 1.0 for a in alphas):
        raise ValueError("alphas must be a nonempty list in (0,1)")
    return _sweep("abel", dsys, basis, alphas, tol, lp_tol, lambda a: dp.value_iteration(dsys, a, tol))


def cesaro_sweep(dsys: DiscretizedSystem, basis=None, Ss=(10, 100, 1000), tol: float = 1e-8,
                 lp_tol: float = 1e-9) -> SweepReport:
    Ss = [int(S) for S in Ss]
    if not Ss or any(S < 1 for S in Ss):
        raise ValueError("Ss must be a nonempty list of positive integers")
    return _sweep("cesaro", dsys, basis, Ss, tol, lp_tol, lambda S: dp.finite_horizon(dsys, S))


@dataclass
class TruncationReport:
    levels: list
    abel: list
    cesaro: list
    g_star: list
    a2: list
    stabilized: bool

    def summary(self) -> dict:
        return {"levels": self.levels, "stabilized": self.stabilized, "g_star": self.g_star,
                "abel_min_values": [r.min_values for r in self.abel],
                "cesaro_min_values": [r.min_values for r in self.cesaro],
                "a2": self.a2}


def truncated_sweep(model: SystemModel, grid: GridSpec, basis=None, M_schedule=(1.0, 10.0, 100.0),
                    alphas=(0.9, 0.99, 0.999), Ss=(10, 100, 1000), tol: float = 1e-8,
                    lp_tol: float = 1e-9, stab_tol: float = 1e-9) -> TruncationReport:
    """Run both sweeps on g^M = min(g, M), with INF costed at M, for each level M.

    ``basis`` may be a TestFunctionBasis, a callable ``dsys -> basis`` or
    None (indicators).  ``stabilized`` is set when the last two levels give
    the same min-values to ``stab_tol``.
    """
    levels = [float(M) for M in M_schedule]
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("M_schedule must be nonempty and increasing")
    abel, cesaro, gstars, a2 = [], [], [], []
    for M in levels:
        dsys = build(model, grid, cost_at_inf="truncation", truncation=M)
        b = basis(dsys) if callable(basis) else basis
        ra = abel_sweep(dsys, b, alphas, tol, lp_tol)
        rc = cesaro_sweep(dsys, b, Ss, tol, lp_tol)
        pts = ra.points + rc.points
        ok = all(p["error"] is None and not p["touches_inf"] for p in pts)
        a2.append({"M": M, "radius": max(p["a1_radius"] for p in pts),
                   "touches_inf": any(p["touches_inf"] for p in pts),
                   "verdict": "A2-consistent" if ok else "A2-violated"})
        abel.append(ra)
        cesaro.append(rc)
        gstars.append(ra.g_star)

    stabilized = False
    if len(levels) >= 2:
        va = np.array(abel[-1].min_values + cesaro[-1].min_values)
        vb = np.array(abel[-2].min_values + cesaro[-2].min_values)
        stabilized = bool(np.all(np.abs(va - vb) <= stab_tol))
    return TruncationReport(levels, abel, cesaro, gstars, a2, stabilized)


def moment_distance(mu1, mu2, probes) -> float:
    """max over probes q of |int q dmu1 - int q dmu2|."""
    return max(abs(integrate(mu1, q) - integrate(mu2, q)) for q in probes)


def abel_lp_measure(dsys: DiscretizedSystem, basis, alpha: float, lp_tol: float = 1e-9) -> LPSolution:
    """Discounted-LP optimum minimized also over the initial state (over G).

    This is the LP side of min_y V_alpha(y); near-ties go to the lowest y0.
    """
    sys_ = restrict_to_G(dsys)
    best, best_val = None, math.inf
    for y0 in range(sys_.n_states):
        if not sys_.available[y0].any():
            continue
        sol = solve(build_discounted_lp(sys_, basis, alpha, y0), lp_tol)
        if sol.status == "optimal" and sol.objective < best_val - lp_tol:
            best, best_val = sol, sol.objective
    if best is None:
        raise RuntimeError("no initial state gives a feasible discounted LP")
    return best


def decompactification_profile(dsys: DiscretizedSystem, basis=None, alphas=(0.9, 0.99, 0.999),
                               y0: int | None = None, lp_tol: float = 1e-9) -> dict:
    """Moment distances between discounted-LP optima and the stationary-LP optimum.

    With ``y0=None`` the discounted optimum is also minimized over initial
    states; otherwise it is the LP at the fixed ``y0``.
    """
    basis = basis if basis is not None else indicator_basis(dsys)
    probe_names, probes = standard_probes(restrict_to_G(dsys))
    w_sol = g_star(dsys, basis, lp_tol)
    dists = []
    for a in alphas:
        if y0 is None:
            sol = abel_lp_measure(dsys, basis, a, lp_tol)
        else:
            sol = solve(build_discounted_lp(restrict_to_G(dsys), basis, a, y0), lp_tol)
        dists.append(moment_distance(sol, w_sol, probes))
    monotone = all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
    return {"alphas": list(alphas), "distances": dists, "monotone": monotone,
            "probes": probe_names, "w_objective": w_sol.objective, "y0": y0}
