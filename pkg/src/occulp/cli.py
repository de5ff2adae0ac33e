"""Command-line front end: ``occulp --config run.json [--output DIR] [--experiment NAME]``.

Exit codes: 0 success, 1 experiment failure, 2 config failure.  Every
failure writes ``diagnostic.json`` to the output directory when one is known.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import dp, io, limits, lp, measures
from .discretize import GridSpec, NoAdmissiblePairs, build
from .system import CATALOG, ConstraintViolation, make_cost, make_system, simulate

EXPERIMENTS = ("simulate", "value-iter", "finite-horizon", "solve-lp", "sweep-abel", "sweep-cesaro",
               "sweep-truncated", "verify")


class ConfigError(ValueError):
    pass


@dataclass
class SystemSpec:
    name: str
    parameters: dict = field(default_factory=dict)


@dataclass
class GridConfig:
    lower: list
    upper: list
    steps_per_dim: list


@dataclass
class CostSpec:
    name: str = "constant"
    parameters: dict = field(default_factory=dict)
    truncation: float | None = None
    at_inf: object = "sup"


@dataclass
class BasisSpec:
    kind: str = "indicator"
    count: int = 5
    width: float | None = None


@dataclass
class Schedules:
    alphas: list = field(default_factory=list)
    Ss: list = field(default_factory=list)
    Ms: list = field(default_factory=list)


@dataclass
class Tolerances:
    vi_tol: float = 1e-8
    lp_tol: float = 1e-9


@dataclass
class RunConfig:
    system: SystemSpec
    grid: GridConfig
    experiment: str
    cost: CostSpec = field(default_factory=CostSpec)
    basis: BasisSpec = field(default_factory=BasisSpec)
    schedules: Schedules = field(default_factory=Schedules)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_dir: str = "occulp-out"
    y0: list | None = None
    policy: dict | None = None
    horizon: int | None = None


# -- parsing ---------------------------------------------------------------

def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _keys(doc, path, required, optional):
    if not isinstance(doc, dict):
        raise ConfigError(f"{path or '<root>'}: expected an object")
    for k in doc:
        if k not in required and k not in optional:
            raise ConfigError(f"{path + '.' if path else ''}{k}: unknown key")
    for k in required:
        if k not in doc:
            raise ConfigError(f"{path + '.' if path else ''}{k}: missing required key")


def _num_list(v, path, integer=False):
    if not isinstance(v, list) or not all(_is_num(x) for x in v):
        raise ConfigError(f"{path}: expected a list of numbers")
    if integer:
        if not all(isinstance(x, int) for x in v):
            raise ConfigError(f"{path}: expected integers")
        return [int(x) for x in v]
    return [float(x) for x in v]


def _parse_doc(doc) -> RunConfig:
    _keys(doc, "", ["system", "grid", "experiment"],
          ["cost", "basis", "schedules", "tolerances", "output_dir", "y0", "policy", "horizon"])

    s = doc["system"]
    _keys(s, "system", ["name"], ["parameters"])
    if s["name"] not in CATALOG:
        raise ConfigError(f"system.name: unknown system {s['name']!r}")
    params = s.get("parameters", {})
    if not isinstance(params, dict):
        raise ConfigError("system.parameters: expected an object")
    for k in params:
        if k not in CATALOG[s["name"]].parameters:
            raise ConfigError(f"system.parameters.{k}: unknown key")
    system = SystemSpec(s["name"], dict(params))

    g = doc["grid"]
    _keys(g, "grid", ["lower", "upper", "steps_per_dim"], [])
    grid = GridConfig(_num_list(g["lower"], "grid.lower"), _num_list(g["upper"], "grid.upper"),
                      _num_list(g["steps_per_dim"], "grid.steps_per_dim", integer=True))
    try:
        GridSpec(grid.lower, grid.upper, grid.steps_per_dim)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from None

    c = doc.get("cost", {})
    _keys(c, "cost", [], ["name", "parameters", "truncation", "at_inf"])
    cost = CostSpec(c.get("name", "constant"), dict(c.get("parameters", {})), c.get("truncation"),
                    c.get("at_inf", "sup"))
    try:
        make_cost(cost.name, cost.parameters)
    except KeyError as exc:
        raise ConfigError(f"cost.name: {exc.args[0]}") from None
    except TypeError as exc:
        raise ConfigError(f"cost.parameters: {exc}") from None
    if cost.truncation is not None:
        if not _is_num(cost.truncation) or cost.truncation <= 0:
            raise ConfigError("cost.truncation: must be a positive number")
        cost.truncation = float(cost.truncation)
    if not (_is_num(cost.at_inf) or cost.at_inf in ("sup", "truncation")):
        raise ConfigError("cost.at_inf: expected a number, 'sup' or 'truncation'")
    if _is_num(cost.at_inf):
        cost.at_inf = float(cost.at_inf)

    b = doc.get("basis", {})
    _keys(b, "basis", [], ["kind", "count", "width"])
    basis = BasisSpec(b.get("kind", "indicator"), b.get("count", 5), b.get("width"))
    if basis.kind not in ("indicator", "smooth"):
        raise ConfigError("basis.kind: expected 'indicator' or 'smooth'")
    if not isinstance(basis.count, int) or isinstance(basis.count, bool) or basis.count < 0:
        raise ConfigError("basis.count: expected a nonnegative integer")
    if basis.width is not None:
        if not _is_num(basis.width) or basis.width <= 0:
            raise ConfigError("basis.width: expected a positive number")
        basis.width = float(basis.width)

    sc = doc.get("schedules", {})
    _keys(sc, "schedules", [], ["alphas", "Ss", "Ms"])
    schedules = Schedules(_num_list(sc.get("alphas", []), "schedules.alphas"),
                          _num_list(sc.get("Ss", []), "schedules.Ss", integer=True),
                          _num_list(sc.get("Ms", []), "schedules.Ms"))

    t = doc.get("tolerances", {})
    _keys(t, "tolerances", [], ["vi_tol", "lp_tol"])
    tolerances = Tolerances(t.get("vi_tol", 1e-8), t.get("lp_tol", 1e-9))
    for name in ("vi_tol", "lp_tol"):
        v = getattr(tolerances, name)
        if not _is_num(v) or not v > 0:
            raise ConfigError(f"tolerances.{name}: must be a positive number")
        setattr(tolerances, name, float(v))

    out = doc.get("output_dir", "occulp-out")
    if not isinstance(out, str):
        raise ConfigError("output_dir: expected a string")
    y0 = doc.get("y0")
    if y0 is not None:
        y0 = _num_list(y0, "y0")
    policy = doc.get("policy")
    if policy is not None:
        _keys(policy, "policy", ["constant"], [])
        if not isinstance(policy["constant"], int) or isinstance(policy["constant"], bool):
            raise ConfigError("policy.constant: expected a control index")
        policy = {"constant": int(policy["constant"])}
    horizon = doc.get("horizon")
    if horizon is not None and (not isinstance(horizon, int) or isinstance(horizon, bool) or horizon < 1):
        raise ConfigError("horizon: expected a positive integer")

    cfg = RunConfig(system, grid, doc["experiment"], cost, basis, schedules, tolerances, out, y0, policy,
                    horizon)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    """Check experiment-specific requirements and schedule values."""
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {cfg.experiment!r}")
    for a in cfg.schedules.alphas:
        if not 0.0 < a < 1.0:
            raise ConfigError(f"schedules.alphas: alpha must lie in (0,1), got {a}")
    for S in cfg.schedules.Ss:
        if S <= 0:
            raise ConfigError(f"schedules.Ss: S must be a positive integer, got {S}")
    for M in cfg.schedules.Ms:
        if M <= 0:
            raise ConfigError(f"schedules.Ms: M must be positive, got {M}")
    if cfg.schedules.Ms and any(b <= a for a, b in zip(cfg.schedules.Ms, cfg.schedules.Ms[1:])):
        raise ConfigError("schedules.Ms: must be increasing")
    need = {"value-iter": ["alphas"], "sweep-abel": ["alphas"], "verify": ["alphas"],
            "finite-horizon": ["Ss"], "sweep-cesaro": ["Ss"], "sweep-truncated": ["alphas", "Ss", "Ms"]}
    for key in need.get(cfg.experiment, []):
        if not getattr(cfg.schedules, key):
            raise ConfigError(f"schedules.{key}: required for experiment {cfg.experiment!r}")
    if cfg.experiment == "simulate":
        for key in ("y0", "policy", "horizon"):
            if getattr(cfg, key) is None:
                raise ConfigError(f"{key}: required for experiment 'simulate'")
    if cfg.y0 is not None and len(cfg.y0) != len(cfg.grid.lower):
        raise ConfigError("y0: dimension does not match the grid")


def parse_config(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<root>: malformed JSON ({exc})") from None
    return _parse_doc(doc)


def emit(cfg: RunConfig) -> str:
    return json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n"


# -- running ---------------------------------------------------------------

def _model(cfg: RunConfig):
    return make_system(cfg.system.name, cfg.system.parameters, (cfg.cost.name, cfg.cost.parameters))


def _dsys(cfg: RunConfig, truncation=None):
    grid = GridSpec(cfg.grid.lower, cfg.grid.upper, cfg.grid.steps_per_dim)
    trunc = truncation if truncation is not None else cfg.cost.truncation
    at_inf = cfg.cost.at_inf
    if at_inf == "sup" and truncation is not None:
        at_inf = "truncation"
    return build(_model(cfg), grid, cost_at_inf=at_inf, truncation=trunc)


def _basis(cfg: RunConfig, dsys):
    if cfg.basis.kind == "indicator":
        return lp.indicator_basis(dsys)
    return lp.smooth_basis(dsys, cfg.basis.count, cfg.basis.width)


def _state_index(dsys, y):
    d = np.linalg.norm(dsys.coords - np.asarray(y, float), axis=1)
    i = int(np.argmin(d))
    if d[i] > 1e-9:
        raise ValueError(f"y0={list(y)} is not a grid state")
    return i


def _tag(x):
    return io.fmt(x).replace("-", "m")


def _run_simulate(cfg, out):
    model = _model(cfg)
    k = cfg.policy["constant"]
    traj = simulate(model, cfg.y0, lambda y: k, cfg.horizon)
    rows = [[t] + y.tolist() + [u] for t, (y, u) in enumerate(traj)]
    io.write_rows(out / "trajectory.csv", ["t"] + io.coord_header(model.state_dim) + ["control"], rows)
    return {"steps": len(rows)}


def _run_value_iter(cfg, out):
    dsys = _dsys(cfg)
    res = {}
    for a in cfg.schedules.alphas:
        vf = dp.value_iteration(dsys, a, cfg.tolerances.vi_tol)
        io.write_values_csv(out / f"values_alpha_{_tag(a)}.csv", vf, dsys)
        res[io.fmt(a)] = {"min": dp.min_over_states(vf), "residual": vf.residual, "iterations": vf.iterations}
    return res


def _run_finite_horizon(cfg, out):
    dsys = _dsys(cfg)
    res = {}
    for S in cfg.schedules.Ss:
        vf = dp.finite_horizon(dsys, S)
        io.write_values_csv(out / f"values_S_{S}.csv", vf, dsys)
        res[str(S)] = {"min": dp.min_over_states(vf)}
    return res


def _solution_doc(sol, dsys):
    return {"status": sol.status, "objective": sol.objective, "residual": sol.residual,
            "certificate": sol.certificate, "inf_mass": sol.inf_mass, "message": sol.message,
            "profile": lp.infinity_mass_profile(sol, dsys, _radii(dsys))}


def _radii(dsys):
    r = dsys.norms()
    r = r[np.isfinite(r)]
    return sorted({float(np.quantile(r, q)) for q in (0.25, 0.5, 0.75)})


def _run_solve_lp(cfg, out):
    dsys = _dsys(cfg)
    basis = _basis(cfg, dsys)
    tol = cfg.tolerances.lp_tol
    prog = lp.build_average_lp(dsys, basis, compactified=False)
    (out / "w_lp.txt").write_text(lp.export_text(prog), encoding="utf-8")
    sol = lp.solve(prog, tol)
    io.write_measure_csv(out / "w_lp_measure.csv", sol.weights, dsys)
    doc = {"restricted": _solution_doc(sol, dsys)}
    csol = lp.solve(lp.build_average_lp(dsys, basis, compactified=True), tol)
    io.write_measure_csv(out / "w_lp_compactified_measure.csv", csol.weights, dsys)
    doc["compactified"] = _solution_doc(csol, dsys)
    if csol.inf_mass > 0:
        doc["compactified"]["cost_at_inf_rule"] = dsys.cost_at_inf_rule
    if cfg.y0 is not None:
        y0 = _state_index(dsys, cfg.y0)
        for a in cfg.schedules.alphas:
            dsol = lp.solve(lp.build_discounted_lp(dsys, basis, a, y0), tol)
            io.write_measure_csv(out / f"discounted_lp_alpha_{_tag(a)}.csv", dsol.weights, dsys)
            doc[f"discounted alpha={io.fmt(a)}"] = _solution_doc(dsol, dsys)
    io.write_json(out / "w_lp.json", doc)
    return {"objective": sol.objective, "status": sol.status}


def _run_sweep(cfg, out, kind):
    dsys = _dsys(cfg)
    basis = _basis(cfg, dsys)
    tol, lp_tol = cfg.tolerances.vi_tol, cfg.tolerances.lp_tol
    if kind == "abel":
        rep = limits.abel_sweep(dsys, basis, cfg.schedules.alphas, tol, lp_tol)
    else:
        rep = limits.cesaro_sweep(dsys, basis, cfg.schedules.Ss, tol, lp_tol)
    io.write_sweep(out / f"sweep_{kind}", rep, dsys)
    return {"g_star": rep.g_star, "gaps": rep.gaps, "verdict": rep.verdict}


def _run_sweep_truncated(cfg, out):
    model = _model(cfg)
    grid = GridSpec(cfg.grid.lower, cfg.grid.upper, cfg.grid.steps_per_dim)
    basis = (lambda d: _basis(cfg, d))
    rep = limits.truncated_sweep(model, grid, basis, cfg.schedules.Ms, cfg.schedules.alphas,
                                 cfg.schedules.Ss, cfg.tolerances.vi_tol, cfg.tolerances.lp_tol)
    dsys = _dsys(cfg, truncation=cfg.schedules.Ms[0])
    for M, ra, rc in zip(rep.levels, rep.abel, rep.cesaro):
        io.write_sweep(out / f"sweep_abel_M_{_tag(M)}", ra, dsys)
        io.write_sweep(out / f"sweep_cesaro_M_{_tag(M)}", rc, dsys)
    io.write_json(out / "truncated.json", rep.summary())
    return {"stabilized": rep.stabilized}


def _run_verify(cfg, out):
    dsys = _dsys(cfg)
    basis = lp.indicator_basis(dsys)
    phis = basis.on(dsys)
    states = [_state_index(dsys, cfg.y0)] if cfg.y0 is not None else list(range(dsys.n_states - 1))
    checks = []
    tol = max(1e-6, 10 * (cfg.tolerances.vi_tol + cfg.tolerances.lp_tol))
    for a in cfg.schedules.alphas:
        vf = dp.value_iteration(dsys, a, cfg.tolerances.vi_tol)
        pol = dp.greedy_policy(dsys, vf)
        for y0 in states:
            r = lp.verify_eq_res1(dsys, basis, a, y0, tol, vf=vf)
            checks.append({"check": "lp-equals-vi", **r})
            mu = measures.discounted_measure(dsys, y0, pol, a)
            res = max(abs(measures.constraint_residual(mu, dsys, phi)) for phi in phis)
            checks.append({"check": "residual", "alpha": a, "y0": y0, "value": res, "passed": res <= 1e-9})
            norm = abs(mu.total - 1.0)
            checks.append({"check": "normalization", "alpha": a, "y0": y0, "value": norm, "passed": norm <= 1e-12})
    ok = all(c["passed"] for c in checks)
    io.write_json(out / "verify.json", {"passed": ok, "checks": checks})
    if not ok:
        raise ExperimentFailed("verification failed; see verify.json")
    return {"passed": ok, "checks": len(checks)}


class ExperimentFailed(RuntimeError):
    pass


RUNNERS = {
    "simulate": _run_simulate,
    "value-iter": _run_value_iter,
    "finite-horizon": _run_finite_horizon,
    "solve-lp": _run_solve_lp,
    "sweep-abel": lambda cfg, out: _run_sweep(cfg, out, "abel"),
    "sweep-cesaro": lambda cfg, out: _run_sweep(cfg, out, "cesaro"),
    "sweep-truncated": _run_sweep_truncated,
    "verify": _run_verify,
}


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Run one experiment; returns ``(exit_code, summary)``."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        summary = RUNNERS[cfg.experiment](cfg, out)
    except (NoAdmissiblePairs, ExperimentFailed, ConstraintViolation, ValueError, RuntimeError) as exc:
        diag = {"status": "experiment-error", "experiment": cfg.experiment,
                "error": f"{type(exc).__name__}: {exc}"}
        io.write_json(out / "diagnostic.json", diag)
        return 1, diag
    return 0, summary


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="occulp", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--output", help="output directory (overrides output_dir)")
    ap.add_argument("--experiment", choices=EXPERIMENTS, help="override the configured experiment")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
        doc = json.loads(text)
        if isinstance(doc, dict) and args.experiment:
            doc["experiment"] = args.experiment
        cfg = _parse_doc(doc)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        msg = f"{type(exc).__name__}: {exc}"
        if args.output:
            io.write_json(Path(args.output) / "diagnostic.json", {"status": "config-error", "error": msg})
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        cfg.output_dir = args.output

    code, summary = run(cfg)
    if code and not args.quiet:
        print(f"experiment failed: {summary['error']}", file=sys.stderr)
    elif not args.quiet:
        print(json.dumps(io._jsonable(summary), sort_keys=True, default=str))
    return code


if __name__ == "__main__":
    sys.exit(main())
