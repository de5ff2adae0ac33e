import dataclasses

import numpy as np
import pytest

from oracles import enumerate_discounted, policies, policy_discounted_values
from occulp import dp, lp
from occulp.discretize import GridSpec, build, from_tables, random_system, restrict_to_G
from occulp.lp import (LPSolution, build_average_lp, build_discounted_lp, indicator_basis,
                       infinity_mass_profile, smooth_basis, solve, verify_eq_res1)
from occulp.measures import discounted_measure, integrate
from occulp.system import make_system


def measure_vector(lp_, mu):
    index = {tuple(p): i for i, p in enumerate(lp_.pairs.tolist())}
    x = np.zeros(len(index))
    for p, w in mu.weights.items():
        x[index[p]] = w
    return x


def test_fixed_point_lp_is_min_over_controls(fixed_point):
    B = indicator_basis(fixed_point)
    for alpha in (0.2, 0.9):
        sol = solve(build_discounted_lp(fixed_point, B, alpha, 2))
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(0.5, abs=1e-12)
        assert all(s == 2 for s, _ in sol.weights)


def test_drift_discounted_lp_matches_greedy_measure(drift_bump):
    B = indicator_basis(drift_bump)
    sol = solve(build_discounted_lp(drift_bump, B, 0.5, 0))
    vf = dp.value_iteration(drift_bump, 0.5, 1e-12)
    mu = discounted_measure(drift_bump, 0, dp.greedy_policy(drift_bump, vf), 0.5)
    assert mu.weights == pytest.approx({(0, 1): 0.5, (1, 1): 0.25, (2, 0): 0.25}, abs=1e-15)
    assert sol.weights.keys() == mu.weights.keys()
    for p, w in mu.weights.items():
        assert sol.weights[p] == pytest.approx(w, abs=1e-12)


def test_constant_cost_any_basis(drift_bump):
    d = build(make_system("drift", cost=("constant", {"value": 0.7})), GridSpec([0.0], [10.0], [10]))
    for B in (indicator_basis(d), smooth_basis(d, 3)):
        assert solve(build_discounted_lp(d, B, 0.9, 4)).objective == pytest.approx(0.7, abs=1e-12)
        assert solve(build_average_lp(d, B)).objective == pytest.approx(0.7, abs=1e-12)


def test_row_count(drift_bump):
    B = smooth_basis(drift_bump, 4)
    assert build_discounted_lp(drift_bump, B, 0.9, 0).n_rows == len(B) + 1
    assert build_average_lp(drift_bump, B).n_rows == len(B) + 1


def test_restricted_average_lp_excludes_moving_control(drift_bump):
    # W = P(Y x {0}): no feasible measure puts mass on u = 1
    prog = build_average_lp(drift_bump, indicator_basis(drift_bump))
    c = -(prog.pairs[:, 1] == 1).astype(float)
    sol = solve(dataclasses.replace(prog, c=c))
    assert sol.status == "optimal" and sol.objective == pytest.approx(0.0, abs=1e-12)
    # and every point mass on (y, 0) is feasible
    for y in range(11):
        x = np.array([1.0 if tuple(p) == (y, 0) else 0.0 for p in prog.pairs.tolist()])
        assert np.max(np.abs(prog.A @ x - prog.b)) == 0.0


def test_compactified_lp_admits_infinity(drift_bump):
    prog = build_average_lp(drift_bump, indicator_basis(drift_bump), compactified=True)
    c = -(prog.pairs[:, 0] == drift_bump.inf).astype(float)
    sol = solve(dataclasses.replace(prog, c=c))
    assert sol.objective == pytest.approx(-1.0, abs=1e-12)
    assert sol.inf_mass == pytest.approx(1.0, abs=1e-12)


def test_two_cycle_feasible_set_is_unique(two_cycle):
    prog = build_average_lp(two_cycle, indicator_basis(two_cycle))
    for sign in (1.0, -1.0):
        sol = solve(dataclasses.replace(prog, c=sign * np.array([1.0, 0.0])))
        assert sol.x == pytest.approx([0.5, 0.5], abs=1e-12)


def test_trivial_lp():
    prog = lp.LinearProgram(np.array([[0, 0]]), np.array([3.0]), np.array([[1.0]]), np.array([1.0]),
                            ("normalization",), "custom")
    sol = solve(prog)
    assert sol.status == "optimal" and sol.objective == 3.0


def test_drift_average_lp_optimum(drift_bump):
    sol = solve(build_average_lp(drift_bump, indicator_basis(drift_bump)))
    assert sol.status == "optimal"
    assert sol.objective == 0.0
    assert sol.weights == {(2, 0): 1.0}
    assert sol.residual <= 1e-9 and sol.certificate <= 1e-9


def test_random_lp_matches_policy_enumeration():
    d = random_system(3, 2, 7)
    B = indicator_basis(d)
    allv = np.array([policy_discounted_values(d, pol, 0.9) for pol in policies(d)])
    assert len(allv) == 8
    for y0 in range(3):
        assert solve(build_discounted_lp(d, B, 0.9, y0)).objective == pytest.approx(allv[:, y0].min(), abs=1e-9)


def test_infeasible_average_lp_is_reported():
    # always moving right: G_h has no cycle, so W is empty
    d = build(make_system("drift", {"controls": [1.0]}), GridSpec([0.0], [5.0], [5]))
    sol = solve(build_average_lp(d, indicator_basis(d)))
    assert sol.status == "infeasible"
    assert sol.x is None


def test_verify_eq_res1(drift_bump, fixed_point):
    r = verify_eq_res1(drift_bump, indicator_basis(drift_bump), 0.9, 5)
    assert r["passed"] and r["diff"] <= 1e-6
    for alpha in (0.3, 0.95):
        r = verify_eq_res1(fixed_point, indicator_basis(fixed_point), alpha, 1)
        assert r["diff"] <= 1e-9 and r["lp_value"] == pytest.approx(0.5, abs=1e-9)
    d = build(make_system("drift", cost=("constant", {"value": 4.0})), GridSpec([0.0], [10.0], [10]))
    r = verify_eq_res1(d, indicator_basis(d), 0.9, 3)
    assert r["lp_value"] == pytest.approx(4.0, abs=1e-9) and r["vi_value"] == pytest.approx(4.0, abs=1e-9)


def _solution(d, weights):
    pairs = np.array(d.pairs())
    x = np.array([weights.get(tuple(p), 0.0) for p in pairs.tolist()])
    inf_mass = float(x[pairs[:, 0] == d.inf].sum())
    return LPSolution(pairs, x, 0.0, 0.0, 0.0, inf_mass, "optimal")


def test_infinity_mass_profile(drift_bump):
    d = drift_bump
    prof = infinity_mass_profile(_solution(d, {(2, 0): 1.0}), d, [5, 10])
    assert prof["tail_mass"] == [0.0, 0.0] and prof["inf_mass"] == 0.0
    prof = infinity_mass_profile(_solution(d, {(d.inf, 0): 1.0}), d, [5, 10])
    assert prof["inf_mass"] == 1.0 and prof["tail_mass"] == [1.0, 1.0]
    prof = infinity_mass_profile(_solution(d, {(2, 0): 0.5, (d.inf, 1): 0.5}), d, [5, 10])
    assert prof["inf_mass"] == 0.5 and not prof["supported_on_G"]


def test_occupational_measures_are_feasible_and_not_better():
    rng = np.random.default_rng(21)
    for _ in range(20):
        d = random_system(int(rng.integers(3, 7)), int(rng.integers(2, 4)), rng)
        alpha = float(rng.uniform(0.1, 0.99))
        y0 = int(rng.integers(d.n_states))
        pol = rng.integers(0, d.n_controls, d.n_states)
        prog = build_discounted_lp(d, indicator_basis(d), alpha, y0)
        mu = discounted_measure(d, y0, pol, alpha)
        x = measure_vector(prog, mu)
        assert np.max(np.abs(prog.A @ x - prog.b)) <= 1e-9
        assert solve(prog).objective <= integrate(mu, d.cost) + 1e-9


def test_basis_monotonicity(drift_bump):
    d = drift_bump
    small = smooth_basis(d, 2)
    ind = indicator_basis(d)
    big = lp.TestFunctionBasis("big", np.vstack([small.values, ind.values]),
                               np.concatenate([small.inf_values, ind.inf_values]))
    for alpha in (0.5, 0.9):
        v_small = solve(build_discounted_lp(d, small, alpha, 6)).objective
        v_big = solve(build_discounted_lp(d, big, alpha, 6)).objective
        assert v_small <= v_big + 1e-9
    assert solve(build_average_lp(d, small)).objective <= solve(build_average_lp(d, big)).objective + 1e-9


def test_compactified_vs_restricted():
    model = make_system("drift", cost=("bump", {"center": 2.0}))
    d = build(model, GridSpec([0.0], [10.0], [10]), cost_at_inf=-0.5)
    B = indicator_basis(d)
    restricted = solve(build_average_lp(d, B))
    comp_prog = build_average_lp(d, B, compactified=True)
    compact = solve(comp_prog)
    assert compact.objective <= restricted.objective + 1e-12
    assert compact.inf_mass == pytest.approx(1.0)
    # forcing zero mass at INF recovers the restricted problem
    at_inf = (comp_prog.pairs[:, 0] == d.inf).astype(float)
    pinned = dataclasses.replace(comp_prog, A=np.vstack([comp_prog.A, at_inf]),
                                 b=np.append(comp_prog.b, 0.0),
                                 row_names=comp_prog.row_names + ("no-inf",))
    assert solve(pinned).objective == pytest.approx(restricted.objective, abs=1e-12)


def test_smooth_basis_declares_inf_values(drift_bump):
    B = smooth_basis(drift_bump, 5)
    assert B.inf_values.tolist() == [1.0, 1.0, 1.0] + [0.0] * 5
    assert np.all(np.isfinite(B.on(drift_bump)))


def test_standard_probes_count(drift_bump):
    names, probes = lp.standard_probes(drift_bump)
    assert len(probes) == 10 and len(names) == 10
    assert all(p.shape == (12, 2) for p in probes)


def test_export_text(two_cycle):
    txt = lp.export_text(build_average_lp(two_cycle, indicator_basis(two_cycle)))
    assert "variables (0,0) (1,0)" in txt
    assert "row normalization 1.0 1.0 = 1.0" in txt
    assert txt.endswith("\n")


def test_solver_is_deterministic(drift_bump):
    prog = build_discounted_lp(drift_bump, smooth_basis(drift_bump, 4), 0.9, 3)
    a, b = solve(prog), solve(prog)
    assert np.array_equal(a.x, b.x)
