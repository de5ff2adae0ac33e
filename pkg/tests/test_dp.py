import numpy as np
import pytest

from oracles import enumerate_discounted, enumerate_finite_horizon, policy_discounted_values
from occulp import dp
from occulp.discretize import GridSpec, build, from_tables, random_system
from occulp.measures import discounted_measure, integrate, open_loop_averaging_measure
from occulp.system import make_system

GRID = GridSpec([0.0], [10.0], [10])


def drift(cost, **kw):
    return build(make_system("drift", cost=cost), GRID, **kw)


@pytest.mark.parametrize("alpha", [0.3, 0.9, 0.999])
def test_constant_cost(alpha):
    d = drift(("constant", {"value": 2.5}))
    vf = dp.value_iteration(d, alpha, 1e-10)
    assert np.allclose(vf.values, 2.5, atol=1e-10)


@pytest.mark.parametrize("alpha", [0.5, 0.9, 0.99])
def test_drift_example_matches_enumeration(alpha):
    d = drift(("bump", {"center": 2.0}), cost_at_inf=1.0)
    vf = dp.value_iteration(d, alpha, 1e-10)
    oracle = enumerate_discounted(d, alpha)
    assert np.max(np.abs(vf.values - oracle)) <= 1e-10
    assert vf.values[5] == pytest.approx(0.9, abs=1e-10)
    assert dp.min_over_states(vf) == (2, 0.0)


def test_contraction_and_residual():
    d = drift(("bump", {"center": 2.0}))
    for alpha in (0.5, 0.9, 0.99):
        vf = dp.value_iteration(d, alpha, 1e-9)
        norms = vf.update_norms
        assert np.all(norms[1:] <= alpha * norms[:-1] + 1e-15)
        assert vf.residual <= 1e-9


def test_nonconvergence_is_reported():
    d = random_system(5, 2, 3)
    with pytest.raises(dp.ConvergenceError):
        dp.value_iteration(d, 0.999, 1e-12, max_iter=10)


def test_finite_horizon_constant_and_drift():
    d = drift(("constant", {"value": 3.0}))
    assert np.allclose(dp.finite_horizon(d, 7).values, 3.0)
    d = drift(("bump", {"center": 2.0}))
    for S in (1, 5, 50):
        assert dp.min_over_states(dp.finite_horizon(d, S)) == (2, 0.0)


def test_single_step_average():
    d = from_tables([[0, 1], [1, 0]], [[0.4, 0.1], [2.0, 3.0]])
    assert dp.finite_horizon(d, 1).values.tolist() == [0.1, 2.0]


@pytest.mark.parametrize("seed", range(5))
def test_finite_horizon_matches_sequence_enumeration(seed):
    d = random_system(4, 2, seed)
    for S in (1, 3, 6):
        assert np.allclose(dp.finite_horizon(d, S).values, enumerate_finite_horizon(d, S), atol=1e-14)


def test_greedy_policy_drift():
    d = drift(("bump", {"center": 2.0}), cost_at_inf=1.0)
    for alpha in (0.5, 0.9, 0.99):
        vf = dp.value_iteration(d, alpha, 1e-10)
        pol = dp.greedy_policy(d, vf)
        assert pol[:11].tolist() == [1, 1] + [0] * 9
        # the greedy policy is optimal: its exact value matches the enumeration oracle
        assert np.allclose(policy_discounted_values(d, pol, alpha), enumerate_discounted(d, alpha), atol=1e-12)


def test_greedy_policy_ties_and_fixed_point(fixed_point):
    d = drift(("constant", {"value": 1.0}))
    assert np.all(dp.greedy_policy(d, dp.value_iteration(d, 0.9)) == 0)
    pol = dp.greedy_policy(fixed_point, dp.value_iteration(fixed_point, 0.9))
    assert np.all(pol[:-1] == 1)


def test_min_over_states_examples():
    d = drift(("constant", {"value": 1.5}))
    assert dp.min_over_states(dp.value_iteration(d, 0.9, 1e-12)) == (0, pytest.approx(1.5, abs=1e-12))
    vf = dp.ValueFunction(np.array([0.3, 0.4, 0.9, 0.1]), "discounted", 0.9, inf_index=3)
    assert dp.min_over_states(vf) == (0, 0.3)
    assert dp.min_over_states(vf, exclude_inf=False) == (3, 0.1)
    assert dp.tie_cluster(dp.ValueFunction(np.array([1.0, 1.0, 2.0]), "discounted", 0.9)) == [0, 1]


def test_policy_evaluation_consistency():
    rng = np.random.default_rng(11)
    for _ in range(10):
        d = random_system(int(rng.integers(3, 8)), int(rng.integers(2, 4)), rng)
        alpha = float(rng.choice([0.5, 0.9, 0.99]))
        vf = dp.value_iteration(d, alpha, 1e-11)
        pol = dp.greedy_policy(d, vf)
        for y0 in range(d.n_states):
            mu = discounted_measure(d, y0, pol, alpha)
            assert integrate(mu, d.cost) == pytest.approx(vf.values[y0], abs=1e-8)


def test_finite_horizon_consistency():
    rng = np.random.default_rng(12)
    for _ in range(10):
        d = random_system(int(rng.integers(3, 8)), int(rng.integers(2, 4)), rng)
        S = int(rng.integers(1, 40))
        vf = dp.finite_horizon(d, S)
        for y0 in range(d.n_states):
            mu = open_loop_averaging_measure(d, y0, vf.optimal_controls(d, y0))
            assert abs(integrate(mu, d.cost) - vf.values[y0]) <= 1e-12


def test_dead_states_get_infinite_value():
    # state 2 has no control; state 1 can only move to 2
    d = from_tables([[0, 1], [2, 2], [0, 0]], [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                    available=[[True, True], [True, False], [False, False]])
    vf = dp.value_iteration(d, 0.9, 1e-10)
    assert np.isinf(vf.values[1]) and np.isinf(vf.values[2])
    assert vf.values[0] == pytest.approx(1.0, abs=1e-10)


def test_check_A1_drift_parks_at_minimum():
    d = drift(("bump", {"center": 2.0}))
    rep = dp.check_A1(d, [0.9, 0.99], [10, 100])
    assert rep.verdict == "A1-consistent"
    assert rep.radius == 2.0
    assert not any(p["touches_inf"] for p in rep.points)


def test_check_A1_escaping_optimum():
    # decreasing cost with g at INF equal to its limit 0: escaping is optimal
    d = drift(("reciprocal", None), cost_at_inf=0.0)
    rep = dp.check_A1(d, [0.9, 0.99], [10, 100])
    assert rep.verdict == "A1-violated"
    assert all(p["touches_inf"] for p in rep.points)


def test_check_A1_fixed_point(fixed_point):
    assert dp.check_A1(fixed_point, [0.9], [5]).verdict == "A1-consistent"


def test_truncation_identity():
    model = make_system("drift", cost=("quadratic", {"center": 2.0}))
    base = build(model, GRID)
    for alpha in (0.9, 0.99):
        v = dp.min_over_states(dp.value_iteration(base, alpha, 1e-10))
        for M in (0.5, 1.0, 10.0, 100.0):
            vm = dp.min_over_states(dp.value_iteration(build(model, GRID, truncation=M), alpha, 1e-10))
            assert vm == v == (2, 0.0)
