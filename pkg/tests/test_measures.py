import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import rollout_discounted
from occulp.discretize import random_system
from occulp.lp import indicator_basis, smooth_basis
from occulp.measures import (averaging_measure, constraint_residual, discounted_measure, integrate,
                             open_loop_averaging_measure)


def test_fixed_point_discounted_is_point_mass(fixed_point):
    mu = discounted_measure(fixed_point, 2, [1] * fixed_point.n_states, 0.7)
    assert mu.weights == {(2, 1): pytest.approx(1.0, abs=1e-15)}
    assert mu.exact


def test_drift_discounted_closed_form(drift_bump):
    d = drift_bump
    mu = discounted_measure(d, 0, [1] * d.n_states, 0.5)
    # grid state 10 is visited at t=10 before the jump to INF
    for t in range(11):
        assert mu.weights[(t, 1)] == pytest.approx(0.5 ** (t + 1), rel=1e-14)
    assert mu.weights[(d.inf, 1)] == pytest.approx(0.5 ** 11, rel=1e-14)
    # oracle: truncated summation
    tr = discounted_measure(d, 0, [1] * d.n_states, 0.5, exact=False)
    assert not tr.exact
    for p, w in mu.weights.items():
        assert tr.weights[p] == pytest.approx(w, abs=1e-14)


def test_two_cycle_discounted(two_cycle):
    mu = discounted_measure(two_cycle, 0, [0, 0], 0.5)
    assert mu.weights[(0, 0)] == pytest.approx(2 / 3, rel=1e-14)
    assert mu.weights[(1, 0)] == pytest.approx(1 / 3, rel=1e-14)


def test_drift_averaging(drift_bump):
    mu = averaging_measure(drift_bump, 0, [1] * drift_bump.n_states, 10)
    assert mu.weights == {(t, 1): 0.1 for t in range(10)}
    assert mu.mass(lambda s, u: s != drift_bump.inf and drift_bump.coords[s, 0] <= 4) == 0.5
    assert integrate(mu, lambda s, u: drift_bump.coords[s, 0]) == pytest.approx(4.5, abs=1e-15)


def test_fixed_point_averaging(fixed_point):
    mu = averaging_measure(fixed_point, 3, [0] * fixed_point.n_states, 7)
    assert mu.weights == {(3, 0): 1.0}


def test_two_cycle_averaging(two_cycle):
    mu = averaging_measure(two_cycle, 0, [0, 0], 4)
    assert mu.weights == {(0, 0): 0.5, (1, 0): 0.5}


def test_open_loop_sequence(drift_bump):
    mu = open_loop_averaging_measure(drift_bump, 0, [1, 1, 0, 0])
    assert mu.weights == {(0, 1): 0.25, (1, 1): 0.25, (2, 0): 0.5}


def test_inadmissible_policy_rejected(two_cycle):
    with pytest.raises(ValueError):
        discounted_measure(two_cycle, 0, [1, 1], 0.5)


def test_integrate_examples(fixed_point, drift_bump):
    mu = discounted_measure(fixed_point, 1, [2] * fixed_point.n_states, 0.3)
    assert integrate(mu, lambda s, u: 4.25) == pytest.approx(4.25, rel=1e-15)
    nu = discounted_measure(drift_bump, 3, [1] * drift_bump.n_states, 0.9)
    support = set(nu.weights)
    assert integrate(nu, lambda s, u: 1.0 if (s, u) in support else 0.0) == pytest.approx(1.0, abs=1e-12)


def test_stationary_residual_fixed_point(fixed_point):
    mu = discounted_measure(fixed_point, 1, [0] * fixed_point.n_states, 0.9)
    rng = np.random.default_rng(3)
    for _ in range(5):
        phi = rng.normal(size=fixed_point.n_states)
        assert constraint_residual(mu, fixed_point, phi, "stationary") == 0.0


def test_two_cycle_stationary_residual(two_cycle):
    rng = np.random.default_rng(4)
    for S in (2, 4, 10):
        mu = averaging_measure(two_cycle, 0, [0, 0], S)
        for _ in range(5):
            assert abs(constraint_residual(mu, two_cycle, rng.normal(size=2), "stationary")) <= 1e-15


def test_escaping_mass_vanishes(drift_bump):
    from occulp.discretize import GridSpec, build
    from occulp.system import make_system
    d = build(make_system("drift"), GridSpec([0.0], [2000.0], [2000]))
    for R in (0, 5, 20):
        masses = [averaging_measure(d, 0, [1] * d.n_states, S).mass(
            lambda s, u: s != d.inf and d.coords[s, 0] <= R) for S in (50, 500, 1500)]
        assert masses[0] > masses[1] > masses[2]


systems = st.tuples(st.integers(2, 7), st.integers(1, 3), st.integers(0, 2**31 - 1))


@settings(max_examples=60, deadline=None)
@given(systems, st.floats(0.05, 0.995), st.data())
def test_integration_identity_matches_rollout(shape, alpha, data):
    n, K, seed = shape
    d = random_system(n, K, seed)
    pol = np.array(data.draw(st.lists(st.integers(0, K - 1), min_size=n, max_size=n)))
    y0 = data.draw(st.integers(0, n - 1))
    mu = discounted_measure(d, y0, pol, alpha)
    q = lambda s, u: d.cost[s, u]
    T = int(math.ceil(math.log(1e-16) / math.log(alpha))) + 10
    assert integrate(mu, q) == pytest.approx(rollout_discounted(d, y0, pol, alpha, q, T), abs=1e-9)
    assert abs(mu.total - 1.0) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(systems, st.floats(0.05, 0.999), st.data())
def test_discounted_measures_satisfy_balance(shape, alpha, data):
    n, K, seed = shape
    d = random_system(n, K, seed)
    pol = np.array(data.draw(st.lists(st.integers(0, K - 1), min_size=n, max_size=n)))
    y0 = data.draw(st.integers(0, n - 1))
    mu = discounted_measure(d, y0, pol, alpha)
    for basis in (indicator_basis(d), smooth_basis(d, 3)):
        for phi in basis.on(d):
            assert abs(constraint_residual(mu, d, phi)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(systems, st.data())
def test_periodic_averaging_is_stationary(shape, data):
    from occulp.measures import trajectory_cycle
    n, K, seed = shape
    d = random_system(n, K, seed)
    pol = np.array(data.draw(st.lists(st.integers(0, K - 1), min_size=n, max_size=n)))
    pairs, start = trajectory_cycle(d, 0, pol)
    y_cycle = pairs[start][0]
    period = len(pairs) - start
    mu = averaging_measure(d, y_cycle, pol, period * data.draw(st.integers(1, 5)))
    phi = np.random.default_rng(seed).normal(size=n)
    assert abs(constraint_residual(mu, d, phi, "stationary")) <= 1e-12
