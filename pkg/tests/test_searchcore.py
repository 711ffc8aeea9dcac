import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddsopt.searchcore import (
    Adaptive,
    ForcingFunction,
    PollEvaluationError,
    PollSet,
    Vanishing,
    canonical_pss,
    cosine_measure_estimate,
    poll,
    update_stepsize,
)

RHO = ForcingFunction(1e-8, 0.8)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_canonical_pss(n):
    D = canonical_pss(n)
    assert len(D) == 2 * n
    assert D.kappa == pytest.approx(1 / math.sqrt(n))


def test_cosine_measure_examples():
    est = cosine_measure_estimate(canonical_pss(2), samples=100_000)
    assert 1 / math.sqrt(2) <= est <= 1 / math.sqrt(2) + 0.05
    assert cosine_measure_estimate(np.array([[1.0, 0.0]])) <= 0
    assert cosine_measure_estimate(canonical_pss(1)) == 1.0


def test_poll_set_requires_unit_directions():
    with pytest.raises(ValueError):
        PollSet(np.array([[2.0, 0.0]]), 0.5)
    with pytest.raises(ValueError):
        PollSet(np.zeros((0, 2)), 0.5)


def test_forcing_validation():
    with pytest.raises(ValueError):
        ForcingFunction(0.0, 0.8)
    with pytest.raises(ValueError):
        ForcingFunction(1e-8, 0.0)
    with pytest.raises(ValueError):
        ForcingFunction(1e-8, 1.5)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 10.0), st.floats(1.01, 3.0))
def test_forcing_monotone_and_little_o(alpha, factor):
    beta = alpha * factor
    assert RHO(alpha) <= RHO(beta)
    assert RHO(alpha) / alpha <= RHO(beta) / beta


def test_forcing_ratio_vanishes():
    ratios = [RHO(a) / a for a in np.logspace(0, -12, 13)]
    assert all(np.diff(ratios) < 0) and ratios[-1] < 1e-16


def test_for_vanishing_reproduces_sequence():
    rho = ForcingFunction.for_vanishing(2.0, 0.6, 1e-3, 0.9)
    van = Vanishing(2.0, 0.6)
    for k in (0, 1, 10, 100):
        assert rho(van.alpha(k)) == pytest.approx(1e-3 / (1 + k) ** 0.9, rel=1e-12)


def test_poll_success_on_second_direction():
    f = lambda x: float(x[0] ** 2)
    D = canonical_pss(1)  # +1 first, then -1
    res = poll(f, np.array([1.0]), 0.5, D, RHO)
    assert res.success and res.index == 1
    np.testing.assert_array_equal(res.direction, [-1.0])
    assert res.trial_value == 0.25
    assert res.evaluations == 3  # baseline, f(1.5) = 2.25 fails, f(0.5) succeeds


def test_poll_reuses_baseline():
    f = lambda x: float(x[0] ** 2)
    res = poll(f, np.array([1.0]), 0.5, canonical_pss(1), RHO, baseline=1.0)
    assert res.evaluations == 2


def test_constant_function_never_succeeds():
    f = lambda x: 3.0
    for alpha in (1.0, 1e-3, 1e-6, 1e-12):
        assert not poll(f, np.zeros(2), alpha, canonical_pss(2), RHO).success


def test_equal_value_is_not_a_decrease_even_below_float_spacing():
    # rho(1e-6) ~ 1e-19 is below the spacing of floats near 1e3
    f = lambda x: 1e3 if x[0] == 0 else 1e3 - 1e-20
    assert not poll(f, np.zeros(1), 1e-6, canonical_pss(1), RHO).success


def test_poll_reports_failing_direction():
    def f(x):
        if x[0] < 0:
            raise FloatingPointError("boom")
        return float(x[0] ** 2 + 1)

    with pytest.raises(PollEvaluationError) as err:
        poll(f, np.array([0.0]), 1.0, canonical_pss(1), RHO)
    assert err.value.direction_index == 1


def test_poll_rejects_nonpositive_step():
    with pytest.raises(ValueError):
        poll(lambda x: 0.0, np.zeros(1), 0.0, canonical_pss(1), RHO)


def test_vanishing_update():
    assert update_stepsize(Vanishing(1.0, 0.6), 1.0, True, 0) == pytest.approx(2 ** -0.6)
    assert update_stepsize(Vanishing(1.0, 0.6), 1.0, False, 0) == pytest.approx(0.6597539553864471)


def test_adaptive_update():
    sched = Adaptive(0.5, 0.0, math.inf)
    assert update_stepsize(sched, 1.0, False, 0) == 0.5
    assert update_stepsize(sched, 1.0, True, 0) == 2.0
    assert not sched.theory_compliant


def test_adaptive_bounds_clip():
    sched = Adaptive(0.5, 0.1, 1.0, 0.6)
    assert sched.theory_compliant
    assert update_stepsize(sched, 0.9, True, 0) == 1.0
    assert update_stepsize(sched, 0.15, False, 0) == 0.1
    lo, hi = sched.bounds(3)
    assert (lo, hi) == pytest.approx((0.1 / 4**0.6, 1 / 4**0.6))


def test_schedule_validation():
    with pytest.raises(ValueError):
        Adaptive(theta=1.0)
    with pytest.raises(ValueError):
        Adaptive(c_min=1.0, c_max=0.5)
