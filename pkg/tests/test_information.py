import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from postselect_qkd.core import SignalParams, integrate_semi_infinite, outcome_density
from postselect_qkd.information import (
    binary_entropy,
    conditional_prob,
    i_ab,
    renyi_binary_pure,
    renyi_opt,
    shannon_gain,
)

# Frozen by tools/oracles.py (mpmath at 50 digits; numpy trapezoid at step 1e-4).
I_AB_HALF = 0.87002072533369509
COND_HALF = 0.98201379003790844
RENYI_1_HALF = 0.89891624444943997
SHANNON_N1_ETA1 = 0.45641114288724105


def test_conditional_prob_examples():
    assert conditional_prob(0.0, 3.0, 0.25).p_plus == 0.5
    assert conditional_prob(1e6, 1.0, 0.25).p_plus == 1.0
    assert conditional_prob(0.5, 1.0, 0.25).p_plus == pytest.approx(COND_HALF, rel=1e-15)
    assert conditional_prob(0.5, 1.0, 0.25).p_minus == pytest.approx(1 - COND_HALF, rel=1e-12)


def test_conditional_prob_no_overflow():
    assert conditional_prob(-1e308, 10.0, 0.25).p_plus == 0.0


@given(x=st.floats(-50, 50), a=st.floats(0, 30), v=st.floats(0.25, 3))
def test_conditional_prob_sign_symmetry(x, a, v):
    total = conditional_prob(x, a, v).p_plus + conditional_prob(-x, a, v).p_plus
    assert abs(total - 1) <= 1e-15


def test_conditional_prob_domain():
    with pytest.raises(ValueError):
        conditional_prob(0.1, 1.0, 0.0)
    with pytest.raises(ValueError):
        conditional_prob(0.1, -1.0, 0.25)


def test_i_ab_examples():
    assert i_ab(0.0, 2.0, 0.25) == 0.0
    assert i_ab(50.0, 1.0, 0.25) == 1.0
    assert i_ab(0.5, 1.0, 0.25) == pytest.approx(I_AB_HALF, rel=1e-14)


def test_i_ab_matches_binary_entropy_form():
    for x in (0.01, 0.2, 0.7, 1.5):
        p = conditional_prob(x, 1.0, 0.25).p_plus
        assert i_ab(x, 1.0, 0.25) == pytest.approx(1 - binary_entropy(p), abs=1e-14)


def test_i_ab_finite_in_saturation():
    for x in (1e3, 1e10, 1e300, -1e300):
        v = i_ab(x, 10.0, 0.25)
        assert math.isfinite(v) and v == 1.0


@given(x=st.floats(-20, 20), n=st.floats(0, 40), v=st.floats(0.25, 2))
def test_i_ab_even_and_bounded(x, n, v):
    assert i_ab(x, n, v) == i_ab(-x, n, v)
    assert 0.0 <= i_ab(x, n, v) <= 1.0


def test_i_ab_nondecreasing_on_grid():
    xs = np.linspace(0, 6, 3001)
    for n in (0.01, 0.3, 1.0, 10.0):
        vals = np.array([i_ab(x, n, 0.25) for x in xs])
        assert np.all(np.diff(vals) >= -1e-12)


def test_binary_entropy_zero_log_zero():
    assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == 1.0


def test_shannon_gain_zero_for_infinite_threshold():
    assert shannon_gain(SignalParams(1.0, 0.5), 1e3) == 0.0


def test_shannon_gain_pinned_trapezoid():
    assert shannon_gain(SignalParams(1.0, 1.0), 0.0) == pytest.approx(SHANNON_N1_ETA1, abs=1e-9)


def test_shannon_gain_bright_pulse_limit():
    assert shannon_gain(SignalParams(50.0, 1.0), 0.0) == pytest.approx(0.5, abs=1e-12)


def test_shannon_gain_per_sent_pulse_convention():
    p = SignalParams(1.0, 0.7)
    assert shannon_gain(p, 0.3, per_sent_pulse=True) == 0.5 * shannon_gain(p, 0.3)


def test_shannon_gain_rejects_negative_threshold():
    with pytest.raises(ValueError):
        shannon_gain(SignalParams(1.0), -0.1)


@settings(max_examples=25, deadline=None)
@given(n=st.floats(0.01, 20), eta=st.floats(0.01, 1), v=st.floats(0.25, 1.0))
def test_shannon_gain_monotone_and_bounded(n, eta, v):
    p = SignalParams(n, eta, v)
    prev = math.inf
    for x0 in (0.0, 0.3, 0.8, 1.5, 3.0):
        g = shannon_gain(p, x0)
        mass = integrate_semi_infinite(lambda x: outcome_density(x, p), x0, p.sigma, center=p.amplitude)
        assert g <= mass + 1e-12
        assert g <= prev + 1e-12
        prev = g


def test_renyi_binary_pure_examples():
    assert renyi_binary_pure(1.0) == 0.0
    assert renyi_binary_pure(0.0) == 1.0
    assert renyi_binary_pure(0.5) == pytest.approx(0.58496250072115618, rel=1e-15)
    with pytest.raises(ValueError):
        renyi_binary_pure(1.2)


def test_renyi_opt_examples():
    assert renyi_opt(3.7, 1.0) == 0.0
    assert renyi_opt(1e3, 0.5) == 1.0
    assert renyi_opt(1.0, 0.5) == pytest.approx(RENYI_1_HALF, rel=1e-15)


@given(n=st.floats(1e-4, 1e3), eta=st.floats(1e-4, 1.0))
def test_renyi_opt_consistent_with_pure_state_formula(n, eta):
    ref = renyi_binary_pure(math.exp(-4 * (1 - eta) * n))
    assert abs(renyi_opt(n, eta) - ref) <= math.ulp(ref)


def test_renyi_opt_monotone():
    ns = np.geomspace(1e-3, 10, 50)
    vals = [renyi_opt(n, 0.6) for n in ns]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    etas = np.linspace(1.0, 0.01, 50)
    vals = [renyi_opt(0.5, e) for e in etas]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_renyi_opt_against_mpmath():
    for n, eta in [(0.1, 0.9), (2.0, 0.3), (0.01, 0.05)]:
        ref = mp.log(2 - mp.e ** (-(1 - mp.mpf(eta)) * n / mp.mpf("0.25")), 2)
        assert renyi_opt(n, eta) == pytest.approx(float(ref), rel=1e-12)
