import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from postselect_qkd.attacks import quadrature_eve_bound
from postselect_qkd.core import SignalParams
from postselect_qkd.information import i_ab, renyi_opt, shannon_gain
from postselect_qkd.keygain import (
    optimize_gain,
    retained_fraction,
    secure_key_gain,
    threshold_tilde,
)

# Frozen by tools/oracles.py.
GAIN_N1_ETA05_X1 = 0.012414506525412634
GAIN_N1_ETA05_X08 = 0.015732584221095813
X_TILDE_N1_ETA05 = 0.76319458182926482


def beamsplit(eta):
    return lambda n: renyi_opt(n, eta)


def test_lossless_gain_is_shannon_gain():
    p = SignalParams(1.3, 1.0)
    res = secure_key_gain(p, 0.4, renyi_opt(1.3, 1.0))
    assert res.renyi_bound == 0.0
    assert res.gain == pytest.approx(shannon_gain(p, 0.4), abs=1e-13)


def test_gain_vanishes_for_infinite_threshold(lossy):
    assert secure_key_gain(lossy, 1e3, 0.5).gain == 0.0


def test_gain_pinned_by_trapezoid_oracle(lossy):
    r = renyi_opt(1.0, 0.5)
    assert secure_key_gain(lossy, 1.0, r).gain == pytest.approx(GAIN_N1_ETA05_X1, abs=1e-9)
    assert secure_key_gain(lossy, 0.8, r).gain == pytest.approx(GAIN_N1_ETA05_X08, abs=1e-9)


def test_gain_result_fields(lossy):
    res = secure_key_gain(lossy, 0.8, 0.3)
    assert res.params_echo == (0.8, 1.0, 0.5, 0.25)
    assert 0 <= res.retained_fraction <= 0.5
    assert res.as_dict()["gain"] == res.gain


def test_per_sent_pulse_halves_everything(lossy):
    a = secure_key_gain(lossy, 0.8, 0.3)
    b = secure_key_gain(lossy, 0.8, 0.3, per_sent_pulse=True)
    assert b.gain == 0.5 * a.gain and b.retained_fraction == 0.5 * a.retained_fraction


@settings(max_examples=40, deadline=None)
@given(
    n=st.floats(0.01, 20),
    eta=st.floats(0.01, 1),
    v=st.floats(0.25, 1.0),
    x0=st.floats(0, 3),
    r=st.floats(0, 0.999),
)
def test_decomposition_identity(n, eta, v, x0, r):
    res = secure_key_gain(SignalParams(n, eta, v), x0, r)
    assert res.gain == pytest.approx(res.shannon_part - res.renyi_bound * res.retained_fraction, abs=1e-9)


def test_callable_leak_decomposition(lossy):
    leak = lambda x: 0.2 + 0.1 * math.tanh(x)
    res = secure_key_gain(lossy, 0.3, leak)
    assert res.gain == pytest.approx(res.shannon_part - res.renyi_bound * res.retained_fraction, abs=1e-9)


def test_gain_nonincreasing_in_renyi(lossy):
    vals = [secure_key_gain(lossy, 0.6, r).gain for r in np.linspace(0, 0.99, 23)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_invalid_inputs(lossy):
    with pytest.raises(ValueError):
        secure_key_gain(lossy, -0.1, 0.2)
    with pytest.raises(ValueError):
        secure_key_gain(lossy, 0.1, 1.0)


def test_retained_fraction_lossless_zero_threshold():
    assert retained_fraction(SignalParams(2.0), 0.0) == pytest.approx(0.5, abs=1e-15)


def test_threshold_tilde_zero_renyi(lossy):
    assert threshold_tilde(lossy, 0.0) == 0.0


def test_threshold_tilde_pinned(lossy):
    x = threshold_tilde(lossy, renyi_opt(1.0, 0.5))
    assert x == pytest.approx(X_TILDE_N1_ETA05, abs=1e-10)


def test_threshold_tilde_diverges_as_renyi_approaches_one(lossy):
    xs = [threshold_tilde(lossy, 1 - 10.0**-k) for k in (2, 4, 6, 8, 10)]
    assert all(b > a for a, b in zip(xs, xs[1:]))
    assert xs[-1] > 4.0 and xs[-1] > 3 * xs[0]
    with pytest.raises(ValueError):
        threshold_tilde(lossy, 1.0)


@pytest.mark.parametrize("eta", [0.9, 0.5, 0.2, 0.1])
def test_gain_positive_just_above_threshold(eta):
    n = 0.3
    p = SignalParams(n, eta)
    r = renyi_opt(n, eta)
    x = threshold_tilde(p, r)
    assert i_ab(x, p.effective_intensity, p.variance) == pytest.approx(r, abs=1e-12)
    assert secure_key_gain(p, x + 0.5, r).gain > 0


def test_optimizer_reaches_half_bit_lossless():
    res = optimize_gain(1.0, 0.25, beamsplit(1.0), n_bounds=(1e-3, 50.0))
    assert 0.45 < res.best_gain <= 0.5 + 1e-12
    assert res.converged and not res.insecure


def test_optimizer_positive_at_high_loss():
    assert optimize_gain(0.1, 0.25, beamsplit(0.1)).best_gain > 0


def test_optimizer_never_below_seed_grid():
    res = optimize_gain(0.5, 0.25, beamsplit(0.5))
    assert res.best_gain >= max(g for _, _, g in res.grid)
    assert res.best_gain >= res.seed_gain


def test_optimizer_threshold_is_positivity_threshold():
    # dG/dx0 = -density(x0) * (i_ab(x0) - leak): the optimal x0 is x~(n)
    res = optimize_gain(0.5, 0.25, beamsplit(0.5))
    p = SignalParams(res.best_n, 0.5)
    assert res.best_x0 == pytest.approx(threshold_tilde(p, renyi_opt(res.best_n, 0.5)), rel=2e-3)


def test_optimizer_deterministic():
    a = optimize_gain(0.3, 0.25, beamsplit(0.3))
    b = optimize_gain(0.3, 0.25, beamsplit(0.3))
    assert (a.best_gain, a.best_x0, a.best_n) == (b.best_gain, b.best_x0, b.best_n)


def test_optimizer_monotone_over_loss():
    gains = [optimize_gain(eta, 0.25, beamsplit(eta)).best_gain for eta in np.linspace(1.0, 0.1, 10)]
    assert all(b <= a + 1e-9 for a, b in zip(gains, gains[1:]))
    assert gains[4] < gains[0]


def test_optimizer_reports_insecure_regime_without_raising():
    res = optimize_gain(0.5, 0.25, lambda n: (lambda x: 1.0), grid_n=5, grid_x0=5)
    assert res.insecure


def test_optimal_povm_leaks_more_than_homodyne_eve():
    for eta in (0.9, 0.5, 0.2):
        povm = optimize_gain(eta, 0.25, beamsplit(eta)).best_gain
        homodyne = optimize_gain(eta, 0.25, lambda n: quadrature_eve_bound(n, eta)).best_gain
        assert povm <= homodyne
