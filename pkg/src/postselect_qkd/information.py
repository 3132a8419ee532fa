"""Bob's Shannon information on postselected outcomes and Eve's Renyi bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    VACUUM_VARIANCE,
    SignalParams,
    _check_variance,
    _mixture_pdf,
    integrate_semi_infinite,
)

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ConditionalProbability:
    """Posterior that the ``+`` amplitude was sent, given an outcome."""

    p_plus: float

    @property
    def p_minus(self) -> float:
        return 1.0 - self.p_plus


@dataclass(frozen=True)
class InfoGain:
    i_ab: float
    i_renyi: float


def _logistic(z):
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _info_from_logit(z):
    """1 - h2(logistic(z)) in bits, stable for any finite z.

    Uses h(sigmoid(z)) = log1p(exp(-|z|)) + |z| * sigmoid(-|z|) (nats).
    """
    u = abs(z)
    e = math.exp(-u)
    h = math.log1p(e) + u * e / (1.0 + e)
    return min(1.0, max(0.0, 1.0 - h / LN2))


def conditional_prob(x: float, mean_amplitude: float, variance: float) -> ConditionalProbability:
    _check_variance(variance)
    if mean_amplitude < 0:
        raise ValueError(f"mean amplitude must be non-negative, got {mean_amplitude}")
    return ConditionalProbability(_logistic(2.0 * mean_amplitude * x / variance))


def binary_entropy(p: float) -> float:
    """Binary entropy in bits with ``0 log 0 = 0``."""
    p = min(1.0, max(0.0, p))
    if p == 0.0 or p == 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log1p(-p) / LN2)


def i_ab(x: float, effective_intensity: float, variance: float) -> float:
    """Shannon information (bits) Bob holds about Alice's bit after seeing ``x``.

    ``effective_intensity`` is the mean photon number reaching Bob, eta*n.
    """
    _check_variance(variance)
    if effective_intensity < 0:
        raise ValueError(f"effective intensity must be non-negative, got {effective_intensity}")
    return _info_from_logit(2.0 * math.sqrt(effective_intensity) * x / variance)


def shannon_gain(p: SignalParams, x0: float, per_sent_pulse: bool = False) -> float:
    """Bob's Shannon information per pulse retained above the threshold.

    Integrates ``outcome_density * i_ab`` over ``x > x0``. The two-sided sum
    with its 1/2 basis-sifting factor equals this one-sided integral by
    symmetry. ``per_sent_pulse=True`` applies a further factor 1/2.
    """
    if x0 < 0:
        raise ValueError(f"threshold must be non-negative, got {x0}")
    a, v = p.amplitude, p.variance
    k = 2.0 * a / v

    def integrand(x):
        return _mixture_pdf(x, a, v) * _info_from_logit(k * x)

    value = integrate_semi_infinite(integrand, x0, p.sigma, center=a, points=(a,))
    return 0.5 * value if per_sent_pulse else value


def renyi_binary_pure(overlap_sq: float) -> float:
    """Optimal Renyi information (bits) on two equiprobable pure states."""
    if not 0.0 <= overlap_sq <= 1.0:
        raise ValueError(f"squared overlap must lie in [0, 1], got {overlap_sq}")
    return math.log2(2.0 - overlap_sq)


def renyi_opt(n: float, eta: float, vacuum_variance: float = VACUUM_VARIANCE) -> float:
    """Eve's optimal individual-attack Renyi information from the tapped beam.

    Eve holds ``|+/- sqrt((1-eta) n)>``, whose squared overlap is
    ``exp(-(1-eta) n / vacuum_variance)``.
    """
    if not n > 0:
        raise ValueError(f"pulse intensity must be positive, got n={n}")
    if not 0 < eta <= 1:
        raise ValueError(f"transmission must lie in (0, 1], got eta={eta}")
    return renyi_binary_pure(math.exp(-(1.0 - eta) * n / vacuum_variance))
