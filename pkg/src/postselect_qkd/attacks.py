r"""Eavesdropping and channel models.

Each scenario fixes what Bob observes (mean amplitude ``sqrt(eta n)`` and a
quadrature variance) and what Eve learns (a Renyi leak per retained pulse).

Gaussian-mixture channels
-------------------------
The channel ``|a> -> (lam/pi) \int exp(-lam |b|^2) |a+b><a+b| d^2b`` displaces
the coherent amplitude by a complex Gaussian ``b`` with ``E|b|^2 = 1/lam``,
so ``Re b`` has variance ``1/(2 lam)``. A homodyne outcome on ``|a+b>`` has
mean ``Re(a+b)`` and variance 1/4, hence the mixed state shows

    mean = Re a,    variance = 1/4 + 1/(2 lam) = (1/4) (1 + 2/lam).

Loss ``eta`` applied after the mixture scales the amplitude by ``sqrt(eta)``
and the displacement variance by ``eta``:

    mean = sqrt(eta) Re a,    variance = (1/4) (1 + 2 eta / lam).

Classical teleportation (simultaneous measurement of both quadratures and
resending sqrt(2) times the estimate) is the ``lam = 1`` mixture, giving
3/4 at unit transmission and ``(1 + 2 eta)/4`` when the loss follows it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

from scipy import integrate

from .core import VACUUM_VARIANCE, SignalParams
from .information import _logistic, renyi_opt

DEFAULT_LOSS_DB_PER_KM = 0.2


class AttackKind(str, enum.Enum):
    BEAMSPLIT = "beamsplit"
    BEAMSPLIT_QUADRATURE = "beamsplit-quad"
    AMPLIFIED = "amp"
    CT = "ct"
    CT_LOSS = "ct-loss"


class Security(str, enum.Enum):
    SECURE_POSSIBLE = "secure-possible"
    INSECURE = "insecure"


@dataclass(frozen=True)
class GaussianMixtureChannel:
    lam: float
    eta: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"mixture parameter must be positive, got {self.lam}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"transmission must lie in (0, 1], got eta={self.eta}")

    @property
    def added_variance(self) -> float:
        """Quadrature variance added on top of the vacuum level."""
        if math.isinf(self.lam):
            return 0.0
        return self.eta / (2.0 * self.lam)


def mixture_channel_stats(ch: GaussianMixtureChannel, input_amplitude: complex):
    """Mean complex amplitude and per-quadrature variance after ``ch``."""
    mean = math.sqrt(ch.eta) * complex(input_amplitude)
    return mean, VACUUM_VARIANCE + ch.added_variance


def beamsplit_bound(n: float, eta: float) -> float:
    """Renyi leak when Eve optimally measures the tapped fraction 1 - eta."""
    return renyi_opt(n, eta)


def _sech2_average(mean, var, kappa):
    """E[sech^2(kappa Y)] for Y ~ N(mean, var)."""
    s = math.sqrt(var)
    lo = max(mean - 12.0 * s, -40.0 / kappa)
    hi = min(mean + 12.0 * s, 40.0 / kappa)
    if hi <= lo:
        return 0.0
    norm = 1.0 / math.sqrt(2.0 * math.pi * var)

    def f(y):
        e = math.exp(-2.0 * kappa * abs(y))
        return norm * math.exp(-((y - mean) ** 2) / (2.0 * var)) * 4.0 * e / (1.0 + e) ** 2

    pts = [p for p in (0.0, mean) if lo < p < hi]
    val, _ = integrate.quad(f, lo, hi, points=pts or None, epsabs=1e-15, epsrel=1e-11, limit=200)
    return val


def _renyi_from_collision(c):
    return min(1.0, max(0.0, 1.0 + math.log2(c)))


def quadrature_eve_bound(n: float, eta: float) -> float:
    """Renyi leak when Eve homodynes the tapped beam in the signal quadrature.

    Eve's outcome ``y ~ N(+/- b, 1/4)`` with ``b = sqrt((1-eta) n)``; her bit
    posterior is logistic with collision probability ``1 - sech^2(4 b y)/2``.
    The leak is ``1 + log2`` of the mean collision probability, the same
    measure under which the optimal POVM gives ``log2(2 - overlap^2)``.
    """
    if not n > 0:
        raise ValueError(f"pulse intensity must be positive, got n={n}")
    if not 0 < eta <= 1:
        raise ValueError(f"transmission must lie in (0, 1], got eta={eta}")
    b = math.sqrt((1.0 - eta) * n)
    if b == 0.0:
        return 0.0
    kappa = b / VACUUM_VARIANCE
    return _renyi_from_collision(1.0 - 0.5 * _sech2_average(b, VACUUM_VARIANCE, kappa))


@dataclass(frozen=True)
class AmplifiedBeamSplit:
    mu: float
    g: float
    eta: float

    def bound(self, n: float) -> float:
        return renyi_opt(n, self.mu)


def amplified_beamsplit(eta: float, observed_variance: float) -> AmplifiedBeamSplit:
    """Beam splitter of transmission mu followed by an amplifier of gain g.

    Chosen so Bob sees variance ``(2g - 1)/4`` and unchanged intensity
    ``g mu n = eta n``; Eve's leak is the beam-splitting bound at ``mu``.
    """
    if not 0 < eta <= 1:
        raise ValueError(f"transmission must lie in (0, 1], got eta={eta}")
    if observed_variance < VACUUM_VARIANCE:
        raise ValueError(
            f"observed variance {observed_variance} is below the vacuum level {VACUUM_VARIANCE}"
        )
    g = (observed_variance / VACUUM_VARIANCE + 1.0) / 2.0
    return AmplifiedBeamSplit(mu=eta / g, g=g, eta=eta)


def intercept_resend_leak(n: float, eta: float, loss_after: bool = True) -> Callable[[float], float]:
    """Eve's Renyi leak as a function of Bob's outcome under classical teleportation.

    Eve's estimate ``y`` of the signal quadrature is ``N(+/- A, 1/2)`` and Bob
    measures ``x ~ N(c y, 1/4)``. With ``loss_after`` the teleporter sits at
    Alice's end (``A = sqrt(n)``, ``c = sqrt(eta)``); otherwise at Bob's end
    (``A = sqrt(eta n)``, ``c = 1``). Since Bob's outcome is a degraded copy
    of ``y``, the leak given ``x`` is the collision information of the bit
    averaged over the posterior of ``y``. Conditioning on ``|x|`` gives the
    same value, so the leak also covers Bob announcing ``|x|``.
    """
    if not n > 0:
        raise ValueError(f"pulse intensity must be positive, got n={n}")
    if not 0 < eta <= 1:
        raise ValueError(f"transmission must lie in (0, 1], got eta={eta}")
    ve = 2.0 * VACUUM_VARIANCE
    vb = VACUUM_VARIANCE
    if loss_after:
        amp, c = math.sqrt(n), math.sqrt(eta)
    else:
        amp, c = math.sqrt(eta * n), 1.0
    post_var = 1.0 / (1.0 / ve + c * c / vb)
    marg_var = c * c * ve + vb
    kappa = amp / ve

    def leak(x):
        w_plus = _logistic(2.0 * c * amp * x / marg_var)
        m_plus = post_var * (amp / ve + c * x / vb)
        m_minus = post_var * (-amp / ve + c * x / vb)
        sech2 = w_plus * _sech2_average(m_plus, post_var, kappa) + (1.0 - w_plus) * _sech2_average(
            m_minus, post_var, kappa
        )
        return _renyi_from_collision(1.0 - 0.5 * sech2)

    return leak


@dataclass(frozen=True)
class AttackScenario:
    """What Bob observes and what Eve learns under one attack.

    ``g`` is only meaningful for the amplified beam-splitting attack.
    """

    kind: AttackKind
    eta: float
    observed_variance: float = VACUUM_VARIANCE
    g: float = 1.0

    @property
    def delta(self) -> float:
        return self.observed_variance / VACUUM_VARIANCE - 1.0

    @property
    def mu(self) -> float:
        return self.eta / self.g

    @classmethod
    def build(
        cls,
        kind,
        eta: float,
        observed_variance: Optional[float] = None,
        delta: Optional[float] = None,
    ) -> "AttackScenario":
        kind = AttackKind(kind)
        if not 0 < eta <= 1:
            raise ValueError(f"transmission must lie in (0, 1], got eta={eta}")
        if observed_variance is not None and delta is not None:
            if not math.isclose(observed_variance, VACUUM_VARIANCE * (1.0 + delta), rel_tol=1e-12):
                raise ValueError("conflicting variance and delta")
        if observed_variance is None and delta is not None:
            observed_variance = VACUUM_VARIANCE * (1.0 + delta)
        if kind is AttackKind.AMPLIFIED:
            v = VACUUM_VARIANCE if observed_variance is None else observed_variance
            amp = amplified_beamsplit(eta, v)
            return cls(kind, eta, v, amp.g)
        fixed = {
            AttackKind.BEAMSPLIT: VACUUM_VARIANCE,
            AttackKind.BEAMSPLIT_QUADRATURE: VACUUM_VARIANCE,
            AttackKind.CT: 3.0 * VACUUM_VARIANCE,
            AttackKind.CT_LOSS: (1.0 + 2.0 * eta) * VACUUM_VARIANCE,
        }[kind]
        if observed_variance is not None and not math.isclose(observed_variance, fixed, rel_tol=1e-12):
            raise ValueError(
                f"attack {kind.value} fixes the observed variance at {fixed}, got {observed_variance}"
            )
        return cls(kind, eta, fixed, 1.0)

    def signal(self, n: float) -> SignalParams:
        return SignalParams(n, self.eta, self.observed_variance)

    def renyi_model(self, n: float):
        """Eve's leak for intensity ``n``: a float, or a function of Bob's x."""
        if self.kind is AttackKind.BEAMSPLIT:
            return beamsplit_bound(n, self.eta)
        if self.kind is AttackKind.BEAMSPLIT_QUADRATURE:
            return quadrature_eve_bound(n, self.eta)
        if self.kind is AttackKind.AMPLIFIED:
            return renyi_opt(n, self.mu)
        return intercept_resend_leak(n, self.eta, loss_after=self.kind is AttackKind.CT_LOSS)


def ct_security_condition(eta: float, delta: float) -> Security:
    """Necessary condition under classical teleportation plus loss: delta < 2 eta."""
    return Security.INSECURE if delta >= 2.0 * eta else Security.SECURE_POSSIBLE


def eta_from_distance(km: float, loss_coeff_db_per_km: float = DEFAULT_LOSS_DB_PER_KM) -> float:
    if km < 0:
        raise ValueError(f"distance must be non-negative, got {km}")
    return 10.0 ** (-loss_coeff_db_per_km * km / 10.0)


def distance_from_eta(eta: float, loss_coeff_db_per_km: float = DEFAULT_LOSS_DB_PER_KM) -> float:
    if not 0 < eta <= 1:
        raise ValueError(f"transmission must lie in (0, 1], got eta={eta}")
    return -10.0 * math.log10(eta) / loss_coeff_db_per_km


def distance_bound(delta: float, loss_coeff_db_per_km: float = DEFAULT_LOSS_DB_PER_KM) -> float:
    """Largest fiber length at which ``delta < 2 eta`` can still hold.

    Returns ``inf`` for ``delta <= 0`` and 0 for ``delta >= 2``.
    """
    if not loss_coeff_db_per_km > 0:
        raise ValueError(f"loss coefficient must be positive, got {loss_coeff_db_per_km}")
    if delta <= 0:
        return math.inf
    if delta >= 2:
        return 0.0
    return 10.0 / loss_coeff_db_per_km * math.log10(2.0 / delta)
