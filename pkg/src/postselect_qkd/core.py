"""Gaussian quadrature statistics and the integration backbone.

Quadratures follow the convention ``[x1, x2] = i/2``, so a coherent state
has quadrature variance 1/4 in either quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

from scipy import integrate, special

VACUUM_VARIANCE = 0.25

# Semi-infinite integrals are cut at this many standard deviations past
# the rightmost mean; the discarded Gaussian tail is ~1e-33.
TRUNCATION_SIGMAS = 12.0
EPSREL = 1e-10
EPSABS = 1e-15
# Error bounds tolerated when QUADPACK reports non-convergence.
ACCEPT_ABS = 1e-12
ACCEPT_REL = 1e-6
ACCEPT_REL_ROUNDOFF = 1e-4


class IntegrationError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, interval, estimate, error_bound, message=""):
        self.interval = interval
        self.estimate = estimate
        self.error_bound = error_bound
        super().__init__(
            f"integration over [{interval[0]:.6g}, {interval[1]:.6g}] did not converge: "
            f"estimate={estimate:.12g}, error bound={error_bound:.3g}. {message}".strip()
        )


@dataclass(frozen=True)
class QuadratureConvention:
    vacuum_variance: float = VACUUM_VARIANCE

    def __post_init__(self):
        if self.vacuum_variance != VACUUM_VARIANCE:
            raise ValueError("vacuum_variance is fixed at 1/4")


@dataclass(frozen=True)
class SignalParams:
    """Bob's view of one sifted pulse.

    Attributes
    ----------
    n : float
        Mean photon number Alice sends per pulse.
    eta : float
        Channel transmission, ``0 < eta <= 1``.
    variance : float
        Quadrature variance Bob observes; 1/4 for a pure lossy channel.
    """

    n: float
    eta: float = 1.0
    variance: float = VACUUM_VARIANCE

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError(f"pulse intensity must be positive, got n={self.n}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"transmission must lie in (0, 1], got eta={self.eta}")
        if not self.variance >= VACUUM_VARIANCE:
            raise ValueError(
                f"quadrature variance must be at least {VACUUM_VARIANCE}, got {self.variance}"
            )

    @property
    def amplitude(self) -> float:
        """Mean quadrature amplitude at Bob, sqrt(eta * n)."""
        return math.sqrt(self.eta * self.n)

    @property
    def effective_intensity(self) -> float:
        return self.eta * self.n

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)


def _check_variance(variance):
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")


def gaussian_pdf(x: float, mean: float, variance: float) -> float:
    _check_variance(variance)
    return math.exp(-((x - mean) ** 2) / (2.0 * variance)) / math.sqrt(2.0 * math.pi * variance)


def _mixture_pdf(x, a, variance):
    u = abs(x)
    norm = 0.5 / math.sqrt(2.0 * math.pi * variance)
    return norm * (
        math.exp(-((u - a) ** 2) / (2.0 * variance)) + math.exp(-((u + a) ** 2) / (2.0 * variance))
    )


def outcome_density(x: float, p: SignalParams) -> float:
    """Density of Bob's quadrature outcome on a sifted pulse.

    Equal-weight mixture of Gaussians centred at +/- sqrt(eta*n) with the
    observed variance. Evaluated through ``|x|`` so it is exactly even.
    """
    return _mixture_pdf(x, p.amplitude, p.variance)


def gaussian_tail(t: float, mean: float, variance: float) -> float:
    """Upper tail mass ``P(X > t)`` of ``N(mean, variance)`` via erfc."""
    _check_variance(variance)
    return 0.5 * float(special.erfc((t - mean) / math.sqrt(2.0 * variance)))


def integrate_semi_infinite(
    f: Callable[[float], float],
    lower: float,
    scale: float,
    center: float = 0.0,
    points: Sequence[float] = (),
    sigmas: float = TRUNCATION_SIGMAS,
) -> float:
    """Integrate a Gaussian-dominated ``f`` over ``[lower, inf)``.

    The upper limit is ``max(lower, center) + sigmas * scale`` where
    ``center`` is the rightmost location of the integrand's mass and
    ``scale`` its width. ``lower=-inf`` is replaced by the mirror point
    ``-|center| - sigmas * scale``.

    Raises
    ------
    IntegrationError
        If scipy's QUADPACK reports non-convergence.
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    if math.isinf(lower) and lower < 0:
        lower = -abs(center) - sigmas * scale
    upper = max(lower, center) + sigmas * scale
    if upper <= lower:
        return 0.0
    interior = sorted({pt for pt in points if lower < pt < upper})
    # The absolute floor applies relative to the integrand's size, so
    # far-tail integrands (tiny but positive gains) keep relative accuracy.
    probes = [lower, min(upper, lower + scale), *interior]
    mag = max(abs(f(t)) for t in probes)
    if not (mag > 0 and math.isfinite(mag)):
        mag = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            lambda t: f(t) / mag,
            lower,
            upper,
            epsabs=EPSABS,
            epsrel=EPSREL,
            limit=400,
            points=interior or None,
            full_output=1,
        )
    value, abserr = out[0], out[1]
    rel = ACCEPT_REL_ROUNDOFF if len(out) > 3 and "roundoff" in out[3] else ACCEPT_REL
    if len(out) > 3 and abserr > max(ACCEPT_ABS, rel * abs(value)):
        # QUADPACK flags round-off on cancelling integrands long before the
        # estimate is unusable; only a genuinely loose bound is an error.
        raise IntegrationError((lower, upper), value * mag, abserr * mag, " ".join(out[3].split()))
    return value * mag
