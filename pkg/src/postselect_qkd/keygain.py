"""Secure key gain, the positivity threshold, and joint (x0, n) optimization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy import optimize

from .core import IntegrationError, SignalParams, _mixture_pdf, gaussian_tail, integrate_semi_infinite
from .information import _info_from_logit, i_ab, shannon_gain

# Eve's leak per retained pulse: a constant (beam splitting) or a function of
# Bob's outcome x (intercept-resend attacks correlate Eve with x).
Leak = Union[float, Callable[[float], float]]
RenyiModel = Callable[[float], Leak]

MAX_X0_SIGMAS = 80.0


@dataclass(frozen=True)
class GainResult:
    gain: float
    shannon_part: float
    renyi_bound: float
    retained_fraction: float
    x0: float
    n: float
    eta: float
    variance: float

    @property
    def params_echo(self):
        return (self.x0, self.n, self.eta, self.variance)

    def as_dict(self):
        return {
            "gain": self.gain,
            "shannon_part": self.shannon_part,
            "renyi_bound": self.renyi_bound,
            "retained_fraction": self.retained_fraction,
            "x0": self.x0,
            "n": self.n,
            "eta": self.eta,
            "variance": self.variance,
        }


@dataclass
class OptimizationResult:
    best_gain: float
    best_x0: float
    best_n: float
    evaluations: int
    converged: bool
    seed_gain: float = math.nan
    grid: list = field(default_factory=list, repr=False)

    @property
    def insecure(self) -> bool:
        """True when no probed point gave a positive gain."""
        return not self.best_gain > 0

    def as_dict(self):
        return {
            "best_gain": self.best_gain,
            "best_x0": self.best_x0,
            "best_n": self.best_n,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "insecure": self.insecure,
        }


def retained_fraction(p: SignalParams, x0: float) -> float:
    """One-sided retained mass: integral of the outcome density over x > x0."""
    a, v = p.amplitude, p.variance
    return 0.5 * (gaussian_tail(x0, a, v) + gaussian_tail(x0, -a, v))


def _gain_integral(a, v, x0, leak):
    k = 2.0 * a / v
    if callable(leak):
        def integrand(x):
            return _mixture_pdf(x, a, v) * (_info_from_logit(k * x) - leak(x))
    else:
        def integrand(x):
            return _mixture_pdf(x, a, v) * (_info_from_logit(k * x) - leak)
    return integrate_semi_infinite(integrand, x0, math.sqrt(v), center=a, points=(a,))


def secure_key_gain(p: SignalParams, x0: float, renyi: Leak, per_sent_pulse: bool = False) -> GainResult:
    """Key gain per pulse with postselection threshold ``x0``.

    The gain integrand is ``outcome_density * (i_ab - leak)`` over x > x0,
    integrated directly so small gains keep their relative accuracy; the
    Shannon part and the retained mass are computed separately and
    ``renyi_bound`` is the density-weighted mean leak over the retained set.
    """
    if x0 < 0:
        raise ValueError(f"threshold must be non-negative, got {x0}")
    if not callable(renyi) and not 0 <= renyi < 1:
        raise ValueError(f"Renyi bound must lie in [0, 1), got {renyi}")
    a, v = p.amplitude, p.variance
    gain = _gain_integral(a, v, x0, renyi)
    shannon = shannon_gain(p, x0)
    kept = retained_fraction(p, x0)
    if callable(renyi):
        leaked = integrate_semi_infinite(
            lambda x: _mixture_pdf(x, a, v) * renyi(x), x0, p.sigma, center=a, points=(a,)
        )
        bound = leaked / kept if kept > 0 else renyi(x0)
    else:
        bound = float(renyi)
    scale = 0.5 if per_sent_pulse else 1.0
    return GainResult(
        gain=scale * gain,
        shannon_part=scale * shannon,
        renyi_bound=bound,
        retained_fraction=scale * kept,
        x0=x0,
        n=p.n,
        eta=p.eta,
        variance=v,
    )


def threshold_tilde(p: SignalParams, renyi: float, tol: float = 1e-12) -> float:
    """Smallest x >= 0 at which Bob's per-outcome information reaches ``renyi``.

    Any threshold at or above this value makes the gain integrand
    non-negative on the whole retained set.
    """
    if not renyi < 1:
        raise ValueError(f"Renyi bound must be below 1 bit, got {renyi}")
    if renyi <= 0:
        return 0.0
    if not p.effective_intensity > 0:
        raise ValueError("effective intensity must be positive")
    eff, v = p.effective_intensity, p.variance

    def f(x):
        return i_ab(x, eff, v) - renyi

    lo, hi = 0.0, p.sigma
    while f(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e150:
            raise ArithmeticError(f"no threshold found for Renyi bound {renyi!r}")
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    if abs(f(hi)) > tol and abs(f(lo)) > tol:
        raise ArithmeticError(
            f"bisection stalled at x in [{lo!r}, {hi!r}], residual {f(hi):.3g}"
        )
    return hi if abs(f(hi)) <= abs(f(lo)) else lo


def optimize_gain(
    eta: float,
    variance: float,
    renyi_model: RenyiModel,
    n_bounds: tuple = (1e-3, 1e3),
    grid_n: int = 25,
    grid_x0: int = 21,
    rtol: float = 1e-6,
    x0_sigmas: float = 10.0,
    widen: bool = True,
) -> OptimizationResult:
    """Maximize the secure key gain over threshold and pulse intensity.

    A log-spaced grid in ``n`` times a linear grid in ``t`` seeds a bounded
    Nelder-Mead search in ``(log n, t)``, where ``x0 = t * (sqrt(eta n) +
    x0_sigmas * sigma)``. ``renyi_model(n)`` returns Eve's leak for pulses of
    intensity ``n``, either a constant or a function of Bob's outcome.
    If no seed point is positive and ``widen`` is set, the threshold span is
    doubled (up to ``MAX_X0_SIGMAS``) and the grid re-run. Non-positive
    optima are returned as results, flagged ``insecure``.
    """
    if not 0 < eta <= 1:
        raise ValueError(f"transmission must lie in (0, 1], got eta={eta}")
    if grid_n < 2 or grid_x0 < 2:
        raise ValueError("seed grid needs at least two points per axis")
    sigma = math.sqrt(variance)
    log_lo, log_hi = math.log(n_bounds[0]), math.log(n_bounds[1])
    leaks = {}
    evaluations = 0
    failures = []
    span = x0_sigmas

    def leak_for(n):
        if n not in leaks:
            leaks[n] = renyi_model(n)
        return leaks[n]

    def decode(z):
        n = math.exp(min(max(z[0], log_lo), log_hi))
        t = min(max(z[1], 0.0), 1.0)
        return t * (math.sqrt(eta * n) + span * sigma), n

    def gain_at(x0, n):
        nonlocal evaluations
        evaluations += 1
        p = SignalParams(n, eta, variance)
        try:
            return _gain_integral(p.amplitude, variance, x0, leak_for(n))
        except IntegrationError as exc:
            # cancelling integrands far from the optimum; the estimate is
            # good enough to rank the probe
            failures.append((x0, n))
            return exc.estimate

    log_ns = np.linspace(log_lo, log_hi, grid_n)
    ts = np.linspace(0.0, 1.0, grid_x0)
    while True:
        grid = []
        best = None
        for ln in log_ns:
            for t in ts:
                x0, n = decode((ln, t))
                g = gain_at(x0, n)
                grid.append((x0, n, g))
                key = (g, -x0, -n)
                if best is None or key > best[0]:
                    best = (key, (ln, t))
        seed_gain = best[0][0]
        # At very high loss the positivity threshold can sit beyond the
        # default span; widen it before declaring the regime insecure.
        if seed_gain > 0 or not widen or span >= MAX_X0_SIGMAS:
            break
        span *= 2.0
    z_seed = np.array(best[1])

    step = np.array([log_ns[1] - log_ns[0], ts[1] - ts[0]])
    z_best, g_best = z_seed, seed_gain
    converged = False
    for _ in range(4):
        simplex = np.array([z_best, z_best + [step[0], 0.0], z_best + [0.0, step[1]]])
        simplex[:, 0] = np.clip(simplex[:, 0], log_lo, log_hi)
        simplex[:, 1] = np.clip(simplex[:, 1], 0.0, 1.0)
        # keep the simplex non-degenerate at the box edges
        for i in (1, 2):
            if np.allclose(simplex[i], simplex[0]):
                simplex[i, i - 1] -= step[i - 1]
        res = optimize.minimize(
            lambda z: -gain_at(*decode(z)),
            z_best,
            method="Nelder-Mead",
            bounds=[(log_lo, log_hi), (0.0, 1.0)],
            options={
                "initial_simplex": simplex,
                "xatol": 1e-7,
                "fatol": max(rtol * abs(g_best), 1e-300),
                "maxiter": 2000,
                "maxfev": 4000,
            },
        )
        g_new = -res.fun
        improved = g_new - g_best
        if g_new > g_best:
            z_best, g_best = np.asarray(res.x), g_new
        if improved <= rtol * abs(g_best):
            converged = bool(res.success)
            break
        step = step / 4.0
    x0, n = decode(z_best)
    if (x0, n) in failures:
        converged = False
    return OptimizationResult(
        best_gain=float(g_best),
        best_x0=float(x0),
        best_n=float(n),
        evaluations=evaluations,
        converged=converged,
        seed_gain=float(seed_gain),
        grid=grid,
    )
