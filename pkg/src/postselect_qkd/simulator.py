"""Seeded Monte Carlo simulation of the four-state postselected protocol.

Alice sends ``|sqrt(n) i^m>`` with ``m`` uniform in {0, 1, 2, 3}; Bob
homodynes quadrature ``k`` uniform in {1, 2}, where ``k = 1`` reads the real
part of the amplitude and ``k = 2`` the imaginary part. A pulse is sifted
when ``m - k = +/-1``: for ``k = 1`` that keeps m in {0, 2} (amplitudes
+sqrt(n), -sqrt(n) on x1), for ``k = 2`` it keeps m in {1, 3} (+sqrt(n),
-sqrt(n) on x2). Alice's bit is 1 for m in {0, 1} and 0 for m in {2, 3}.
Bob keeps ``x > x0`` as 1 and ``x < -x0`` as 0; ``|x| <= x0`` is discarded.

The channel acts on the coherent amplitude stage by stage (loss, amplifier
noise, Eve's simultaneous measurement and resend) before Bob's homodyne,
so observed variances are produced rather than assumed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .attacks import AttackKind, AttackScenario
from .core import VACUUM_VARIANCE, SignalParams, gaussian_tail

BATCH_SIZE = 1 << 20


@dataclass(frozen=True)
class ProtocolRunConfig:
    pulses: int
    n: float
    scenario: AttackScenario
    x0: float = 0.0
    seed: int = 0
    batch_size: int = BATCH_SIZE

    def __post_init__(self):
        if self.pulses < 1:
            raise ValueError(f"need at least one pulse, got {self.pulses}")
        if not self.n > 0:
            raise ValueError(f"pulse intensity must be positive, got n={self.n}")
        if self.x0 < 0:
            raise ValueError(f"threshold must be non-negative, got {self.x0}")
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")

    @property
    def signal(self) -> SignalParams:
        return self.scenario.signal(self.n)


@dataclass
class SimRun:
    pulses: int
    sifted: int
    retained: int
    errors: int
    seed: int
    sifted_variance: float
    by_basis: dict = field(default_factory=dict)

    @property
    def ber_defined(self) -> bool:
        return self.retained > 0

    @property
    def ber(self) -> float:
        return self.errors / self.retained if self.retained else math.nan

    @property
    def retained_fraction_empirical(self) -> float:
        return self.retained / self.sifted if self.sifted else math.nan

    @property
    def sift_rate(self) -> float:
        return self.sifted / self.pulses

    def as_dict(self):
        d = asdict(self)
        d.update(
            ber=self.ber,
            ber_defined=self.ber_defined,
            retained_fraction_empirical=self.retained_fraction_empirical,
            sift_rate=self.sift_rate,
        )
        return d


def _channel(alpha, scenario, rng):
    """Propagate complex coherent amplitudes through the scenario."""
    eta = scenario.eta
    kind = scenario.kind
    if kind in (AttackKind.BEAMSPLIT, AttackKind.BEAMSPLIT_QUADRATURE):
        return math.sqrt(eta) * alpha
    if kind is AttackKind.AMPLIFIED:
        g = scenario.g
        out = math.sqrt(g * scenario.mu) * alpha
        if g > 1:
            # amplified coherent state: thermal P-function with g - 1 photons
            s = math.sqrt((g - 1.0) / 2.0)
            out = out + s * (rng.standard_normal(alpha.shape) + 1j * rng.standard_normal(alpha.shape))
        return out
    if kind is AttackKind.CT:
        return _teleport_classically(math.sqrt(eta) * alpha, rng)
    if kind is AttackKind.CT_LOSS:
        return math.sqrt(eta) * _teleport_classically(alpha, rng)
    raise ValueError(f"unknown attack {kind!r}")


def _teleport_classically(alpha, rng):
    # 50:50 split, homodyne x on one arm and p on the other, resend sqrt(2) x estimate
    s = math.sqrt(VACUUM_VARIANCE)
    half = alpha / math.sqrt(2.0)
    xm = half.real + s * rng.standard_normal(alpha.shape)
    pm = half.imag + s * rng.standard_normal(alpha.shape)
    return math.sqrt(2.0) * (xm + 1j * pm)


def _sample_batch(cfg, rng, size):
    """Sifted outcomes of one batch: (x, alice_bit, k, sign)."""
    m = rng.integers(0, 4, size)
    k = rng.integers(1, 3, size)
    diff = m - k
    keep = (diff == 1) | (diff == -1)
    m, k = m[keep], k[keep]
    alpha = math.sqrt(cfg.n) * (1j ** m)
    received = _channel(alpha, cfg.scenario, rng)
    quad = np.where(k == 1, received.real, received.imag)
    x = quad + math.sqrt(VACUUM_VARIANCE) * rng.standard_normal(quad.shape)
    bit = m <= 1
    return x, bit, k


def _batch_sizes(cfg):
    full, rest = divmod(cfg.pulses, cfg.batch_size)
    return [cfg.batch_size] * full + ([rest] if rest else [])


def _iter_batches(cfg, workers=1):
    sizes = _batch_sizes(cfg)
    streams = np.random.SeedSequence(cfg.seed).spawn(len(sizes))

    def run(i):
        rng = np.random.Generator(np.random.PCG64(streams[i]))
        return _sample_batch(cfg, rng, sizes[i])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            yield from pool.map(run, range(len(sizes)))
    else:
        for i in range(len(sizes)):
            yield run(i)


def simulate(cfg: ProtocolRunConfig, workers: int = 1) -> SimRun:
    """Run the protocol; the result depends only on ``cfg``, not ``workers``."""
    amplitude = cfg.signal.amplitude
    sifted = retained = errors = 0
    s1 = s2 = 0.0
    basis = {1: [0, 0, 0], 2: [0, 0, 0]}
    for x, bit, k in _iter_batches(cfg, workers):
        one = x > cfg.x0
        zero = x < -cfg.x0
        kept = one | zero
        wrong = (one & ~bit) | (zero & bit)
        sifted += x.size
        retained += int(kept.sum())
        errors += int(wrong.sum())
        d = x - np.where(bit, amplitude, -amplitude)
        s1 += float(d.sum())
        s2 += float(np.dot(d, d))
        for kb in (1, 2):
            sel = k == kb
            basis[kb][0] += int(sel.sum())
            basis[kb][1] += int((kept & sel).sum())
            basis[kb][2] += int((wrong & sel).sum())
    if sifted > 1:
        var = (s2 - s1 * s1 / sifted) / (sifted - 1)
    else:
        var = math.nan
    by_basis = {
        f"k{kb}": {"sifted": v[0], "retained": v[1], "errors": v[2]} for kb, v in basis.items()
    }
    return SimRun(cfg.pulses, sifted, retained, errors, cfg.seed, var, by_basis)


def analytic_ber(p: SignalParams, x0: float) -> float:
    """Error probability among retained outcomes; NaN if nothing is retained."""
    if x0 < 0:
        raise ValueError(f"threshold must be non-negative, got {x0}")
    right = gaussian_tail(x0, p.amplitude, p.variance)
    wrong = gaussian_tail(x0, -p.amplitude, p.variance)
    total = right + wrong
    if total == 0.0:
        return math.nan
    return wrong / total


def analytic_retained_fraction(p: SignalParams, x0: float) -> float:
    """Fraction of sifted pulses with ``|x| > x0`` (both signs)."""
    return gaussian_tail(x0, p.amplitude, p.variance) + gaussian_tail(x0, -p.amplitude, p.variance)


@dataclass(frozen=True)
class DensityCheck:
    statistic: float
    dof: int
    p_value: float
    bins_used: int
    samples: int

    def passes(self, level: float = 0.999) -> bool:
        return self.statistic <= stats.chi2.ppf(level, self.dof)


def _mixture_cdf(edges, a, v):
    s = math.sqrt(v)
    # P(X <= t) for the two-component mixture, via upper tails
    upper = 0.5 * (stats.norm.sf(edges, a, s) + stats.norm.sf(edges, -a, s))
    return 1.0 - upper


def empirical_density_check(
    cfg: ProtocolRunConfig,
    bins: int = 50,
    min_expected: float = 10.0,
    workers: int = 1,
    reference: SignalParams | None = None,
) -> DensityCheck:
    """Chi-square test of sifted outcomes against the analytic outcome density.

    ``bins`` equal-width bins span ``+/-(amplitude + 6 sigma)`` with open
    overflow bins on both sides; adjacent bins are merged until each
    expects at least ``min_expected`` counts. ``reference`` overrides the
    density tested against (default: the scenario's own).
    """
    p = cfg.signal if reference is None else reference
    a, v = p.amplitude, p.variance
    half = a + 6.0 * p.sigma
    inner = np.linspace(-half, half, bins + 1)
    counts = np.zeros(bins + 2, dtype=np.int64)
    for x, _, _ in _iter_batches(cfg, workers):
        idx = np.searchsorted(inner, x, side="right")
        counts += np.bincount(idx, minlength=bins + 2)
    total = int(counts.sum())
    cdf = np.concatenate(([0.0], _mixture_cdf(inner, a, v), [1.0]))
    expected = total * np.diff(cdf)

    obs_m, exp_m = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(counts, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_m.append(acc_o)
            exp_m.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if exp_m:
            obs_m[-1] += acc_o
            exp_m[-1] += acc_e
        else:
            obs_m.append(acc_o)
            exp_m.append(acc_e)
    obs_m = np.asarray(obs_m)
    exp_m = np.asarray(exp_m)
    chi2 = float(np.sum((obs_m - exp_m) ** 2 / exp_m))
    dof = max(len(obs_m) - 1, 1)
    return DensityCheck(chi2, dof, float(stats.chi2.sf(chi2, dof)), len(obs_m), total)
