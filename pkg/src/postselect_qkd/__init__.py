"""Security analysis of postselected four-state coherent-state QKD."""

__version__ = "0.1.0"

from .attacks import (
    AttackKind,
    AttackScenario,
    GaussianMixtureChannel,
    Security,
    amplified_beamsplit,
    beamsplit_bound,
    ct_security_condition,
    distance_bound,
    eta_from_distance,
    intercept_resend_leak,
    mixture_channel_stats,
    quadrature_eve_bound,
)
from .core import (
    VACUUM_VARIANCE,
    IntegrationError,
    SignalParams,
    gaussian_pdf,
    gaussian_tail,
    integrate_semi_infinite,
    outcome_density,
)
from .information import conditional_prob, i_ab, renyi_binary_pure, renyi_opt, shannon_gain
from .keygain import GainResult, OptimizationResult, optimize_gain, secure_key_gain, threshold_tilde
from .simulator import (
    ProtocolRunConfig,
    SimRun,
    analytic_ber,
    analytic_retained_fraction,
    empirical_density_check,
    simulate,
)
