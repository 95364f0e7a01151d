"""Exact partial information decomposition for Gaussian systems.

Pipeline: samples or a covariance model -> broadcast-channel reduction ->
projected-gradient minimization of the joint MI over the noise coupling ->
redundancy/unique/synergy assembly. Synthetic benchmark generators with
analytic oracles and a CLI (`gpid`) ride along.
"""

from .errors import (
    ContractError,
    DomainError,
    GpidError,
    IntegrityError,
    ModelError,
    NumericalError,
    ValidationError,
)
from .types import CovarianceModel, SampleMatrix, SpdFactor
from .gauss import (
    estimate_covariance,
    gaussian_entropy,
    gaussian_mi,
    mi_from_model,
    psd_repair,
    total_mi_from_model,
    whiten_transform,
)
from .channel import (
    BroadcastChannel,
    NoiseCrossCov,
    reduce_to_channel,
    true_noise_cross_cov,
)
from .solver import (
    SolverConfig,
    SolverResult,
    gradient,
    init_sigma,
    objective,
    project,
    solve,
)
from .assemble import (
    PidResult,
    compose_additive,
    mmi_pid,
    pid_distance,
    pid_from_solution,
)
from .synth import (
    SynthInstance,
    SynthSpec,
    make_instance,
    sample_instance,
    transform_samples,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "GpidError",
    "ValidationError",
    "NumericalError",
    "ModelError",
    "DomainError",
    "ContractError",
    "IntegrityError",
    "SampleMatrix",
    "CovarianceModel",
    "SpdFactor",
    "estimate_covariance",
    "psd_repair",
    "whiten_transform",
    "gaussian_entropy",
    "gaussian_mi",
    "mi_from_model",
    "total_mi_from_model",
    "BroadcastChannel",
    "NoiseCrossCov",
    "reduce_to_channel",
    "true_noise_cross_cov",
    "SolverConfig",
    "SolverResult",
    "objective",
    "gradient",
    "project",
    "init_sigma",
    "solve",
    "PidResult",
    "pid_from_solution",
    "mmi_pid",
    "compose_additive",
    "pid_distance",
    "SynthSpec",
    "SynthInstance",
    "make_instance",
    "sample_instance",
    "transform_samples",
]
