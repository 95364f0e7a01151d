"""flowpid: coupling-flow Gaussianizer for PID estimation pipelines.

Trains a Cartesian triple of invertible flows (f1, f2, fY) so that the
latent pairs (f1(X1), fY(Y)) and (f2(X2), fY(Y)) are close to Gaussian,
then exports the latents in the samples-CSV format the Gaussian PID
estimator CLI consumes. Also generates the discrete-target
specialized-interaction benchmark family.
"""

__version__ = "0.1.0"

from .errors import FlowpidError, TrainingError, ValidationError
from .flows import FlowConfig, build_flows
from .loss import flow_loss, gaussian_nll, marginal_loss
from .synth import TASKS, generate, write_dataset
from .train import (
    TrainRecipe,
    TrainResult,
    export_latents,
    load_checkpoint,
    save_checkpoint,
    train,
)

__all__ = [
    "__version__",
    "FlowpidError",
    "ValidationError",
    "TrainingError",
    "FlowConfig",
    "build_flows",
    "gaussian_nll",
    "marginal_loss",
    "flow_loss",
    "TrainRecipe",
    "TrainResult",
    "train",
    "save_checkpoint",
    "load_checkpoint",
    "export_latents",
    "TASKS",
    "generate",
    "write_dataset",
]
