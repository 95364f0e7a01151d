"""Training loop, checkpoint files, and latent export.

Data is standardized per column (the only preprocessing) and the
standardization statistics ride along in the checkpoint so export applies
the exact transform the flows were trained behind. Checkpoints are a
directory: `flows.pt` (state dicts), `ckpt.json` (architecture, recipe,
standardization stats), `loss_curve.csv` (per-epoch mean loss).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from . import data as dataio
from .errors import TrainingError, ValidationError
from .flows import FlowConfig, build_flows
from .loss import flow_loss

__all__ = [
    "TrainRecipe",
    "TrainResult",
    "train",
    "save_checkpoint",
    "load_checkpoint",
    "export_latents",
    "CKPT_FORMAT",
]

CKPT_FORMAT = "flowpid-ckpt-1"

# columns with sample std below this train as effectively constant; the
# floor only guards the divide, the covariance repair owns degeneracy
_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class TrainRecipe:
    """Optimization settings: Adam + cosine-annealed learning rate.

    Parameters
    ----------
    epochs : int
        Full passes over the data; also the annealing horizon.
    lr0 : float
        Initial learning rate.
    weight_decay : float
        Adam weight decay.
    batch : int
        Minibatch rows; at least 2 (the covariance MLE needs >= 2 rows).
        Trailing remainders smaller than 2 rows are dropped.
    seed : int
        Seeds both conditioner initialization and shuffling order.
    """

    epochs: int
    lr0: float = 1e-4
    weight_decay: float = 1e-4
    batch: int = 128
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.epochs, int) or self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs!r}")
        if not (self.lr0 > 0.0):
            raise ValidationError(f"lr0 must be positive, got {self.lr0!r}")
        if self.weight_decay < 0.0:
            raise ValidationError("weight_decay must be >= 0")
        if not isinstance(self.batch, int) or self.batch < 2:
            raise ValidationError(f"batch must be >= 2, got {self.batch!r}")


@dataclass
class TrainResult:
    """Trained flows plus everything needed to reapply them."""

    flows: tuple[torch.nn.Module, torch.nn.Module, torch.nn.Module]
    cfg: FlowConfig
    recipe: TrainRecipe
    mean: np.ndarray
    std: np.ndarray
    loss_curve: list[float] = field(default_factory=list)


def _standardize(values: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    return (values - mean) / std


def _split(t: torch.Tensor, cfg: FlowConfig) -> tuple[torch.Tensor, ...]:
    return torch.split(t, [cfg.d1, cfg.d2, cfg.dy], dim=1)


def train(values: np.ndarray, cfg: FlowConfig, recipe: TrainRecipe) -> TrainResult:
    """Fit the flow triple to samples laid out as (n, d1+d2+dy).

    Minibatch gradient descent on the pairwise Gaussian-marginal loss. A
    non-finite loss aborts with the epoch and step where it appeared.
    """
    values = np.asarray(values, dtype=np.float64)
    width = cfg.d1 + cfg.d2 + cfg.dy
    if values.ndim != 2 or values.shape[1] != width:
        raise ValidationError(
            f"samples shape {values.shape} does not match dims {cfg.dims}"
        )
    if values.shape[0] < 2:
        raise ValidationError("training needs at least 2 sample rows")
    if not np.isfinite(values).all():
        raise ValidationError("samples contain non-finite values")

    mean = values.mean(axis=0)
    std = np.maximum(values.std(axis=0), _STD_FLOOR)
    standardized = torch.from_numpy(_standardize(values, mean, std))

    torch.manual_seed(recipe.seed)
    f1, f2, fy = build_flows(cfg)
    params = list(f1.parameters()) + list(f2.parameters()) + list(fy.parameters())
    opt = torch.optim.Adam(params, lr=recipe.lr0, weight_decay=recipe.weight_decay)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=recipe.epochs)
    rng = np.random.default_rng(recipe.seed)

    n = standardized.shape[0]
    curve = []
    for epoch in range(recipe.epochs):
        order = torch.from_numpy(rng.permutation(n))
        epoch_losses = []
        for step, start in enumerate(range(0, n, recipe.batch)):
            rows = order[start : start + recipe.batch]
            if rows.shape[0] < 2:
                break
            x1, x2, y = _split(standardized[rows], cfg)
            z1, ld1 = f1(x1)
            z2, ld2 = f2(x2)
            zy, ldy = fy(y)
            try:
                loss = flow_loss(z1, z2, zy, ld1, ld2, ldy)
            except ValidationError as exc:
                raise TrainingError(
                    f"loss diverged at epoch {epoch}, step {step}: {exc}"
                ) from exc
            if not bool(torch.isfinite(loss)):
                raise TrainingError(
                    f"loss became non-finite at epoch {epoch}, step {step}"
                )
            opt.zero_grad()
            loss.backward()
            opt.step()
            epoch_losses.append(float(loss.detach()))
        sched.step()
        curve.append(float(np.mean(epoch_losses)))
    return TrainResult(flows=(f1, f2, fy), cfg=cfg, recipe=recipe,
                       mean=mean, std=std, loss_curve=curve)


def save_checkpoint(out_dir, result: TrainResult) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    f1, f2, fy = result.flows
    torch.save(
        {"f1": f1.state_dict(), "f2": f2.state_dict(), "fy": fy.state_dict()},
        out / "flows.pt",
    )
    meta = {
        "format": CKPT_FORMAT,
        "config": asdict(result.cfg),
        "recipe": asdict(result.recipe),
        "mean": result.mean.tolist(),
        "std": result.std.tolist(),
        "loss_curve": result.loss_curve,
    }
    with open(out / "ckpt.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    with open(out / "loss_curve.csv", "w", encoding="utf-8") as fh:
        fh.write("epoch,loss\n")
        for i, v in enumerate(result.loss_curve):
            fh.write(f"{i},{v:.17g}\n")


def load_checkpoint(ckpt_dir) -> TrainResult:
    ckpt = Path(ckpt_dir)
    meta_path = ckpt / "ckpt.json"
    if not meta_path.is_file():
        raise ValidationError(f"{ckpt}: not a checkpoint (missing ckpt.json)")
    try:
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{meta_path}: invalid JSON: {exc}") from exc
    if meta.get("format") != CKPT_FORMAT:
        raise ValidationError(
            f"{meta_path}: format tag {meta.get('format')!r}, expected {CKPT_FORMAT!r}"
        )
    try:
        cfg = FlowConfig(**meta["config"])
        recipe = TrainRecipe(**meta["recipe"])
        mean = np.asarray(meta["mean"], dtype=np.float64)
        std = np.asarray(meta["std"], dtype=np.float64)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{meta_path}: malformed checkpoint: {exc}") from exc
    width = cfg.d1 + cfg.d2 + cfg.dy
    if mean.shape != (width,) or std.shape != (width,):
        raise ValidationError(f"{meta_path}: stats length does not match dims")
    flows = build_flows(cfg)
    states = torch.load(ckpt / "flows.pt", weights_only=True)
    for module, key in zip(flows, ("f1", "f2", "fy")):
        module.load_state_dict(states[key])
    return TrainResult(flows=flows, cfg=cfg, recipe=recipe, mean=mean, std=std,
                       loss_curve=list(meta.get("loss_curve", [])))


def export_latents(result: TrainResult, values: np.ndarray, out_path) -> None:
    """Push samples through the trained flows and write the latents CSV.

    Output column layout matches the input (x1_*, x2_*, y_*), so the file
    feeds the PID estimator CLI directly.
    """
    values = np.asarray(values, dtype=np.float64)
    cfg = result.cfg
    width = cfg.d1 + cfg.d2 + cfg.dy
    if values.ndim != 2 or values.shape[1] != width:
        raise ValidationError(
            f"samples shape {values.shape} does not match dims {cfg.dims}"
        )
    standardized = torch.from_numpy(
        _standardize(values, result.mean, result.std)
    )
    f1, f2, fy = result.flows
    with torch.no_grad():
        x1, x2, y = _split(standardized, cfg)
        z1, _ = f1(x1)
        z2, _ = f2(x2)
        zy, _ = fy(y)
        latents = torch.cat([z1, z2, zy], dim=1).numpy()
    dataio.write_samples(out_path, latents, cfg.dims)
