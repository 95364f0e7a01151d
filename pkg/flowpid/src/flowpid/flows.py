"""Invertible per-modality maps with tractable log-det Jacobians.

Vectors of width >= 2 get a stack of affine coupling blocks: each block
splits the vector into halves, leaves one half untouched, and applies an
elementwise affine map to the other half whose scale and shift come from an
MLP conditioned on the untouched half. The log-determinant is the sum of the
log-scales, and the inverse is exact because the conditioning half passes
through unchanged. Blocks alternate which half is transformed, so the
composition touches every coordinate while the block permutation composes to
the identity.

Width-1 variables cannot be split, so they get a pointwise monotone map:
piecewise-affine with fixed knots and learned positive slopes. Its
log-derivative is the log-slope of the active segment and its inverse is
computed segment by segment.

Every map starts as the exact identity: coupling conditioners have
zero-initialized final layers and the monotone map starts with unit slopes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

from .errors import ValidationError

__all__ = [
    "FlowConfig",
    "AffineCoupling",
    "CouplingStack",
    "MonotoneMap",
    "build_flows",
]


@dataclass(frozen=True)
class FlowConfig:
    """Architecture knobs for the three per-modality flows.

    Parameters
    ----------
    d1, d2, dy : int
        Widths of the X1, X2, and Y blocks.
    blocks : int
        Coupling blocks per flow (ignored by width-1 flows).
    hidden : int
        Width of the single hidden layer in each conditioner MLP.
    permute : bool
        Alternate the transformed half between blocks. Disabling this
        leaves half the coordinates untouched by a coupling stack; it
        exists as an ablation knob, not a recommended setting.
    """

    d1: int
    d2: int
    dy: int
    blocks: int = 6
    hidden: int = 64
    permute: bool = True

    def __post_init__(self):
        for name, d in (("d1", self.d1), ("d2", self.d2), ("dy", self.dy)):
            if not isinstance(d, int) or d < 1:
                raise ValidationError(f"{name} must be a positive integer, got {d!r}")
        if not isinstance(self.blocks, int) or self.blocks < 1:
            raise ValidationError(f"blocks must be >= 1, got {self.blocks!r}")
        if not isinstance(self.hidden, int) or self.hidden < 8:
            raise ValidationError(f"hidden must be >= 8, got {self.hidden!r}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.d1, self.d2, self.dy)


class _Conditioner(nn.Module):
    """MLP producing (raw_scale, shift) for the transformed half.

    The final layer is zero-initialized so the owning coupling block is the
    identity map at construction time. The first layer gets unit-scale
    weights and biases spread over +-6: standardized heavy-tailed inputs
    put most of their structure far outside the +-1 band where default
    initialization concentrates every ReLU kink, and tail behavior is
    unlearnable until some kink reaches it.
    """

    def __init__(self, din: int, hidden: int, dout: int):
        super().__init__()
        self.body = nn.Sequential(
            nn.Linear(din, hidden),
            nn.ReLU(),
            nn.Linear(hidden, 2 * dout),
        )
        first = self.body[0]
        nn.init.normal_(first.weight, std=1.0)
        nn.init.uniform_(first.bias, -6.0, 6.0)
        last = self.body[-1]
        nn.init.zeros_(last.weight)
        nn.init.zeros_(last.bias)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        raw_scale, shift = self.body(x).chunk(2, dim=1)
        return raw_scale, shift


#: Bound on each per-coordinate log-scale inside a coupling block. Undoing
#: a cubic distortion needs local contractions near exp(-4); a +-1 bound is
#: too tight for a six-block stack while an unbounded scale destabilizes
#: early training, so the log-scale saturates smoothly at +-3 per block.
LOG_SCALE_CAP = 3.0


class AffineCoupling(nn.Module):
    """One coupling block: y_active = x_active * exp(s) + t.

    The vector is split at floor(d/2). With flip=False the low half
    conditions and the high half is transformed; flip=True swaps the roles.
    The log-scale s is bounded to (-LOG_SCALE_CAP, LOG_SCALE_CAP) by a
    rescaled tanh, keeping deep stacks numerically tame without limiting
    the composition much.
    """

    def __init__(self, d: int, hidden: int, flip: bool):
        super().__init__()
        if d < 2:
            raise ValidationError(f"coupling needs width >= 2, got {d}")
        self.d = d
        self.flip = flip
        self.split = d // 2
        din = d - self.split if flip else self.split
        dout = d - din
        self.net = _Conditioner(din, hidden, dout)

    def _halves(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        lo, hi = x[:, : self.split], x[:, self.split :]
        return (hi, lo) if self.flip else (lo, hi)

    def _join(self, passive: torch.Tensor, active: torch.Tensor) -> torch.Tensor:
        parts = (active, passive) if self.flip else (passive, active)
        return torch.cat(parts, dim=1)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        passive, active = self._halves(x)
        raw_scale, shift = self.net(passive)
        log_scale = LOG_SCALE_CAP * torch.tanh(raw_scale / LOG_SCALE_CAP)
        y_active = active * torch.exp(log_scale) + shift
        return self._join(passive, y_active), log_scale.sum(dim=1)

    @torch.no_grad()
    def inverse(self, y: torch.Tensor) -> torch.Tensor:
        passive, active = self._halves(y)
        raw_scale, shift = self.net(passive)
        log_scale = LOG_SCALE_CAP * torch.tanh(raw_scale / LOG_SCALE_CAP)
        x_active = (active - shift) * torch.exp(-log_scale)
        return self._join(passive, x_active)


class CouplingStack(nn.Module):
    """Sequence of coupling blocks with alternating transformed halves."""

    def __init__(self, d: int, blocks: int, hidden: int, permute: bool = True):
        super().__init__()
        self.d = d
        self.layers = nn.ModuleList(
            AffineCoupling(d, hidden, flip=permute and i % 2 == 1)
            for i in range(blocks)
        )

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        logdet = x.new_zeros(x.shape[0])
        for layer in self.layers:
            x, ld = layer(x)
            logdet = logdet + ld
        return x, logdet

    @torch.no_grad()
    def inverse(self, y: torch.Tensor) -> torch.Tensor:
        for layer in reversed(self.layers):
            y = layer.inverse(y)
        return y


class MonotoneMap(nn.Module):
    """Pointwise strictly increasing map for width-1 variables.

    f(x) = bias + sum_k slope_k * |segment_k intersected with [0, x]| with
    slope_k = exp(a_k) over fixed knots, so f is continuous piecewise-affine
    with positive slopes, log|f'(x)| is the active segment's a_k, and the
    inverse is exact. All parameters start at zero: f = identity.
    """

    KNOTS = 15
    SPAN = 3.0

    def __init__(self):
        super().__init__()
        knots = torch.linspace(-self.SPAN, self.SPAN, self.KNOTS)
        self.register_buffer("knots", knots)
        # segment k covers (knots[k-1], knots[k]); 0 and KNOTS are the tails
        self.register_buffer("seg_lo", torch.cat([knots.new_full((1,), -torch.inf), knots]))
        self.register_buffer("seg_hi", torch.cat([knots, knots.new_full((1,), torch.inf)]))
        self.log_slopes = nn.Parameter(torch.zeros(self.KNOTS + 1))
        self.bias = nn.Parameter(torch.zeros(1))

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        if x.ndim != 2 or x.shape[1] != 1:
            raise ValidationError(f"monotone map expects (n, 1), got {tuple(x.shape)}")
        seg = torch.clamp(x, self.seg_lo, self.seg_hi) - torch.clamp(
            torch.zeros_like(x), self.seg_lo, self.seg_hi
        )
        slopes = torch.exp(self.log_slopes)
        y = self.bias + seg @ slopes.unsqueeze(1)
        idx = torch.searchsorted(self.knots, x.reshape(-1).contiguous())
        return y, self.log_slopes[idx]

    @torch.no_grad()
    def inverse(self, y: torch.Tensor) -> torch.Tensor:
        # anchor each output segment at its left knot image and undo the
        # affine piece; tails reuse the nearest knot as anchor
        knot_images, _ = self.forward(self.knots.unsqueeze(1))
        knot_images = knot_images.reshape(-1)
        flat = y.reshape(-1).contiguous()
        seg = torch.searchsorted(knot_images, flat)
        anchor = torch.clamp(seg - 1, min=0)
        slopes = torch.exp(self.log_slopes)
        x = self.knots[anchor] + (flat - knot_images[anchor]) / slopes[seg]
        return x.reshape(y.shape)


def build_flows(cfg: FlowConfig) -> tuple[nn.Module, nn.Module, nn.Module]:
    """Construct the (f1, f2, fY) triple for the configured block widths.

    Uses torch's global RNG for conditioner initialization; seed it first
    for reproducible flows. Modules are float64: the networks are small, and
    double precision keeps round trips and the batch-MLE Cholesky well clear
    of the invertibility tolerance.
    """
    def one(d: int) -> nn.Module:
        if d == 1:
            return MonotoneMap().double()
        return CouplingStack(d, cfg.blocks, cfg.hidden, cfg.permute).double()

    return one(cfg.d1), one(cfg.d2), one(cfg.dy)
