"""Turn marginal MIs and the solver minimum into the PID quadruple.

All constructors here work in nats and record the unit on the result;
`PidResult.converted` rescales to bits for reporting. The consistency
equations r + u1 = i1 and r + u2 = i2 hold by construction; a violation
beyond 1e-6 means the inputs came from a buggy solve or reduction, so it
raises IntegrityError rather than passing silently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .channel import BroadcastChannel
from .errors import ContractError, IntegrityError, ValidationError
from .solver import SolverResult

__all__ = [
    "PidResult",
    "pid_from_solution",
    "mmi_pid",
    "compose_additive",
    "pid_distance",
]

_UNITS = ("nats", "bits")
_METHODS = ("solver", "mmi_oracle", "composed")

# raw components may dip this far below zero from round-off; anything worse
# signals a real bug upstream
_NEG_TOL = 1e-7
_CONSISTENCY_TOL = 1e-6


@dataclass(frozen=True)
class PidResult:
    """One decomposition: redundancy r, uniques u1/u2, synergy s.

    r, u1, u2, s are the reported (clamped-at-zero) components; `raw` keeps
    the unclamped values so drift stays observable. s is None when the total
    joint MI was unavailable (pairwise-only input). i1, i2, min_mi, ip_total
    are diagnostics in the same unit.
    """

    r: float
    u1: float
    u2: float
    s: float | None
    unit: str
    i1: float
    i2: float
    min_mi: float
    ip_total: float | None
    method: str
    raw: tuple[float, float, float, float | None]

    def __post_init__(self):
        if self.unit not in _UNITS:
            raise ValidationError(f"unknown unit {self.unit!r}")
        if self.method not in _METHODS:
            raise ValidationError(f"unknown method {self.method!r}")
        vals = [self.r, self.u1, self.u2, self.i1, self.i2, self.min_mi]
        if self.s is not None:
            vals.append(self.s)
        if self.ip_total is not None:
            vals.append(self.ip_total)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("PID components must be finite")
        for name, v in zip(("r", "u1", "u2", "s"), self.raw):
            if v is not None and v < -_NEG_TOL:
                raise IntegrityError(
                    f"component {name} is {v:.3e}, below the -1e-7 floor"
                )
        if abs((self.r + self.u1) - self.i1) > _CONSISTENCY_TOL:
            raise IntegrityError(
                f"r + u1 = {self.r + self.u1:.12g} but i1 = {self.i1:.12g}"
            )
        if abs((self.r + self.u2) - self.i2) > _CONSISTENCY_TOL:
            raise IntegrityError(
                f"r + u2 = {self.r + self.u2:.12g} but i2 = {self.i2:.12g}"
            )
        if self.s is not None and self.ip_total is not None:
            if abs(self.total - self.ip_total) > _CONSISTENCY_TOL:
                raise IntegrityError(
                    f"component sum {self.total:.12g} != ip_total "
                    f"{self.ip_total:.12g}"
                )

    @property
    def total(self) -> float:
        return self.r + self.u1 + self.u2 + (self.s if self.s is not None else 0.0)

    @property
    def components(self) -> dict:
        out = {"r": self.r, "u1": self.u1, "u2": self.u2}
        if self.s is not None:
            out["s"] = self.s
        return out

    def converted(self, unit: str) -> "PidResult":
        """Same result expressed in the requested unit."""
        if unit not in _UNITS:
            raise ValidationError(f"unknown unit {unit!r}")
        if unit == self.unit:
            return self
        c = 1.0 / math.log(2.0) if unit == "bits" else math.log(2.0)
        conv = lambda v: None if v is None else v * c
        return replace(
            self,
            r=self.r * c, u1=self.u1 * c, u2=self.u2 * c, s=conv(self.s),
            unit=unit, i1=self.i1 * c, i2=self.i2 * c,
            min_mi=self.min_mi * c, ip_total=conv(self.ip_total),
            raw=tuple(conv(v) for v in self.raw),
        )


def _finish(r, u1, u2, s, *, unit, i1, i2, min_mi, ip_total, method):
    raw = (float(r), float(u1), float(u2), None if s is None else float(s))
    clamp = lambda v: None if v is None else max(v, 0.0)
    return PidResult(
        r=clamp(raw[0]), u1=clamp(raw[1]), u2=clamp(raw[2]), s=clamp(raw[3]),
        unit=unit, i1=float(i1), i2=float(i2), min_mi=float(min_mi),
        ip_total=None if ip_total is None else float(ip_total),
        method=method, raw=raw,
    )


def pid_from_solution(
    ch: BroadcastChannel,
    res: SolverResult,
    allow_unconverged: bool = False,
) -> PidResult:
    """Decomposition from a solved channel: R = i1 + i2 - min_mi, etc.

    s is omitted (None) when the channel lacks ip_total. An unconverged
    solve is rejected unless allow_unconverged is set; when accepted, its
    min_mi is clamped into the feasible interval [max(i1, i2), i1 + i2]
    (and below ip_total when known) so the reported components stay
    within bounds. Converged results are never adjusted.
    """
    if not res.converged and not allow_unconverged:
        raise ContractError(
            f"solver stopped by {res.stop_reason} after {res.iterations} "
            "iterations; pass allow_unconverged=True to assemble anyway"
        )
    i1, i2, m = ch.i1, ch.i2, res.min_mi
    if not res.converged:
        hi = i1 + i2 if ch.ip_total is None else min(i1 + i2, ch.ip_total)
        m = min(max(m, i1, i2), max(hi, i1, i2))
    r = i1 + i2 - m
    u1 = i1 - r
    u2 = i2 - r
    s = None if ch.ip_total is None else ch.ip_total - m
    return _finish(r, u1, u2, s, unit="nats", i1=i1, i2=i2, min_mi=m,
                   ip_total=ch.ip_total, method="solver")


def mmi_pid(i1: float, i2: float, ip_total: float, unit: str = "nats") -> PidResult:
    """Minimal-MI decomposition: R = min(i1, i2), exact for scalar systems."""
    if not (math.isfinite(i1) and math.isfinite(i2) and math.isfinite(ip_total)):
        raise ValidationError("MI inputs must be finite")
    if i1 < 0.0 or i2 < 0.0 or ip_total < 0.0:
        raise ValidationError("MI inputs must be nonnegative")
    hi = max(i1, i2)
    if ip_total < hi - 1e-9:
        raise ValidationError(
            f"ip_total {ip_total:.12g} is below max(i1, i2) = {hi:.12g}"
        )
    r = min(i1, i2)
    return _finish(r, i1 - r, i2 - r, ip_total - hi, unit=unit, i1=i1, i2=i2,
                   min_mi=hi, ip_total=ip_total, method="mmi_oracle")


def compose_additive(parts: list[PidResult]) -> PidResult:
    """Componentwise sum; valid when the parts are independent subsystems."""
    if not parts:
        raise ValidationError("compose_additive needs at least one part")
    unit = parts[0].unit
    if any(p.unit != unit for p in parts):
        raise ValidationError("parts mix units; convert before composing")
    have_s = all(p.s is not None for p in parts)
    have_ip = all(p.ip_total is not None for p in parts)
    return _finish(
        sum(p.r for p in parts),
        sum(p.u1 for p in parts),
        sum(p.u2 for p in parts),
        sum(p.s for p in parts) if have_s else None,
        unit=unit,
        i1=sum(p.i1 for p in parts),
        i2=sum(p.i2 for p in parts),
        min_mi=sum(p.min_mi for p in parts),
        ip_total=sum(p.ip_total for p in parts) if have_ip else None,
        method="composed",
    )


def pid_distance(a: PidResult, b: PidResult) -> float:
    """L1 distance between total-normalized quadruples (unit-free in [0, 2])."""
    if a.unit != b.unit:
        raise ValidationError("results have different units")

    def norm(p: PidResult):
        vec = (p.r, p.u1, p.u2, p.s if p.s is not None else 0.0)
        t = sum(vec)
        return tuple(v / t for v in vec) if t > 0.0 else (0.0,) * 4

    return float(sum(abs(x - y) for x, y in zip(norm(a), norm(b))))
