"""Synthetic Gaussian benchmark families with analytic oracles.

Four generator variants, each emitting an exact joint covariance (never a
sampled one) plus, where a closed form exists, the ground-truth decomposition:

  canonical1d   three scalar systems (uniq_red, uniq_syn, red_syn); the MMI
                rule is exact for all-scalar Gaussians, so oracle_kind is
                exact_mmi
  coop_gain     two independent 2-receiver subsystems with gains (alpha, 1)
                and (1, 3); oracle is the sum of per-scalar MMI results
  rotation      same gains but X1 reads the target through a rotation
                R(theta); subsystems decouple only at theta in {0, pi/2},
                so the oracle attaches at the endpoints alone
  doubling      k independent copies of a base instance; additivity scales
                the base oracle by k

Sampling uses a counter-based Philox generator seeded from the spec, so
sample files are reproducible bit-for-bit across platforms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assemble import PidResult, compose_additive, mmi_pid
from .errors import ValidationError
from .types import CovarianceModel, SampleMatrix, SpdFactor

__all__ = [
    "SynthSpec",
    "SynthInstance",
    "make_instance",
    "sample_instance",
    "transform_samples",
]

_VARIANTS = ("canonical1d", "coop_gain", "rotation", "doubling")
_CASES = ("uniq_red", "uniq_syn", "red_syn")
_ORACLE_KINDS = ("exact_mmi", "additive_mmi", "endpoint_only", "none")
_BLOCKS = ("x1", "x2", "y")
_TRANSFORMS = ("identity", "cube", "cbrt")

# endpoint match tolerance for theta; the sweep grid hits 0 and pi/2 exactly
_THETA_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SynthSpec:
    """Benchmark descriptor: variant name, its parameters, and a sample seed.

    params keys by variant:
      canonical1d  case (one of uniq_red/uniq_syn/red_syn), sigma2, rho
                   (rho optional, default 0; unused by uniq_red)
      coop_gain    alpha
      rotation     theta (radians in [0, pi/2])
      doubling     base (nested SynthSpec), k (power of two)
    """

    variant: str
    params: dict
    seed: int = 0

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValidationError(f"unknown variant {self.variant!r}")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2**64):
            raise ValidationError("seed must be a 64-bit unsigned integer")
        p = dict(self.params)
        if self.variant == "canonical1d":
            case = p.pop("case", None)
            if case not in _CASES:
                raise ValidationError(f"unknown canonical case {case!r}")
            sigma2 = p.pop("sigma2", None)
            if not isinstance(sigma2, (int, float)) or not sigma2 > 0:
                raise ValidationError("sigma2 must be positive")
            rho = p.pop("rho", 0.0)
            if not isinstance(rho, (int, float)) or not (-1.0 < rho < 1.0):
                raise ValidationError("rho must lie in (-1, 1)")
        elif self.variant == "coop_gain":
            alpha = p.pop("alpha", None)
            if not isinstance(alpha, (int, float)) or not math.isfinite(alpha):
                raise ValidationError("alpha must be a finite number")
        elif self.variant == "rotation":
            theta = p.pop("theta", None)
            if not isinstance(theta, (int, float)) or \
                    not (0.0 <= theta <= math.pi / 2 + _THETA_TOL):
                raise ValidationError("theta must lie in [0, pi/2]")
        else:
            base = p.pop("base", None)
            if not isinstance(base, SynthSpec):
                raise ValidationError("doubling base must be a SynthSpec")
            k = p.pop("k", None)
            if not isinstance(k, int) or k < 1 or (k & (k - 1)) != 0:
                raise ValidationError("k must be a power of two, at least 1")
        if p:
            raise ValidationError(
                f"unexpected params for {self.variant}: {sorted(p)}"
            )

    def to_json_dict(self) -> dict:
        params = dict(self.params)
        if self.variant == "doubling":
            params["base"] = params["base"].to_json_dict()
        return {"variant": self.variant, "params": params, "seed": self.seed}

    @staticmethod
    def from_json_dict(obj: dict) -> "SynthSpec":
        if not isinstance(obj, dict):
            raise ValidationError("spec JSON must be an object")
        extra = set(obj) - {"variant", "params", "seed"}
        if extra:
            raise ValidationError(f"unexpected spec keys: {sorted(extra)}")
        params = obj.get("params")
        if not isinstance(params, dict):
            raise ValidationError("spec params must be an object")
        params = dict(params)
        if obj.get("variant") == "doubling" and isinstance(params.get("base"), dict):
            params["base"] = SynthSpec.from_json_dict(params["base"])
        seed = obj.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ValidationError("seed must be an integer")
        return SynthSpec(variant=obj.get("variant"), params=params, seed=seed)


@dataclass(frozen=True, eq=False)
class SynthInstance:
    """Exact covariance plus optional ground truth for one benchmark point."""

    cov: CovarianceModel
    oracle: PidResult | None
    oracle_kind: str

    def __post_init__(self):
        if self.oracle_kind not in _ORACLE_KINDS:
            raise ValidationError(f"unknown oracle kind {self.oracle_kind!r}")


def _canonical_cov_mis(case: str, s2: float, rho: float):
    """3x3 covariance (X1, X2, Y order) and (i1, i2, ip_total) in nats."""
    if case == "uniq_red":
        # X1 = Y + n1 (unit noise), X2 = X1 + n2 with Var(n2) = sigma2
        sigma = np.array([
            [2.0, 2.0, 1.0],
            [2.0, 2.0 + s2, 1.0],
            [1.0, 1.0, 1.0],
        ])
        i1 = 0.5 * math.log(2.0)
        i2 = 0.5 * math.log((2.0 + s2) / (1.0 + s2))
        ip = i1
    elif case == "uniq_syn":
        # X1 = Y + n1, X2 = n2; Var(n_i) = sigma2, Corr(n1, n2) = rho
        sigma = np.array([
            [1.0 + s2, rho * s2, 1.0],
            [rho * s2, s2, 0.0],
            [1.0, 0.0, 1.0],
        ])
        i1 = 0.5 * math.log((1.0 + s2) / s2)
        i2 = 0.0
        om = 1.0 - rho * rho
        ip = 0.5 * math.log((1.0 + s2 * om) / (s2 * om))
    else:
        # X1 = Y + n1, X2 = Y + n2; Var(n_i) = sigma2, Corr(n1, n2) = rho
        sigma = np.array([
            [1.0 + s2, 1.0 + rho * s2, 1.0],
            [1.0 + rho * s2, 1.0 + s2, 1.0],
            [1.0, 1.0, 1.0],
        ])
        i1 = i2 = 0.5 * math.log((1.0 + s2) / s2)
        om = 1.0 - rho * rho
        num = (1.0 + s2) ** 2 - (1.0 + rho * s2) ** 2
        ip = 0.5 * math.log(num / (s2 * s2 * om))
    return sigma, (i1, i2, ip)


def _mmi_from_snr_pairs(pairs) -> PidResult:
    """Additive oracle for independent scalar subsystems given (snr1, snr2)."""
    parts = []
    for s1, s2 in pairs:
        i1 = 0.5 * math.log1p(s1)
        i2 = 0.5 * math.log1p(s2)
        ip = 0.5 * math.log1p(s1 + s2)
        parts.append(mmi_pid(i1, i2, ip))
    return compose_additive(parts)


def _gain_cov(h1: np.ndarray, h2: np.ndarray) -> CovarianceModel:
    """Joint covariance of X_i = H_i Y + n_i with unit noise, Y ~ N(0, I)."""
    d1, dy = h1.shape
    d2 = h2.shape[0]
    return CovarianceModel.from_blocks(
        sx1=h1 @ h1.T + np.eye(d1),
        sx2=h2 @ h2.T + np.eye(d2),
        sy=np.eye(dy),
        c1y=h1,
        c2y=h2,
        c12=h1 @ h2.T,
    )


def make_instance(spec: SynthSpec) -> SynthInstance:
    """Materialize the exact covariance and oracle for a benchmark spec."""
    p = spec.params
    if spec.variant == "canonical1d":
        sigma, (i1, i2, ip) = _canonical_cov_mis(
            p["case"], float(p["sigma2"]), float(p.get("rho", 0.0))
        )
        cov = CovarianceModel(d1=1, d2=1, dy=1, mean=np.zeros(3), sigma=sigma)
        return SynthInstance(cov=cov, oracle=mmi_pid(i1, i2, ip),
                             oracle_kind="exact_mmi")
    if spec.variant == "coop_gain":
        a = float(p["alpha"])
        h1 = np.diag([a, 1.0])
        h2 = np.diag([1.0, 3.0])
        oracle = _mmi_from_snr_pairs([(a * a, 1.0), (1.0, 9.0)])
        return SynthInstance(cov=_gain_cov(h1, h2), oracle=oracle,
                             oracle_kind="additive_mmi")
    if spec.variant == "rotation":
        th = float(p["theta"])
        rot = np.array([
            [math.cos(th), -math.sin(th)],
            [math.sin(th), math.cos(th)],
        ])
        h1 = np.diag([3.0, 1.0]) @ rot
        h2 = np.diag([1.0, 3.0])
        oracle = None
        if abs(th) <= _THETA_TOL:
            oracle = _mmi_from_snr_pairs([(9.0, 1.0), (1.0, 9.0)])
        elif abs(th - math.pi / 2) <= _THETA_TOL:
            oracle = _mmi_from_snr_pairs([(1.0, 1.0), (9.0, 9.0)])
        return SynthInstance(cov=_gain_cov(h1, h2), oracle=oracle,
                             oracle_kind="endpoint_only")
    base = make_instance(p["base"])
    k = int(p["k"])
    bc = base.cov
    eye = np.eye(k)
    cov = CovarianceModel.from_blocks(
        sx1=np.kron(eye, bc.sigma_x1),
        sx2=np.kron(eye, bc.sigma_x2),
        sy=np.kron(eye, bc.sigma_y),
        c1y=np.kron(eye, bc.cross_x1y),
        c2y=np.kron(eye, bc.cross_x2y),
        c12=None if bc.pairwise_only else np.kron(eye, bc.cross_x1x2),
    )
    if base.oracle is None:
        return SynthInstance(cov=cov, oracle=None, oracle_kind="none")
    oracle = compose_additive([base.oracle] * k)
    return SynthInstance(cov=cov, oracle=oracle, oracle_kind="additive_mmi")


def sample_instance(inst: SynthInstance, n: int, seed: int) -> SampleMatrix:
    """Draw n rows from the instance's Gaussian, columns ordered X1, X2, Y."""
    if not isinstance(n, int) or n < 1:
        raise ValidationError("sample count must be a positive integer")
    cov = inst.cov
    fac = SpdFactor.from_matrix(cov.sigma)
    rng = np.random.Generator(np.random.Philox(seed))
    z = rng.standard_normal((n, cov.sigma.shape[0]))
    values = cov.mean + z @ fac.lower.T
    return SampleMatrix(d1=cov.d1, d2=cov.d2, dy=cov.dy, values=values)


def transform_samples(samples: SampleMatrix, ids: dict) -> SampleMatrix:
    """Apply identity/cube/cbrt per block; cube and cbrt invert each other."""
    extra = set(ids) - set(_BLOCKS)
    if extra:
        raise ValidationError(f"unknown blocks: {sorted(extra)}")
    values = samples.values.copy()
    spans = {
        "x1": slice(0, samples.d1),
        "x2": slice(samples.d1, samples.d1 + samples.d2),
        "y": slice(samples.d1 + samples.d2, samples.d1 + samples.d2 + samples.dy),
    }
    for block, name in ids.items():
        if name not in _TRANSFORMS:
            raise ValidationError(f"unknown transform {name!r} for {block}")
        if name == "cube":
            values[:, spans[block]] **= 3
        elif name == "cbrt":
            values[:, spans[block]] = np.cbrt(values[:, spans[block]])
    return SampleMatrix(d1=samples.d1, d2=samples.d2, dy=samples.dy,
                        values=values)
