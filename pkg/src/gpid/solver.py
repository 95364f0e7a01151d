"""Projected-gradient solver for the minimal joint mutual information.

Minimizes logdet(G(sigma_off)) - logdet(Sigma_n) over the noise cross block
sigma_off, subject to the spectral feasibility cap ||sigma_off||_2 <= 1.
`solve` returns the minimizing cross covariance together with min_mi =
objective/2 in nats; downstream assembly turns that into a decomposition.

Two interchangeable kernels run the inner loop: a compiled extension
(gpid._loop) and a numpy reference (gpid._loop_py). Selection happens at
import in gpid._kernels; per-call override via SolverConfig.kernel.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from weakref import WeakKeyDictionary

import numpy as np
import scipy.linalg as sla

from . import _loop_py
from ._kernels import resolve_kernel
from .channel import BroadcastChannel
from .errors import DomainError, NumericalError, ValidationError

__all__ = [
    "SolverConfig",
    "SolverResult",
    "objective",
    "gradient",
    "project",
    "init_sigma",
    "solve",
]


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs for the projected RProp loop.

    eta0      initial per-entry step size
    alpha     global step decay, applied as alpha**iteration
    beta      sign-agreement adaptation factor (grow 1/beta, shrink beta)
    eta_min, eta_max
              clipping bounds on the per-entry rates; movement is bounded
              by the spectral projection regardless, the bounds just keep
              the adaptation state finite and revivable
    max_iters total update budget: the loop runs first, any leftover is
              available to the monotone polish phase
    obj_tol   relative objective tolerance; ten consecutive calm iterations
              stop the loop
    grad_tol  sup-norm gradient stop, checked only on iterates whose
              projection did not clamp
    sv_eps    feasibility margin; singular values are capped at 1 - sv_eps
    kernel    "auto" | "compiled" | "python"
    record_trace  keep the per-iteration objective curve in the result
    """

    eta0: float = 1e-3
    alpha: float = 0.999
    beta: float = 0.9
    eta_min: float = 1e-15
    eta_max: float = 1e12
    max_iters: int = 50_000
    obj_tol: float = 1e-12
    grad_tol: float = 1e-10
    sv_eps: float = 1e-9
    kernel: str = "auto"
    record_trace: bool = False

    def __post_init__(self):
        if not (0.0 < self.eta0):
            raise ValidationError("eta0 must be positive")
        if not (0.0 < self.alpha <= 1.0):
            raise ValidationError("alpha must be in (0, 1]")
        if not (0.0 < self.beta < 1.0):
            raise ValidationError("beta must be in (0, 1)")
        if not (0.0 < self.eta_min <= self.eta0 <= self.eta_max):
            raise ValidationError("need 0 < eta_min <= eta0 <= eta_max")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be at least 1")
        if self.obj_tol < 0.0 or self.grad_tol < 0.0:
            raise ValidationError("tolerances must be nonnegative")
        if not (0.0 < self.sv_eps < 1.0):
            raise ValidationError("sv_eps must be in (0, 1)")
        if self.kernel not in ("auto", "compiled", "python"):
            raise ValidationError(f"unknown kernel {self.kernel!r}")


@dataclass(frozen=True, eq=False)
class SolverResult:
    """Outcome of one `solve` call.

    sigma_off_star  minimizing noise cross covariance, d1 x d2
    min_mi          minimal joint mutual information, nats
    iterations      number of completed loop updates
    converged       True unless the loop hit max_iters
    stop_reason     "gradient" | "objective" | "stalled" | "max_iters"
    max_sv          largest post-projection singular value seen
    wall_ms         wall-clock time of the loop including any polish
    kernel          which kernel actually ran
    trace           objective per evaluated loop iterate, or None

    A "stalled" stop means the sign-based loop cycled without improving
    its best value; the returned point is that best iterate after the
    line-search polish, which is where the remaining budget went.
    """

    sigma_off_star: np.ndarray
    min_mi: float
    iterations: int
    converged: bool
    stop_reason: str
    max_sv: float
    wall_ms: float
    kernel: str
    trace: np.ndarray | None = field(default=None, repr=False)


_CONST_CACHE: WeakKeyDictionary = WeakKeyDictionary()


def _constants(ch: BroadcastChannel):
    """(P1, P2, K0) with P_i = H_i Sigma_Y^{1/2}; cached per channel."""
    hit = _CONST_CACHE.get(ch)
    if hit is not None:
        return hit
    w, v = np.linalg.eigh(ch.sigma_y)
    if w[0] <= 0.0:
        raise NumericalError("sigma_y is not positive definite")
    sqrt_sy = (v * np.sqrt(w)) @ v.T
    p1 = ch.h1 @ sqrt_sy
    p2 = ch.h2 @ sqrt_sy
    k0 = p1.T @ p1 + p2.T @ p2
    out = (p1, p2, k0)
    _CONST_CACHE[ch] = out
    return out


def _check_sigma(ch: BroadcastChannel, sigma_off: np.ndarray) -> np.ndarray:
    sigma_off = np.asarray(sigma_off, dtype=float)
    if sigma_off.shape != (ch.d1, ch.d2):
        raise ValidationError(
            f"sigma_off shape {sigma_off.shape} does not match ({ch.d1}, {ch.d2})"
        )
    if not np.all(np.isfinite(sigma_off)):
        raise ValidationError("sigma_off contains non-finite entries")
    return sigma_off


def objective(ch: BroadcastChannel, sigma_off: np.ndarray) -> float:
    """logdet(G) - logdet(Sigma_n) at the given cross block, in nats.

    Raises DomainError if ||sigma_off||_2 >= 1 (the joint noise covariance
    would be singular or indefinite there).
    """
    sigma_off = _check_sigma(ch, sigma_off)
    p1, p2, k0 = _constants(ch)
    u, s, vt = np.linalg.svd(sigma_off, full_matrices=False)
    if s[0] >= 1.0:
        raise DomainError(
            f"sigma_off is infeasible: spectral norm {s[0]:.6g} >= 1"
        )
    f, _ = _loop_py.eval_objective_gradient(p1, p2, k0, u, s, vt)
    return f


def gradient(ch: BroadcastChannel, sigma_off: np.ndarray) -> np.ndarray:
    """Search direction [G^-1 - Sigma_n^-1]_upper-off at sigma_off, d1 x d2.

    Note this is half the calculus derivative of `objective`: the cross
    block enters the symmetric joint twice, so d objective / d sigma_off =
    2x this matrix. The update rule is sign-based, so the factor does not
    affect the iteration; finite-difference checks must double it.
    """
    sigma_off = _check_sigma(ch, sigma_off)
    p1, p2, k0 = _constants(ch)
    u, s, vt = np.linalg.svd(sigma_off, full_matrices=False)
    if s[0] >= 1.0:
        raise DomainError(
            f"sigma_off is infeasible: spectral norm {s[0]:.6g} >= 1"
        )
    _, g = _loop_py.eval_objective_gradient(p1, p2, k0, u, s, vt)
    return g


def project(sigma_off: np.ndarray, sv_eps: float = 1e-9) -> np.ndarray:
    """Nearest (Frobenius) matrix with spectral norm at most 1 - sv_eps."""
    sigma_off = np.asarray(sigma_off, dtype=float)
    if not np.all(np.isfinite(sigma_off)):
        raise ValidationError("sigma_off contains non-finite entries")
    u, s, vt = np.linalg.svd(sigma_off, full_matrices=False)
    cap = 1.0 - sv_eps
    if s[0] <= cap:
        return sigma_off.copy()
    return (u * np.minimum(s, cap)) @ vt


def init_sigma(ch: BroadcastChannel, sv_eps: float = 1e-9) -> np.ndarray:
    """Feasible warm start H1 pinv(H2), projected onto the cap."""
    return project(ch.h1 @ np.linalg.pinv(ch.h2), sv_eps)


def _polish(p1, p2, k0, sigma, budget, obj_tol, grad_tol, sv_eps):
    """Monotone projected-descent refinement of the loop's best iterate.

    The sign-based loop can calm inside a flat valley short of the
    minimum. Backtracking line search on the true derivative (twice the
    stored half-gradient) grinds out the remaining error; no ascent is
    ever accepted, so the loop's value can only improve. Stops on a
    failed line search or a stalled iterate (both mean stationarity at
    working precision), on three negligible decreases in a row, or when
    the leftover update budget runs out.
    """
    cap = 1.0 - sv_eps
    u, s, vt = np.linalg.svd(sigma, full_matrices=False)
    if s[0] > cap:
        np.minimum(s, cap, out=s)
        sigma = (u * s) @ vt
    f, g = _loop_py.eval_objective_gradient(p1, p2, k0, u, s, vt)
    max_sv = s[0]
    step = 1.0
    calm = 0
    for _ in range(min(budget, 1000)):
        if np.max(np.abs(g)) < grad_tol:
            break
        g2 = g + g
        accepted = None
        for _ in range(30):
            cand = sigma - step * g2
            un, sn, vtn = np.linalg.svd(cand, full_matrices=False)
            if sn[0] > cap:
                np.minimum(sn, cap, out=sn)
                cand = (un * sn) @ vtn
            fn, gn = _loop_py.eval_objective_gradient(p1, p2, k0, un, sn, vtn)
            drop = float(np.vdot(g2, sigma - cand))
            if fn <= f - 1e-4 * drop + 1e-18:
                accepted = (cand, fn, gn, sn[0])
                break
            step *= 0.5
        if accepted is None:
            break
        moved = float(np.max(np.abs(accepted[0] - sigma)))
        calm = calm + 1 if f - accepted[1] <= obj_tol * max(1.0, abs(f)) else 0
        sigma, f, g, sv = accepted
        max_sv = max(max_sv, sv)
        if moved < 1e-14 or calm >= 3:
            break
        step = min(step * 1.3, 1e3)
    return sigma, f, max_sv


def solve(ch: BroadcastChannel, config: SolverConfig | None = None) -> SolverResult:
    """Minimize the channel objective; min_mi is half the optimal value.

    When d1 < d2 the modalities are swapped internally (the iterate has
    d1*d2 entries either way, but the SVD cost favors the wide orientation)
    and the result is transposed back; the warm start transposes with it,
    so the trajectory is the mirror image of the unswapped one.

    Update budget left over after an early stop funds a short monotone
    polish of the best iterate; a run that exhausts max_iters gets no
    polish and reports unconverged. Polish never changes the stop
    accounting, only the returned point and value, and only downward.
    """
    cfg = config if config is not None else SolverConfig()
    run = resolve_kernel(cfg.kernel)
    swapped = ch.d1 < ch.d2
    sigma0 = ch.h1 @ np.linalg.pinv(ch.h2)
    if swapped:
        work = BroadcastChannel(
            h1=ch.h2, h2=ch.h1, sigma_y=ch.sigma_y, w1=ch.w2, w2=ch.w1,
            i1=ch.i2, i2=ch.i1, ip_total=ch.ip_total,
        )
        sigma0 = sigma0.T
    else:
        work = ch
    p1, p2, k0 = _constants(work)
    t0 = time.perf_counter()
    try:
        sigma_star, best_f, iters, stop, trace, max_sv = run(
            p1, p2, k0, sigma0, cfg.eta0, cfg.alpha, cfg.beta,
            cfg.max_iters, cfg.obj_tol, cfg.grad_tol, cfg.sv_eps,
            cfg.record_trace, cfg.eta_min, cfg.eta_max,
        )
    except ValueError as exc:
        raise NumericalError(str(exc)) from exc
    budget = cfg.max_iters - iters
    if budget > 0:
        sigma_pol, f_pol, sv_pol = _polish(
            p1, p2, k0, sigma_star, budget, cfg.obj_tol, cfg.grad_tol,
            cfg.sv_eps,
        )
        if f_pol < best_f:
            sigma_star, best_f = sigma_pol, f_pol
        max_sv = max(max_sv, sv_pol)
    wall_ms = (time.perf_counter() - t0) * 1e3
    if swapped:
        sigma_star = np.ascontiguousarray(sigma_star.T)
    return SolverResult(
        sigma_off_star=sigma_star,
        min_mi=0.5 * best_f,
        iterations=iters,
        converged=stop != 2,
        stop_reason=_loop_py.STOP_REASONS[stop],
        max_sv=max_sv,
        wall_ms=wall_ms,
        kernel="python" if run is _loop_py.run_loop else "compiled",
        trace=trace,
    )
