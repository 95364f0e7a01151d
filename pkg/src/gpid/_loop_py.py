"""Reference implementation of the solver inner loop (numpy).

The compiled extension `gpid._loop` implements the same contract; this module
is the import-time fallback and the ground truth the extension is tested
against. Both must keep identical update rules and stop logic.

Numerical form
--------------
With the SVD sigma_off = U diag(s) V^T and P_i = H_i Sigma_Y^{1/2}, the
objective logdet(G) - logdet(Sigma_n) collapses to logdet(I_dy + C) where

    C = P1^T P1 + P2^T P2
        + sum_i s_i [ q_i q_i^T / (2 (1 - s_i)) - p_i p_i^T / (2 (1 + s_i)) ],

with a = U^T P1, b = V^T P2, p = a + b, q = a - b (rows indexed by singular
value). The gradient is -Z1 (I + C)^{-1} Z2^T with
Z1 = P1 + U (c2*q - c1*p), Z2 = P2 + V (-c2*q - c1*p), c1 = s/(2(1+s)),
c2 = s/(2(1-s)). This form is required, not a preference: the Schur-complement
route subtracts O(1) matrices to get O(1-s) remainders, and near the spectral
cap the cancellation flips the gradient sign outright. Here the (1-s) factors
cancel analytically and 1-s itself is exact in floating point for s >= 1/2.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

__all__ = ["eval_objective_gradient", "run_loop", "STOP_REASONS"]

STOP_REASONS = {0: "gradient", 1: "objective", 2: "max_iters", 3: "stalled"}

# iterations without meaningful progress of the best value before giving
# the remaining budget to the caller's polish phase
STALL_WINDOW = 500


def eval_objective_gradient(p1, p2, k0, u, s, vt):
    """Objective (nats, no 1/2) and block gradient at sigma = U diag(s) V^T."""
    dy = p1.shape[1]
    a = u.T @ p1
    b = vt @ p2
    p = a + b
    q = a - b
    c1 = (s / (2.0 * (1.0 + s)))[:, None]
    c2 = (s / (2.0 * (1.0 - s)))[:, None]
    c = k0 + q.T @ (c2 * q) - p.T @ (c1 * p)
    c += np.eye(dy)
    ll = np.linalg.cholesky(c)
    f = 2.0 * float(np.sum(np.log(np.diag(ll))))
    z1 = p1 + u @ (c2 * q - c1 * p)
    z2 = p2 + vt.T @ (-c2 * q - c1 * p)
    grad = -(z1 @ sla.cho_solve((ll, True), z2.T))
    return f, grad


def _svd_clamp(mat, cap):
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    clamped = bool(s[0] > cap)
    if clamped:
        s = np.minimum(s, cap)
    return u, s, vt, clamped


def run_loop(p1, p2, k0, sigma0, eta0, alpha, beta, max_iters, obj_tol,
             grad_tol, sv_eps, record_trace=True, eta_min=1e-15, eta_max=1e12):
    """Projected RProp on sigma_off starting from (unprojected) sigma0.

    Returns (sigma_star, best_f, iterations, stop_code, trace, max_sv).
    stop_code: 0 gradient, 1 objective window, 2 max_iters, 3 stalled.
    A NaN objective raises ValueError tagged with the iteration index.

    Per-entry rates are clipped to [eta_min, eta_max]. The bounds do not
    limit movement (the spectral projection does that); they keep the
    rates finite over long runs and revivable after a losing streak.

    Flat valleys can trap the sign-based update in a persistent
    overshoot cycle that neither calms nor improves. The stall stop
    detects this: no meaningful best-value progress for STALL_WINDOW
    iterations ends the loop at the best iterate seen, leaving the
    remaining budget for the caller's line-search polish.
    """
    d1, d2 = sigma0.shape
    cap = 1.0 - sv_eps
    u, s, vt, clamped = _svd_clamp(sigma0, cap)
    max_sv = float(s[0])
    eta = np.full((d1, d2), float(eta0))
    prev_sign = np.zeros((d1, d2))
    trace = [] if record_trace else None
    best_f = np.inf
    best = (u, s, vt)
    f_prev = np.nan
    stall_ref = np.inf
    fresh_j = 0
    calm = 0
    iterations = max_iters
    stop = 2
    for j in range(max_iters + 1):
        f, g = eval_objective_gradient(p1, p2, k0, u, s, vt)
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            raise ValueError(f"non-finite objective or gradient at iteration {j}")
        if record_trace:
            trace.append(f)
        if f < best_f:
            best_f = f
            best = (u, s, vt)
        if not clamped and np.max(np.abs(g)) < grad_tol:
            iterations, stop = j, 0
            break
        if j > 0 and abs(f - f_prev) <= obj_tol * max(abs(f), 1.0):
            calm += 1
            if calm >= 10:
                iterations, stop = j, 1
                break
        else:
            calm = 0
        if stall_ref - f > obj_tol * max(abs(f), 1.0):
            stall_ref = f
            fresh_j = j
        elif j - fresh_j >= STALL_WINDOW:
            iterations, stop = j, 3
            break
        if j == max_iters:
            iterations, stop = j, 2
            break
        f_prev = f
        sign = np.sign(g)
        eta *= beta ** (-(sign * prev_sign))
        np.clip(eta, eta_min, eta_max, out=eta)
        prev_sign = sign
        sigma = (u * s) @ vt
        u, s, vt, clamped = _svd_clamp(sigma - (alpha ** j) * eta * g, cap)
        if s[0] > max_sv:
            max_sv = float(s[0])
    bu, bs, bvt = best
    sigma_star = (bu * bs) @ bvt
    trace_arr = np.asarray(trace) if record_trace else None
    return sigma_star, best_f, iterations, stop, trace_arr, max_sv
