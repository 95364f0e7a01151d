# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled solver inner loop.

Same contract as gpid._loop_py.run_loop; see that module for the algebra and
why the SVD-factored evaluation is mandatory near the spectral cap. All heavy
lifting goes through LAPACK (dgesdd, dpotrf/dpotrs) and BLAS (dgemm) on
preallocated Fortran-ordered buffers, so no allocations happen inside the
iteration.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, log, pow
from scipy.linalg.cython_blas cimport dgemm
from scipy.linalg.cython_lapack cimport dgesdd, dpotrf, dpotrs

cnp.import_array()

STOP_REASONS = {0: "gradient", 1: "objective", 2: "max_iters", 3: "stalled"}

STALL_WINDOW = 500


def run_loop(object p1_in, object p2_in, object k0_in, object sigma0,
             double eta0, double alpha, double beta, int max_iters,
             double obj_tol, double grad_tol, double sv_eps,
             bint record_trace=True, double eta_min=1e-15,
             double eta_max=1e12):
    """Projected RProp on sigma_off; see gpid._loop_py.run_loop."""
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] p1 = \
        np.asfortranarray(p1_in, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] p2 = \
        np.asfortranarray(p2_in, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] k0 = \
        np.asfortranarray(k0_in, dtype=np.float64)
    cdef int d1 = p1.shape[0]
    cdef int d2 = p2.shape[0]
    cdef int dy = p1.shape[1]
    cdef int k = d1 if d1 < d2 else d2

    cdef cnp.ndarray[double, ndim=2, mode="fortran"] A = \
        np.asfortranarray(sigma0, dtype=np.float64).copy(order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] U = \
        np.empty((d1, k), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=1] S = np.empty(k, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] VT = \
        np.empty((k, d2), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] bU = \
        np.empty((d1, k), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=1] bS = np.empty(k, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] bVT = \
        np.empty((k, d2), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] am = \
        np.empty((k, dy), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] bm = \
        np.empty((k, dy), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] pm = \
        np.empty((k, dy), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] qm = \
        np.empty((k, dy), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] wp = \
        np.empty((k, dy), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] wq = \
        np.empty((k, dy), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] e1 = \
        np.empty((k, dy), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] e2 = \
        np.empty((k, dy), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] C = \
        np.empty((dy, dy), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] Z1 = \
        np.empty((d1, dy), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] Z2 = \
        np.empty((d2, dy), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] rhs = \
        np.empty((dy, d2), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] G = \
        np.empty((d1, d2), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] eta = \
        np.full((d1, d2), eta0, dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] psg = \
        np.zeros((d1, d2), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] US = \
        np.empty((d1, k), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=1] trace = \
        np.empty(max_iters + 1 if record_trace else 1, dtype=np.float64)
    cdef cnp.ndarray[int, ndim=1] iwork = np.empty(8 * k, dtype=np.intc)

    # dgesdd workspace query
    cdef double wk_query
    cdef int lwork = -1
    cdef int info = 0
    cdef char jobz = b'S'
    cdef char lo = b'L'
    cdef char tn = b'N'
    cdef char tt = b'T'
    dgesdd(&jobz, &d1, &d2, &A[0, 0], &d1, &S[0], &U[0, 0], &d1,
           &VT[0, 0], &k, &wk_query, &lwork, &iwork[0], &info)
    if info != 0:
        raise ValueError(f"svd workspace query failed (info={info})")
    lwork = <int>wk_query
    cdef cnp.ndarray[double, ndim=1] work = np.empty(lwork, dtype=np.float64)

    cdef double cap = 1.0 - sv_eps
    cdef double grow = 1.0 / beta
    cdef double one = 1.0
    cdef double neg1 = -1.0
    cdef double zero = 0.0
    cdef double f, f_prev, best_f, gmax, diff, c1i, c2i, si, gval, prod, decay
    cdef double max_sv, stall_ref
    cdef bint clamped
    cdef int i, t, j, calm, n_eval, iterations, stop, fresh_j
    cdef int stall_window = STALL_WINDOW
    cdef Py_ssize_t idx, total12

    total12 = <Py_ssize_t>d1 * d2

    # initial projection
    dgesdd(&jobz, &d1, &d2, &A[0, 0], &d1, &S[0], &U[0, 0], &d1,
           &VT[0, 0], &k, &work[0], &lwork, &iwork[0], &info)
    if info != 0:
        raise ValueError(f"svd failed at iteration 0 (info={info})")
    clamped = S[0] > cap
    for i in range(k):
        if S[i] > cap:
            S[i] = cap
    max_sv = S[0]

    f_prev = 0.0
    best_f = np.inf
    stall_ref = np.inf
    fresh_j = 0
    calm = 0
    n_eval = 0
    iterations = max_iters
    stop = 2

    for j in range(max_iters + 1):
        # a = U^T P1, b = VT P2
        dgemm(&tt, &tn, &k, &dy, &d1, &one, &U[0, 0], &d1, &p1[0, 0], &d1,
              &zero, &am[0, 0], &k)
        dgemm(&tn, &tn, &k, &dy, &d2, &one, &VT[0, 0], &k, &p2[0, 0], &d2,
              &zero, &bm[0, 0], &k)
        for t in range(dy):
            for i in range(k):
                pm[i, t] = am[i, t] + bm[i, t]
                qm[i, t] = am[i, t] - bm[i, t]
        for i in range(k):
            si = S[i]
            c1i = si / (2.0 * (1.0 + si))
            c2i = si / (2.0 * (1.0 - si))
            for t in range(dy):
                wp[i, t] = c1i * pm[i, t]
                wq[i, t] = c2i * qm[i, t]
                e1[i, t] = wq[i, t] - wp[i, t]
                e2[i, t] = -wq[i, t] - wp[i, t]
        # C = I + K0 + q^T wq - p^T wp
        C[:, :] = k0
        dgemm(&tt, &tn, &dy, &dy, &k, &one, &qm[0, 0], &k, &wq[0, 0], &k,
              &one, &C[0, 0], &dy)
        dgemm(&tt, &tn, &dy, &dy, &k, &neg1, &pm[0, 0], &k, &wp[0, 0], &k,
              &one, &C[0, 0], &dy)
        for t in range(dy):
            C[t, t] += 1.0
        dpotrf(&lo, &dy, &C[0, 0], &dy, &info)
        if info != 0:
            raise ValueError(
                f"objective matrix not positive definite at iteration {j}"
            )
        f = 0.0
        for t in range(dy):
            f += log(C[t, t])
        f *= 2.0
        # Z1 = P1 + U e1, Z2 = P2 + V e2
        Z1[:, :] = p1
        dgemm(&tn, &tn, &d1, &dy, &k, &one, &U[0, 0], &d1, &e1[0, 0], &k,
              &one, &Z1[0, 0], &d1)
        Z2[:, :] = p2
        dgemm(&tt, &tn, &d2, &dy, &k, &one, &VT[0, 0], &k, &e2[0, 0], &k,
              &one, &Z2[0, 0], &d2)
        for t in range(d2):
            for i in range(dy):
                rhs[i, t] = Z2[t, i]
        dpotrs(&lo, &dy, &d2, &C[0, 0], &dy, &rhs[0, 0], &dy, &info)
        if info != 0:
            raise ValueError(f"triangular solve failed at iteration {j}")
        dgemm(&tn, &tn, &d1, &d2, &dy, &neg1, &Z1[0, 0], &d1, &rhs[0, 0],
              &dy, &zero, &G[0, 0], &d1)
        gmax = 0.0
        for t in range(d2):
            for i in range(d1):
                gval = fabs(G[i, t])
                if gval > gmax:
                    gmax = gval
        if not isfinite(f) or not isfinite(gmax):
            raise ValueError(f"non-finite objective or gradient at iteration {j}")
        if record_trace:
            trace[n_eval] = f
        n_eval += 1
        if f < best_f:
            best_f = f
            bU[:, :] = U
            bS[:] = S
            bVT[:, :] = VT
        if not clamped and gmax < grad_tol:
            iterations = j
            stop = 0
            break
        diff = fabs(f - f_prev)
        if j > 0 and diff <= obj_tol * max(fabs(f), 1.0):
            calm += 1
            if calm >= 10:
                iterations = j
                stop = 1
                break
        else:
            calm = 0
        if stall_ref - f > obj_tol * max(fabs(f), 1.0):
            stall_ref = f
            fresh_j = j
        elif j - fresh_j >= stall_window:
            iterations = j
            stop = 3
            break
        if j == max_iters:
            iterations = j
            stop = 2
            break
        f_prev = f
        # RProp sign adaptation, then projected step
        for t in range(d2):
            for i in range(d1):
                gval = G[i, t]
                prod = psg[i, t]
                if gval > 0.0:
                    psg[i, t] = 1.0
                elif gval < 0.0:
                    psg[i, t] = -1.0
                    prod = -prod
                else:
                    psg[i, t] = 0.0
                    prod = 0.0
                if prod > 0.0:
                    eta[i, t] *= grow
                    if eta[i, t] > eta_max:
                        eta[i, t] = eta_max
                elif prod < 0.0:
                    eta[i, t] *= beta
                    if eta[i, t] < eta_min:
                        eta[i, t] = eta_min
        for i in range(k):
            si = S[i]
            for t in range(d1):
                US[t, i] = U[t, i] * si
        dgemm(&tn, &tn, &d1, &d2, &k, &one, &US[0, 0], &d1, &VT[0, 0], &k,
              &zero, &A[0, 0], &d1)
        decay = pow(alpha, <double>j)
        for t in range(d2):
            for i in range(d1):
                A[i, t] -= decay * eta[i, t] * G[i, t]
        dgesdd(&jobz, &d1, &d2, &A[0, 0], &d1, &S[0], &U[0, 0], &d1,
               &VT[0, 0], &k, &work[0], &lwork, &iwork[0], &info)
        if info != 0:
            raise ValueError(f"svd failed at iteration {j + 1} (info={info})")
        clamped = S[0] > cap
        for i in range(k):
            if S[i] > cap:
                S[i] = cap
        if S[0] > max_sv:
            max_sv = S[0]

    for i in range(k):
        si = bS[i]
        for t in range(d1):
            US[t, i] = bU[t, i] * si
    sigma_star = np.empty((d1, d2), dtype=np.float64, order="F")
    cdef cnp.ndarray[double, ndim=2, mode="fortran"] ss = sigma_star
    dgemm(&tn, &tn, &d1, &d2, &k, &one, &US[0, 0], &d1, &bVT[0, 0], &k,
          &zero, &ss[0, 0], &d1)
    trace_out = np.asarray(trace[:n_eval]).copy() if record_trace else None
    return np.ascontiguousarray(sigma_star), best_f, iterations, stop, \
        trace_out, max_sv
