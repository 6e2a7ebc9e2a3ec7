# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled hot loops: jets of a finite cosine superposition.

The field is z(t) = sum_k A_k * cos(<w_k, t> + c_k).  Everything the rest of
the package needs from a realization reduces to evaluating z, its gradient
and its Hessian at batches of points, so these three loops are the only
compiled code.  Results are bitwise independent of the OpenMP thread count:
the parallel split is over points and each point's accumulation is a plain
sequential sum over k.

Per-point accumulators live inside nogil helper functions so each OpenMP
thread gets its own stack copies (C arrays declared in a prange body would
be shared across threads).
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange

cnp.import_array()

cdef extern from "math.h" nogil:
    void sincos(double x, double *s, double *c)
    double fabs(double x)
    double floor(double x)

# sin/cos on [-pi/4, pi/4] via Cephes minimax polynomials plus FDLIBM-style
# Cody-Waite reduction by multiples of pi/2; |error| < ~2 ulp for the phase
# magnitudes seen here (|x| up to ~1e6), with a libm fallback beyond that.
DEF TWO_OVER_PI = 0.63661977236758134308
DEF PIO2_1 = 1.57079632673412561417
DEF PIO2_1T = 6.07710050650619224932e-11
DEF PIO2_2T = 2.02226624879595063154e-21


cdef inline void _poly_sincos(double x, double *so, double *co) noexcept nogil:
    cdef double n_f, r, z, s, c, tmp
    cdef long q
    if fabs(x) > 1e6:
        sincos(x, so, co)
        return
    n_f = floor(x * TWO_OVER_PI + 0.5)
    q = (<long> n_f) & 3
    r = x - n_f * PIO2_1
    r = r - n_f * PIO2_1T
    r = r - n_f * PIO2_2T
    z = r * r
    s = (((((1.58962301576546568060e-10 * z - 2.50507477628578072866e-8) * z
            + 2.75573136213857245213e-6) * z - 1.98412698295895385996e-4) * z
            + 8.33333333332211858878e-3) * z - 1.66666666666666307295e-1)
    s = r + r * z * s
    c = (((((-1.13585365213876817300e-11 * z + 2.08757008419747316778e-9) * z
            - 2.75573141792967388112e-7) * z + 2.48015872888517179954e-5) * z
            - 1.38888888888730564116e-3) * z + 4.16666666666665929218e-2)
    c = 1.0 - 0.5 * z + z * z * c
    if q == 1:
        tmp = s
        s = c
        c = -tmp
    elif q == 2:
        s = -s
        c = -c
    elif q == 3:
        tmp = s
        s = -c
        c = tmp
    so[0] = s
    co[0] = c


cdef inline void _jets_one(const double* freqs, const double* amps,
                           const double* phases, Py_ssize_t K, Py_ssize_t N,
                           const double* pt, double* out_val, double* out_grad,
                           double* out_hess) noexcept nogil:
    cdef Py_ssize_t k, i, j, m
    cdef double ph, s, c, fi
    cdef double av = 0.0
    cdef double ag[3]
    cdef double ah[6]
    cdef const double* fk
    for i in range(N):
        ag[i] = 0.0
    for m in range(6):
        ah[m] = 0.0
    for k in range(K):
        fk = freqs + k * N
        ph = phases[k]
        for i in range(N):
            ph = ph + fk[i] * pt[i]
        _poly_sincos(ph, &s, &c)
        c = c * amps[k]
        s = s * amps[k]
        av = av + c
        m = 0
        for i in range(N):
            fi = fk[i]
            ag[i] = ag[i] - s * fi
            for j in range(i, N):
                ah[m] = ah[m] - c * fi * fk[j]
                m = m + 1
    out_val[0] = av
    m = 0
    for i in range(N):
        out_grad[i] = ag[i]
        for j in range(i, N):
            out_hess[i * N + j] = ah[m]
            out_hess[j * N + i] = ah[m]
            m = m + 1


cdef inline void _val_grad_one(const double* freqs, const double* amps,
                               const double* phases, Py_ssize_t K, Py_ssize_t N,
                               const double* pt, double* out_val,
                               double* out_grad) noexcept nogil:
    cdef Py_ssize_t k, i
    cdef double ph, s, c
    cdef double av = 0.0
    cdef double ag[3]
    cdef const double* fk
    for i in range(N):
        ag[i] = 0.0
    for k in range(K):
        fk = freqs + k * N
        ph = phases[k]
        for i in range(N):
            ph = ph + fk[i] * pt[i]
        _poly_sincos(ph, &s, &c)
        av = av + c * amps[k]
        s = s * amps[k]
        for i in range(N):
            ag[i] = ag[i] - s * fk[i]
    out_val[0] = av
    for i in range(N):
        out_grad[i] = ag[i]


cdef inline double _value_one(const double* freqs, const double* amps,
                              const double* phases, Py_ssize_t K, Py_ssize_t N,
                              const double* pt) noexcept nogil:
    cdef Py_ssize_t k, i
    cdef double ph, s, c
    cdef double av = 0.0
    cdef const double* fk
    for k in range(K):
        fk = freqs + k * N
        ph = phases[k]
        for i in range(N):
            ph = ph + fk[i] * pt[i]
        _poly_sincos(ph, &s, &c)
        av = av + amps[k] * c
    return av


def cosine_jets(double[:, ::1] freqs, double[::1] amps, double[::1] phases,
                double[:, ::1] points):
    """Value, gradient and Hessian of the superposition at each point.

    freqs: (K, N), amps: (K,), phases: (K,), points: (P, N).
    Returns (val (P,), grad (P, N), hess (P, N, N)); hess is symmetric.
    """
    cdef Py_ssize_t K = freqs.shape[0]
    cdef Py_ssize_t N = freqs.shape[1]
    cdef Py_ssize_t P = points.shape[0]
    if N < 1 or N > 3:
        raise ValueError("kernel supports dimensions 1..3")
    val_arr = np.empty(P, dtype=np.float64)
    grad_arr = np.empty((P, N), dtype=np.float64)
    hess_arr = np.empty((P, N, N), dtype=np.float64)
    cdef double[::1] val = val_arr
    cdef double[:, ::1] grad = grad_arr
    cdef double[:, :, ::1] hess = hess_arr
    cdef const double* fp = &freqs[0, 0]
    cdef const double* ap = &amps[0]
    cdef const double* cp = &phases[0]
    cdef Py_ssize_t p
    if P == 0:
        return val_arr, grad_arr, hess_arr
    for p in prange(P, nogil=True, schedule='static'):
        _jets_one(fp, ap, cp, K, N, &points[p, 0], &val[p], &grad[p, 0], &hess[p, 0, 0])
    return val_arr, grad_arr, hess_arr


def cosine_val_grad(double[:, ::1] freqs, double[::1] amps, double[::1] phases,
                    double[:, ::1] points):
    """Value and gradient only."""
    cdef Py_ssize_t K = freqs.shape[0]
    cdef Py_ssize_t N = freqs.shape[1]
    cdef Py_ssize_t P = points.shape[0]
    if N < 1 or N > 3:
        raise ValueError("kernel supports dimensions 1..3")
    val_arr = np.empty(P, dtype=np.float64)
    grad_arr = np.empty((P, N), dtype=np.float64)
    cdef double[::1] val = val_arr
    cdef double[:, ::1] grad = grad_arr
    cdef const double* fp = &freqs[0, 0]
    cdef const double* ap = &amps[0]
    cdef const double* cp = &phases[0]
    cdef Py_ssize_t p
    if P == 0:
        return val_arr, grad_arr
    for p in prange(P, nogil=True, schedule='static'):
        _val_grad_one(fp, ap, cp, K, N, &points[p, 0], &val[p], &grad[p, 0])
    return val_arr, grad_arr


def cosine_values(double[:, ::1] freqs, double[::1] amps, double[::1] phases,
                  double[:, ::1] points):
    """Values only (dense scans)."""
    cdef Py_ssize_t K = freqs.shape[0]
    cdef Py_ssize_t N = freqs.shape[1]
    cdef Py_ssize_t P = points.shape[0]
    if N < 1 or N > 3:
        raise ValueError("kernel supports dimensions 1..3")
    val_arr = np.empty(P, dtype=np.float64)
    cdef double[::1] val = val_arr
    cdef const double* fp = &freqs[0, 0]
    cdef const double* ap = &amps[0]
    cdef const double* cp = &phases[0]
    cdef Py_ssize_t p
    if P == 0:
        return val_arr
    for p in prange(P, nogil=True, schedule='static'):
        val[p] = _value_one(fp, ap, cp, K, N, &points[p, 0])
    return val_arr
