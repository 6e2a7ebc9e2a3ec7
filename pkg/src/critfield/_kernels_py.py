"""NumPy implementation of the cosine-superposition kernels.

Same contract as the compiled module ``critfield._kernels``: jets of
z(t) = sum_k A_k cos(<w_k, t> + c_k) evaluated at batches of points.
Large batches are chunked so the (P, K) phase matrix stays within a fixed
memory budget.
"""

import numpy as np

# cap on P*K elements per chunk (~128 MB of float64 temporaries)
_CHUNK_ELEMS = 1 << 24


def _chunks(n_points, n_waves):
    step = max(1, _CHUNK_ELEMS // max(1, n_waves))
    for start in range(0, n_points, step):
        yield start, min(n_points, start + step)


def cosine_jets(freqs, amps, phases, points):
    P, N = points.shape
    K = freqs.shape[0]
    val = np.empty(P)
    grad = np.empty((P, N))
    hess = np.empty((P, N, N))
    # (K, N*N) outer products, contracted against cos weights in one GEMM
    fouter = (freqs[:, :, None] * freqs[:, None, :]).reshape(K, N * N)
    for lo, hi in _chunks(P, K):
        ph = points[lo:hi] @ freqs.T
        ph += phases
        c = np.cos(ph)
        c *= amps
        s = np.sin(ph)
        s *= amps
        val[lo:hi] = c.sum(axis=1)
        np.matmul(s, freqs, out=grad[lo:hi])
        hess[lo:hi] = (c @ fouter).reshape(hi - lo, N, N)
    np.negative(grad, out=grad)
    np.negative(hess, out=hess)
    return val, grad, hess


def cosine_val_grad(freqs, amps, phases, points):
    P, N = points.shape
    K = freqs.shape[0]
    val = np.empty(P)
    grad = np.empty((P, N))
    for lo, hi in _chunks(P, K):
        ph = points[lo:hi] @ freqs.T
        ph += phases
        c = np.cos(ph)
        c *= amps
        s = np.sin(ph)
        s *= amps
        val[lo:hi] = c.sum(axis=1)
        np.matmul(s, freqs, out=grad[lo:hi])
    np.negative(grad, out=grad)
    return val, grad


def cosine_values(freqs, amps, phases, points):
    P = points.shape[0]
    K = freqs.shape[0]
    val = np.empty(P)
    for lo, hi in _chunks(P, K):
        ph = points[lo:hi] @ freqs.T
        ph += phases
        c = np.cos(ph)
        c *= amps
        val[lo:hi] = c.sum(axis=1)
    return val
