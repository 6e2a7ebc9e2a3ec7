"""Batched damped Newton iteration on a field gradient.

All seeds are advanced together; each point's trajectory is independent of
every other's, so results do not depend on batch composition, seed order,
or worker count.  The step is -H^{-1} grad, accepted only when the gradient
norm strictly decreases and halved otherwise (the Hessian needed for the
next step comes from the same evaluation that judged the candidate, so one
fused value/gradient/Hessian pass per iteration is the whole cost).

Linear solves use closed forms for N <= 3 with an explicit determinant, so
singular Hessians are detected per point instead of aborting the batch.
"""

from dataclasses import dataclass

import numpy as np

CONVERGED = 0
MAX_ITER = 1
SINGULAR = 2
STALLED = 3
LEFT_REGION = 4

STATUS_NAMES = {
    CONVERGED: "converged",
    MAX_ITER: "max-iterations",
    SINGULAR: "singular-hessian",
    STALLED: "stalled",
    LEFT_REGION: "left-region",
}


def solve_symmetric(hess, rhs):
    """Batched solve H x = rhs for symmetric H, N in {1, 2, 3}.

    Returns (x, nonsingular mask); rows with |det| below 1e-12 of the
    Frobenius scale are flagged and left as zeros.
    """
    n = hess.shape[-1]
    h = hess
    if n == 1:
        det = h[:, 0, 0].copy()
        x = np.zeros_like(rhs)
    elif n == 2:
        det = h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]
        x = np.empty_like(rhs)
    elif n == 3:
        c00 = h[:, 1, 1] * h[:, 2, 2] - h[:, 1, 2] * h[:, 2, 1]
        c01 = h[:, 1, 2] * h[:, 2, 0] - h[:, 1, 0] * h[:, 2, 2]
        c02 = h[:, 1, 0] * h[:, 2, 1] - h[:, 1, 1] * h[:, 2, 0]
        det = h[:, 0, 0] * c00 + h[:, 0, 1] * c01 + h[:, 0, 2] * c02
        x = np.empty_like(rhs)
    else:
        raise ValueError("only dimensions 1..3 supported")

    frob = np.sqrt(np.einsum("pij,pij->p", h, h))
    floor = 1e-12 * (frob / np.sqrt(n)) ** n + 1e-300
    ok = np.abs(det) > floor
    safe = np.where(ok, det, 1.0)

    if n == 1:
        x[:, 0] = rhs[:, 0] / safe
    elif n == 2:
        x[:, 0] = (h[:, 1, 1] * rhs[:, 0] - h[:, 0, 1] * rhs[:, 1]) / safe
        x[:, 1] = (-h[:, 1, 0] * rhs[:, 0] + h[:, 0, 0] * rhs[:, 1]) / safe
    else:
        c10 = h[:, 0, 2] * h[:, 2, 1] - h[:, 0, 1] * h[:, 2, 2]
        c11 = h[:, 0, 0] * h[:, 2, 2] - h[:, 0, 2] * h[:, 2, 0]
        c12 = h[:, 0, 1] * h[:, 2, 0] - h[:, 0, 0] * h[:, 2, 1]
        c20 = h[:, 0, 1] * h[:, 1, 2] - h[:, 0, 2] * h[:, 1, 1]
        c21 = h[:, 0, 2] * h[:, 1, 0] - h[:, 0, 0] * h[:, 1, 2]
        c22 = h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]
        x[:, 0] = (c00 * rhs[:, 0] + c10 * rhs[:, 1] + c20 * rhs[:, 2]) / safe
        x[:, 1] = (c01 * rhs[:, 0] + c11 * rhs[:, 1] + c21 * rhs[:, 2]) / safe
        x[:, 2] = (c02 * rhs[:, 0] + c12 * rhs[:, 1] + c22 * rhs[:, 2]) / safe
    x[~ok] = 0.0
    return x, ok


@dataclass
class NewtonResult:
    points: np.ndarray
    grad_norm: np.ndarray
    iterations: np.ndarray
    status: np.ndarray

    def converged(self):
        return self.status == CONVERGED

    def tally(self):
        return {name: int(np.sum(self.status == code)) for code, name in STATUS_NAMES.items()}


def newton_refine(jets_fn, seeds, tol_grad, max_iter=60, max_halvings=40,
                  max_step=None, valid_fn=None):
    """Drive every seed to a gradient zero (or a terminal status).

    jets_fn(points) -> (value, grad, hess).  valid_fn, when given, retires
    accepted iterates that leave the allowed region (used by chart
    searches); Euclidean searches let points wander freely.
    """
    pts = np.array(np.atleast_2d(seeds), dtype=float)
    total, ndim = pts.shape
    status = np.full(total, MAX_ITER, dtype=np.int8)
    iters = np.zeros(total, dtype=np.int32)
    gnorm = np.full(total, np.inf)
    alpha = np.ones(total)
    halved = np.zeros(total, dtype=np.int32)
    step = np.zeros((total, ndim))
    active = np.ones(total, dtype=bool)

    def retire(indices, code):
        status[indices] = code
        active[indices] = False

    def compute_step(indices, grad, hess):
        """New Newton direction at freshly accepted points."""
        s, ok = solve_symmetric(hess, -grad)
        if not ok.all():
            retire(indices[~ok], SINGULAR)
            indices = indices[ok]
            s = s[ok]
        if max_step is not None and indices.size:
            norms = np.linalg.norm(s, axis=1)
            big = norms > max_step
            if big.any():
                s[big] *= (max_step / norms[big])[:, None]
        step[indices] = s
        alpha[indices] = 1.0
        halved[indices] = 0

    # initial evaluation at the seeds
    _, grad0, hess0 = jets_fn(pts)
    gnorm[:] = np.linalg.norm(grad0, axis=1)
    done = gnorm < tol_grad
    if done.any():
        retire(np.flatnonzero(done), CONVERGED)
    live = np.flatnonzero(active)
    if live.size:
        compute_step(live, grad0[live], hess0[live])

    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        cand = pts[idx] + alpha[idx, None] * step[idx]
        _, grad, hess = jets_fn(cand)
        cn = np.linalg.norm(grad, axis=1)
        better = np.isfinite(cn) & (cn < gnorm[idx])

        # rejected candidates: halve the damping, retire hopeless ones
        rej = idx[~better]
        if rej.size:
            alpha[rej] *= 0.5
            halved[rej] += 1
            retire(rej[halved[rej] > max_halvings], STALLED)

        acc = idx[better]
        if acc.size == 0:
            continue
        pts[acc] = cand[better]
        gnorm[acc] = cn[better]
        iters[acc] += 1

        if valid_fn is not None:
            inside = valid_fn(pts[acc])
            retire(acc[~inside], LEFT_REGION)
            acc = acc[inside]
            better_kept = np.flatnonzero(better)[inside]
        else:
            better_kept = np.flatnonzero(better)

        conv = gnorm[acc] < tol_grad
        retire(acc[conv], CONVERGED)
        acc = acc[~conv]
        better_kept = better_kept[~conv]
        if acc.size:
            compute_step(acc, grad[better_kept], hess[better_kept])

    return NewtonResult(points=pts, grad_norm=gnorm, iterations=iters, status=status)
