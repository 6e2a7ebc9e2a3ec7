"""Diffeomorphisms with closed-form Jacobians and second derivatives.

The family is deliberately small: identity, nonsingular linear maps,
bounded sine warps, and compositions of those.  Each member has an exact
Jacobian B(t), exact per-coordinate Hessians of the forward map, and a
globally convergent inverse (exact for linear, damped Newton for warps),
so the chain rule for transformed fields carries no discretization error.

Batched conventions: points are (P, N); jacobian(points) is (P, N, N) with
B[p, i, j] = d f_i / d t_j; second_derivatives(points) is (P, N, N, N) with
S[p, k, i, j] = d^2 f_k / d t_i d t_j.
"""

from dataclasses import dataclass

import numpy as np


class IdentityMap:
    def __init__(self, dimension):
        self.dimension = int(dimension)
        self.kind = "identity"

    def forward(self, points):
        return np.array(points, dtype=float, copy=True)

    def inverse(self, points):
        return np.array(points, dtype=float, copy=True)

    def jacobian(self, points):
        p = np.atleast_2d(points).shape[0]
        return np.broadcast_to(np.eye(self.dimension), (p, self.dimension, self.dimension)).copy()

    def second_derivatives(self, points):
        p = np.atleast_2d(points).shape[0]
        n = self.dimension
        return np.zeros((p, n, n, n))

    def det_jacobian(self, points):
        return np.ones(np.atleast_2d(points).shape[0])


class LinearMap:
    """f(t) = A t with det(A) != 0."""

    def __init__(self, matrix):
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("linear map needs a square matrix")
        det = np.linalg.det(a)
        if abs(det) < 1e-12:
            raise ValueError(f"singular matrix (det = {det:.3g})")
        self.matrix = a
        self._inv = np.linalg.inv(a)
        self._det = det
        self.dimension = a.shape[0]
        self.kind = "linear"

    def forward(self, points):
        return np.atleast_2d(points) @ self.matrix.T

    def inverse(self, points):
        return np.atleast_2d(points) @ self._inv.T

    def jacobian(self, points):
        p = np.atleast_2d(points).shape[0]
        return np.broadcast_to(self.matrix, (p, self.dimension, self.dimension)).copy()

    def second_derivatives(self, points):
        p = np.atleast_2d(points).shape[0]
        n = self.dimension
        return np.zeros((p, n, n, n))

    def det_jacobian(self, points):
        return np.full(np.atleast_2d(points).shape[0], self._det)


class SineWarp:
    """f(t) = t + sum_m eps_m sin(<w_m, t> + c_m) d_m.

    The bound N * sum_m eps_m ||d_m|| ||w_m|| < 1 keeps the Jacobian
    strictly diagonally dominant, hence nonsingular everywhere, and makes
    the Newton inversion a global contraction.
    """

    def __init__(self, amplitude, frequency, phase=0.0, direction=None):
        amp = np.atleast_1d(np.asarray(amplitude, dtype=float))
        freq = np.atleast_2d(np.asarray(frequency, dtype=float))
        m, n = freq.shape
        if amp.size == 1:
            amp = np.full(m, amp[0])
        ph = np.broadcast_to(np.atleast_1d(np.asarray(phase, dtype=float)), (m,)).copy()
        if direction is None:
            # cycle through coordinate axes
            dirs = np.zeros((m, n))
            for i in range(m):
                dirs[i, i % n] = 1.0
        else:
            dirs = np.atleast_2d(np.asarray(direction, dtype=float))
            if dirs.shape != (m, n):
                raise ValueError("direction shape must match frequency shape")
        budget = n * float(np.sum(np.abs(amp) * np.linalg.norm(dirs, axis=1) * np.linalg.norm(freq, axis=1)))
        if budget >= 1.0:
            raise ValueError(
                f"contraction bound violated: N * sum eps*|d|*|w| = {budget:.3g} >= 1"
            )
        self.amplitudes = amp
        self.frequencies = freq
        self.phase_offsets = ph
        self.directions = dirs
        self.dimension = n
        self.kind = "sine-warp"

    def _phases(self, pts):
        return pts @ self.frequencies.T + self.phase_offsets  # (P, M)

    def forward(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts + (np.sin(self._phases(pts)) * self.amplitudes) @ self.directions

    def jacobian(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        cosp = np.cos(self._phases(pts)) * self.amplitudes  # (P, M)
        b = np.einsum("pm,mi,mj->pij", cosp, self.directions, self.frequencies)
        b += np.eye(self.dimension)
        return b

    def second_derivatives(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        sinp = np.sin(self._phases(pts)) * self.amplitudes  # (P, M)
        return -np.einsum("pm,mk,mi,mj->pkij", sinp, self.directions, self.frequencies, self.frequencies)

    def det_jacobian(self, points):
        return np.linalg.det(self.jacobian(points))

    def inverse(self, points, tol=1e-13, max_iter=100):
        """Damped Newton for f(y) = target, started at the target itself."""
        target = np.atleast_2d(np.asarray(points, dtype=float))
        y = target.copy()
        res = self.forward(y) - target
        rnorm = np.linalg.norm(res, axis=1)
        for _ in range(max_iter):
            live = np.flatnonzero(rnorm > tol)
            if live.size == 0:
                break
            b = self.jacobian(y[live])
            step = np.linalg.solve(b, -res[live][:, :, None])[:, :, 0]
            alpha = np.ones(step.shape[0])
            for _ in range(30):
                cand = y[live] + alpha[:, None] * step
                cres = self.forward(cand) - target[live]
                cnorm = np.linalg.norm(cres, axis=1)
                better = cnorm < rnorm[live]
                sel = live[better]
                y[sel] = cand[better]
                res[sel] = cres[better]
                rnorm[sel] = cnorm[better]
                keep = ~better
                if not keep.any():
                    break
                live = live[keep]
                step = step[keep]
                alpha = alpha[keep] * 0.5
        return y


class Composition:
    """maps applied in order: f = maps[-1] o ... o maps[0]."""

    def __init__(self, maps):
        if not maps:
            raise ValueError("composition needs at least one map")
        dims = {m.dimension for m in maps}
        if len(dims) != 1:
            raise ValueError("composed maps must share a dimension")
        self.maps = list(maps)
        self.dimension = maps[0].dimension
        self.kind = "composition"

    def forward(self, points):
        y = np.atleast_2d(np.asarray(points, dtype=float))
        for m in self.maps:
            y = m.forward(y)
        return y

    def inverse(self, points):
        y = np.atleast_2d(np.asarray(points, dtype=float))
        for m in reversed(self.maps):
            y = m.inverse(y)
        return y

    def jacobian(self, points):
        y = np.atleast_2d(np.asarray(points, dtype=float))
        jac = None
        for m in self.maps:
            jm = m.jacobian(y)
            jac = jm if jac is None else np.einsum("pij,pjk->pik", jm, jac)
            y = m.forward(y)
        return jac

    def second_derivatives(self, points):
        y = np.atleast_2d(np.asarray(points, dtype=float))
        jac = None
        sec = None
        for m in self.maps:
            jm = m.jacobian(y)
            sm = m.second_derivatives(y)
            if jac is None:
                jac, sec = jm, sm
            else:
                # chain rule for second derivatives of m o g at t:
                #   J_g^T H(m_k) J_g + sum_l dm_k/dy_l * H(g_l)
                quad = np.einsum("pia,pkij,pjb->pkab", jac, sm, jac)
                mixed = np.einsum("pkl,plab->pkab", jm, sec)
                sec = quad + mixed
                jac = np.einsum("pij,pjk->pik", jm, jac)
            y = m.forward(y)
        return sec

    def det_jacobian(self, points):
        return np.linalg.det(self.jacobian(points))


def make_diffeomorphism(kind, **params):
    """Factory for the supported map family.

    kinds: 'identity' (dimension), 'linear' (matrix), 'sine-warp'
    (amplitude, frequency, phase, direction), 'composition' (maps).
    """
    if kind == "identity":
        return IdentityMap(params["dimension"])
    if kind == "linear":
        return LinearMap(params["matrix"])
    if kind == "sine-warp":
        return SineWarp(
            params["amplitude"],
            params["frequency"],
            params.get("phase", 0.0),
            params.get("direction"),
        )
    if kind == "composition":
        return Composition(params["maps"])
    raise ValueError(f"unsupported diffeomorphism kind {kind!r}")


@dataclass(frozen=True)
class TransformedField:
    """X(t) = Z(f(t)) with exact chain-rule jets.

    gradient: B(t)^T grad Z|_f(t); hessian: B^T (hess Z) B plus the
    curvature term sum_k (d_k Z) hess(f_k), which vanishes identically for
    linear maps and at critical points for any map.
    """

    base: object
    map: object

    @property
    def dimension(self):
        return self.base.dimension

    @property
    def model(self):
        return self.base.model

    def jets(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        y = self.map.forward(pts)
        val, bgrad, bhess = self.base.jets(y)
        b = self.map.jacobian(pts)
        grad = np.einsum("pij,pi->pj", b, bgrad)
        hess = np.einsum("pia,pij,pjb->pab", b, bhess, b)
        sec = self.map.second_derivatives(pts)
        hess += np.einsum("pk,pkab->pab", bgrad, sec)
        # keep the stored matrix exactly symmetric
        hess = 0.5 * (hess + np.swapaxes(hess, 1, 2))
        return val, grad, hess

    def value_grad(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        y = self.map.forward(pts)
        val, bgrad = self.base.value_grad(y)
        b = self.map.jacobian(pts)
        return val, np.einsum("pij,pi->pj", b, bgrad)

    def values(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.base.values(self.map.forward(pts))

    def gradient_scale(self):
        return self.base.gradient_scale()

    def hessian_scale(self):
        return self.base.hessian_scale()

    def stretch_factors(self, points=None):
        """Max column norms of B over sample points: per-axis seed densification."""
        if points is None:
            points = np.zeros((1, self.dimension))
        b = self.map.jacobian(np.atleast_2d(points))
        return np.linalg.norm(b, axis=1).max(axis=0)


def transform_field(realization, diffeo):
    """Compose a realization with a diffeomorphism of matching dimension."""
    if realization.dimension != diffeo.dimension:
        raise ValueError(
            f"dimension mismatch: field is {realization.dimension}-d, "
            f"map is {diffeo.dimension}-d"
        )
    return TransformedField(base=realization, map=diffeo)
