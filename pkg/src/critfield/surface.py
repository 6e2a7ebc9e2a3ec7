"""Fields on the unit sphere and on ellipsoids, with chart-based search.

A field on S^2 is the restriction of an R^3 realization; a field on the
ellipsoid M = {t : ||g t|| = 1} (g linear, nonsingular) is X(t) = Z(g t),
so critical points of X correspond one-to-one to those of the sphere field
through t' = g t, with equal heights and Morse indices.

Charts are the six gnomonic cube faces: q(u, v) = n + u a + v b with the
face frame (a, b, n), surface point tau(u, v) = q / ||g q||, and sphere
image p(u, v) = g q / ||g q||.  All first and second derivatives of p are
closed-form, so the chart jets of h(u, v) = Z(p(u, v)) are exact.  The
intrinsic index at a critical point is read from the chart Hessian; the
reported eigenvalues solve the generalized problem H v = mu G v with the
induced metric G = J^T J, which makes them chart-independent.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.linalg import eigh as generalized_eigh

from . import newton
from .critical import MatchReport, NonMorseError, match_catalogs

_EYE = np.eye(3)
# face frames: (normal sign, axis); tangents are the other two axes in order
FACES = []
for axis in range(3):
    for sgn in (1.0, -1.0):
        n = sgn * _EYE[axis]
        a = _EYE[(axis + 1) % 3]
        b = _EYE[(axis + 2) % 3]
        FACES.append((n, a, b))


@dataclass(frozen=True)
class Ellipsoid:
    """Axis-aligned (optionally rotated) ellipsoid {R diag(axes) s : s in S^2}."""

    semi_axes: np.ndarray
    rotation: np.ndarray | None = None

    def __post_init__(self):
        axes = np.atleast_1d(np.asarray(self.semi_axes, dtype=float))
        if axes.shape != (3,) or np.any(axes <= 0):
            raise ValueError("semi_axes must be three positive numbers")
        object.__setattr__(self, "semi_axes", axes)
        if self.rotation is not None:
            r = np.asarray(self.rotation, dtype=float)
            if r.shape != (3, 3) or abs(abs(np.linalg.det(r)) - 1.0) > 1e-10:
                raise ValueError("rotation must be a 3x3 orthogonal matrix")
            object.__setattr__(self, "rotation", r)

    @property
    def to_sphere(self):
        """The linear map g with g(M) = S^2."""
        g = np.diag(1.0 / self.semi_axes)
        if self.rotation is not None:
            g = g @ self.rotation.T
        return g

    @classmethod
    def sphere(cls):
        return cls(semi_axes=np.ones(3))


@dataclass(frozen=True)
class SurfaceDomain:
    """Closed-domain marker for surface catalogs: {t : ||g t|| = 1}."""

    to_sphere: np.ndarray

    kind = "surface"
    closed = True
    dimension = 2

    def distance(self, x, y):
        return np.linalg.norm(np.atleast_2d(x) - np.atleast_2d(y), axis=1)


@dataclass(frozen=True)
class SurfaceField:
    """Scalar field on {t : ||g t|| = 1}, evaluated through cube-face charts."""

    base: object  # R^3 SpectralFieldRealization
    to_sphere: np.ndarray  # g

    def __post_init__(self):
        if self.base.dimension != 3:
            raise ValueError("surface fields need a 3-d base realization")
        object.__setattr__(self, "to_sphere", np.asarray(self.to_sphere, dtype=float))

    @property
    def model(self):
        return self.base.model

    def _rays(self, face, uv):
        n, a, b = FACES[face]
        uv = np.atleast_2d(np.asarray(uv, dtype=float))
        q = n + uv[:, [0]] * a + uv[:, [1]] * b
        return q, a, b

    def surface_points(self, face, uv):
        """tau(u, v): intersection of the ray through q with the surface."""
        q, _, _ = self._rays(face, uv)
        s = np.linalg.norm(q @ self.to_sphere.T, axis=1, keepdims=True)
        return q / s

    def chart_jets(self, face, uv):
        """(value, chart gradient, chart Hessian, tau, metric) at (u, v) points.

        The chain rule runs through p(u, v) = g q / ||g q|| including the
        second derivatives of p; metric is J^T J for the surface embedding.
        """
        q, a, b = self._rays(face, uv)
        g = self.to_sphere
        w = q @ g.T
        wu = g @ a
        wv = g @ b
        s2 = np.einsum("pi,pi->p", w, w)
        s = np.sqrt(s2)
        inv_s = 1.0 / s
        inv_s3 = inv_s / s2
        inv_s5 = inv_s3 / s2
        du = w @ wu  # (P,)
        dv = w @ wv
        cuu = wu @ wu
        cuv = wu @ wv
        cvv = wv @ wv

        p = w * inv_s[:, None]
        p_u = wu[None, :] * inv_s[:, None] - w * (du * inv_s3)[:, None]
        p_v = wv[None, :] * inv_s[:, None] - w * (dv * inv_s3)[:, None]
        p_uu = (-2.0 * du * inv_s3)[:, None] * wu[None, :] + (
            (3.0 * du**2 * inv_s5 - cuu * inv_s3)[:, None] * w
        )
        p_vv = (-2.0 * dv * inv_s3)[:, None] * wv[None, :] + (
            (3.0 * dv**2 * inv_s5 - cvv * inv_s3)[:, None] * w
        )
        p_uv = (
            -(dv * inv_s3)[:, None] * wu[None, :]
            - (du * inv_s3)[:, None] * wv[None, :]
            + (3.0 * du * dv * inv_s5 - cuv * inv_s3)[:, None] * w
        )

        val, grad3, hess3 = self.base.jets(p)
        jac = np.stack([p_u, p_v], axis=2)  # (P, 3, 2)
        grad2 = np.einsum("pic,pi->pc", jac, grad3)
        hess2 = np.einsum("pic,pij,pjd->pcd", jac, hess3, jac)
        hess2[:, 0, 0] += np.einsum("pi,pi->p", grad3, p_uu)
        hess2[:, 1, 1] += np.einsum("pi,pi->p", grad3, p_vv)
        cross = np.einsum("pi,pi->p", grad3, p_uv)
        hess2[:, 0, 1] += cross
        hess2[:, 1, 0] += cross
        hess2 = 0.5 * (hess2 + np.swapaxes(hess2, 1, 2))

        # surface embedding tau = q / ||g q|| and its induced metric
        tau = q * inv_s[:, None]
        tau_u = a[None, :] * inv_s[:, None] - q * (du * inv_s3)[:, None]
        tau_v = b[None, :] * inv_s[:, None] - q * (dv * inv_s3)[:, None]
        emb = np.stack([tau_u, tau_v], axis=2)  # (P, 3, 2)
        metric = np.einsum("pic,pid->pcd", emb, emb)
        return val, grad2, hess2, tau, metric


def sphere_field(realization):
    """Restrict an isotropic R^3 realization to the unit sphere."""
    if realization.dimension != 3:
        raise ValueError(f"need a 3-d realization, got {realization.dimension}-d")
    return SurfaceField(base=realization, to_sphere=np.eye(3))


def ellipsoid_field(sphere_field_obj, ellipsoid):
    """X(t) = Z(g t) on the ellipsoid, Z the given sphere field's base."""
    return SurfaceField(base=sphere_field_obj.base, to_sphere=ellipsoid.to_sphere)


@dataclass(frozen=True)
class SurfaceSearchConfig:
    seeds_per_face: int = 40
    overlap: float = 0.15  # seed/accept window beyond the face, in chart units
    newton_bound: float = 1.45  # retire iterates beyond this chart radius
    max_iterations: int = 60
    tol_grad: float | None = None
    tol_eig: float | None = None
    dedup_radius: float | None = None
    refine_check: bool = True


@dataclass(frozen=True)
class SurfaceCriticalPoint:
    location: np.ndarray  # ambient, on the surface
    chart: int
    chart_uv: np.ndarray
    height: float
    index: int
    eigenvalues: np.ndarray  # generalized (metric) eigenvalues, chart-invariant
    gradient_residual: float  # Riemannian gradient norm
    newton_iterations: int


@dataclass(frozen=True)
class SurfaceCatalog:
    points: tuple
    domain: SurfaceDomain
    config: SurfaceSearchConfig
    refinement_stable: bool
    diagnostics: dict = dc_field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    dimension = 2

    def heights(self):
        return np.array([p.height for p in self.points])

    def indices(self):
        return np.array([p.index for p in self.points], dtype=int)

    def locations(self):
        if not self.points:
            return np.zeros((0, 3))
        return np.array([p.location for p in self.points])

    def counts_per_index(self):
        out = np.zeros(3, dtype=int)
        for p in self.points:
            out[p.index] += 1
        return out


def _riemannian_norm(grad2, metric):
    sol = np.linalg.solve(metric, grad2[:, :, None])[:, :, 0]
    return np.sqrt(np.einsum("pc,pc->p", grad2, sol))


def _search_surface_once(sfield, seeds_per_face, cfg, tol_grad, tol_eig, dedup_radius):
    span = 1.0 + cfg.overlap
    m = int(seeds_per_face)
    axis_pts = np.linspace(-span, span, m, endpoint=False) + span / m
    uu, vv = np.meshgrid(axis_pts, axis_pts, indexing="ij")
    seed_uv = np.stack([uu.ravel(), vv.ravel()], axis=1)

    raw = []  # (tau, uv, face, iterations)
    diag = {}
    for face in range(6):
        def jets_fn(uv, _face=face):
            val, g2, h2, _, _ = sfield.chart_jets(_face, uv)
            return val, g2, h2

        def valid_fn(uv):
            return np.max(np.abs(uv), axis=1) <= cfg.newton_bound

        result = newton.newton_refine(
            jets_fn, seed_uv, tol_grad=0.25 * tol_grad,
            max_iter=cfg.max_iterations, max_step=0.35 * sfield.model.length_scale,
            valid_fn=valid_fn,
        )
        for k, v in result.tally().items():
            diag[k] = diag.get(k, 0) + v
        conv = result.converged()
        uv = result.points[conv]
        keep = np.max(np.abs(uv), axis=1) <= span
        uv = uv[keep]
        if uv.shape[0] == 0:
            continue
        tau = sfield.surface_points(face, uv)
        its = result.iterations[conv][keep]
        for i in range(uv.shape[0]):
            raw.append((tau[i], uv[i], face, int(its[i])))

    if not raw:
        return [], diag

    # deterministic cross-chart dedup on ambient locations
    locs = np.array([r[0] for r in raw])
    order = np.lexsort(locs.T[::-1])
    kept = []
    for oi in order:
        loc = locs[oi]
        if kept and np.any(np.linalg.norm(np.array([locs[j] for j in kept]) - loc, axis=1) <= dedup_radius):
            continue
        kept.append(oi)

    points = []
    for oi in kept:
        tau, uv, face, its = raw[oi]
        val, g2, h2, tau2, metric = sfield.chart_jets(face, uv[None, :])
        resid = float(_riemannian_norm(g2, metric)[0])
        eig = generalized_eigh(h2[0], metric[0], eigvals_only=True)
        if np.min(np.abs(eig)) <= tol_eig:
            raise NonMorseError(tau, eig[np.argmin(np.abs(eig))], tol_eig)
        # min iterations among trajectories landing here, for determinism
        same = np.linalg.norm(locs - tau, axis=1) <= dedup_radius
        min_its = int(min(raw[j][3] for j in np.flatnonzero(same)))
        points.append(
            SurfaceCriticalPoint(
                location=tau,
                chart=int(face),
                chart_uv=uv,
                height=float(val[0]),
                index=int(np.sum(eig < -tol_eig)),
                eigenvalues=np.asarray(eig),
                gradient_residual=resid,
                newton_iterations=min_its,
            )
        )
    points.sort(key=lambda p: tuple(p.location))
    return points, diag


def find_surface_critical_points(sfield, config=None):
    """Enumerate critical points of a surface field across the chart atlas."""
    cfg = config or SurfaceSearchConfig()
    tol_grad = cfg.tol_grad if cfg.tol_grad is not None else 1e-10 * sfield.base.gradient_scale()
    tol_eig = cfg.tol_eig if cfg.tol_eig is not None else 1e-8 * sfield.base.hessian_scale()
    dedup_radius = cfg.dedup_radius if cfg.dedup_radius is not None else 1e-4 * sfield.model.length_scale
    surface = SurfaceDomain(to_sphere=sfield.to_sphere)

    points, diag = _search_surface_once(
        sfield, cfg.seeds_per_face, cfg, tol_grad, tol_eig, dedup_radius
    )
    stable = True
    if cfg.refine_check:
        fine, fine_diag = _search_surface_once(
            sfield, 2 * cfg.seeds_per_face, cfg, tol_grad, tol_eig, dedup_radius
        )
        c0 = np.zeros(3, dtype=int)
        for p in points:
            c0[p.index] += 1
        c1 = np.zeros(3, dtype=int)
        for p in fine:
            c1[p.index] += 1
        stable = bool(np.array_equal(c0, c1))
        diag = {**diag, "refine": fine_diag}
    return SurfaceCatalog(
        points=tuple(points), domain=surface, config=cfg,
        refinement_stable=stable, diagnostics=diag,
    )


class _LinearForward:
    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)

    def forward(self, points):
        return np.atleast_2d(points) @ self.matrix.T


def verify_surface_correspondence(ellipsoid_catalog, sphere_catalog, to_sphere,
                                  tol_loc=1e-6, tol_height=1e-9):
    """Match g(ellipsoid critical points) against the sphere catalog.

    PASS requires a perfect bijection with equal indices and equal heights,
    the per-realization form of the transfer between the two surfaces.
    """
    return match_catalogs(
        ellipsoid_catalog, sphere_catalog, _LinearForward(to_sphere),
        tol_loc=tol_loc, tol_height=tol_height,
    )


def surface_mesh_text(sfield, resolution=48):
    """Plain-text mesh dump: 'v x y z value' vertex lines, 'f i j k' faces.

    Vertices come from the six cube-face charts at the given per-face
    resolution; faces are the triangulated chart quads (vertex indices are
    1-based, duplicates along face seams are kept for simplicity).
    """
    lines = ["# critfield surface mesh: v x y z value / f i j k (1-based)"]
    offset = 0
    faces_out = []
    for face in range(6):
        ax = np.linspace(-1.0, 1.0, resolution)
        uu, vv = np.meshgrid(ax, ax, indexing="ij")
        uv = np.stack([uu.ravel(), vv.ravel()], axis=1)
        tau = sfield.surface_points(face, uv)
        vals = sfield.base.values(tau @ sfield.to_sphere.T)
        for p, val in zip(tau, vals):
            lines.append(f"v {p[0]!r} {p[1]!r} {p[2]!r} {val!r}")
        for i in range(resolution - 1):
            for j in range(resolution - 1):
                a = offset + i * resolution + j + 1
                b = a + 1
                c = a + resolution
                d = c + 1
                faces_out.append(f"f {a} {b} {d}")
                faces_out.append(f"f {a} {d} {c}")
        offset += resolution * resolution
    return "\n".join(lines + faces_out) + "\n"


def export_surface_mesh(sfield, path, resolution=48):
    """Write surface_mesh_text to a file."""
    with open(path, "w") as fh:
        fh.write(surface_mesh_text(sfield, resolution))


__all__ = [
    "Ellipsoid",
    "SurfaceDomain",
    "SurfaceField",
    "SurfaceSearchConfig",
    "SurfaceCriticalPoint",
    "SurfaceCatalog",
    "sphere_field",
    "ellipsoid_field",
    "find_surface_critical_points",
    "verify_surface_correspondence",
    "surface_mesh_text",
    "export_surface_mesh",
    "MatchReport",
]
