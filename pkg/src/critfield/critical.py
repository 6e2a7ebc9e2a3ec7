"""Critical-point enumeration, Morse classification, and catalog matching.

Enumeration is grid-seeded damped Newton on the exact gradient.  Converged
points inside the domain are deduplicated (torus metric on tori), sorted
lexicographically, classified by the eigenvalues of the exact Hessian, and
re-checked from scratch.  Completeness is heuristic, so every catalog
carries a refinement_stable flag (counts reproduced with a doubled seed
grid) and, on closed domains, the alternating Morse sum gives an exact
topological cross-check.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import newton
from .domain import Box, MappedBox, Torus


class NonMorseError(RuntimeError):
    """A converged critical point has a near-singular Hessian."""

    def __init__(self, location, eigenvalue, tol):
        self.location = np.asarray(location)
        self.eigenvalue = float(eigenvalue)
        super().__init__(
            f"non-Morse critical point at {np.array2string(self.location, precision=8)}: "
            f"|eigenvalue| = {abs(eigenvalue):.3e} <= tol_eig = {tol:.3e}"
        )


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for find_critical_points; None means derive from the field scales."""

    resolution: tuple | None = None  # seeds per axis
    seeds_per_wavelength: float = 6.0
    max_iterations: int = 60
    tol_grad: float | None = None  # default 1e-10 * sqrt(gradient variance)
    tol_eig: float | None = None  # default 1e-8 * sqrt(12 rho''(0))
    dedup_radius: float | None = None  # default 1e-4 * length_scale
    refine_check: bool = True


@dataclass(frozen=True)
class CriticalPoint:
    location: np.ndarray
    height: float
    index: int
    eigenvalues: np.ndarray
    gradient_residual: float
    newton_iterations: int


@dataclass(frozen=True)
class CriticalCatalog:
    points: tuple
    domain: object
    config: SearchConfig
    resolution: tuple
    refinement_stable: bool
    diagnostics: dict = dc_field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    @property
    def dimension(self):
        return self.domain.dimension

    def heights(self):
        return np.array([p.height for p in self.points])

    def indices(self):
        return np.array([p.index for p in self.points], dtype=int)

    def locations(self):
        n = self.dimension
        if not self.points:
            return np.zeros((0, n))
        return np.array([p.location for p in self.points])

    def counts_per_index(self):
        out = np.zeros(self.dimension + 1, dtype=int)
        for p in self.points:
            out[p.index] += 1
        return out


def classify(hessian, tol_eig):
    """Morse index: the number of eigenvalues below -tol_eig.

    Raises NonMorseError when any eigenvalue lies in [-tol_eig, tol_eig].
    """
    eig = np.linalg.eigvalsh(np.asarray(hessian, dtype=float))
    if np.min(np.abs(eig)) <= tol_eig:
        raise NonMorseError(np.full(len(eig), np.nan), eig[np.argmin(np.abs(eig))], tol_eig)
    return int(np.sum(eig < -tol_eig))


def _default_resolution(field, domain, config):
    if config.resolution is not None:
        res = tuple(int(m) for m in config.resolution)
        if len(res) != domain.dimension:
            raise ValueError("resolution length must match the dimension")
        return res
    if isinstance(domain, Torus):
        sides = domain.period
    elif isinstance(domain, MappedBox):
        sides = domain.base.sides
    else:
        sides = domain.sides
    # coarse probe of per-axis wavelength compression
    probe_axes = [np.linspace(0.0, s, 5) for s in sides]
    probe = np.stack([g.ravel() for g in np.meshgrid(*probe_axes, indexing="ij")], axis=1)
    stretch = np.asarray(field.stretch_factors(probe), dtype=float)
    if isinstance(domain, MappedBox):
        b = domain.map.jacobian(domain.base.seed_points([3] * domain.dimension))
        stretch = stretch * np.linalg.norm(b, axis=1).max(axis=0)
    # resolve the shortest expected wavelength 2*pi*l/3 with seeds_per_wavelength
    spacing = 2.0 * np.pi * field.model.length_scale / (3.0 * config.seeds_per_wavelength)
    counts = np.ceil(sides * stretch / spacing).astype(int)
    return tuple(int(max(4, m)) for m in counts)


def _dedup_sorted(points, domain, radius):
    """Greedy dedup after lexicographic sort; deterministic."""
    if len(points) == 0:
        return points
    order = np.lexsort(points.T[::-1])
    pts = points[order]
    kept = []
    for p in pts:
        if kept and np.any(domain.distance(np.array(kept), p[None, :]) <= radius):
            continue
        kept.append(p)
    return np.array(kept)


def _search_once(field, domain, resolution, tol_grad, tol_eig, dedup_radius, max_iterations):
    seeds = domain.seed_points(resolution)
    max_step = 0.7 * field.model.length_scale
    result = newton.newton_refine(
        field.jets, seeds, tol_grad=tol_grad,
        max_iter=max_iterations, max_step=max_step,
    )
    diag = result.tally()
    conv = result.converged()
    pts = result.points[conv]
    iters_by_loc = result.iterations[conv]
    inside = domain.contains(pts)
    pts = domain.canonical(pts[inside])
    iters_by_loc = iters_by_loc[inside]

    unique = _dedup_sorted(pts, domain, dedup_radius)
    if len(unique) == 0:
        return [], diag

    # fresh evaluation at the deduplicated locations
    val, grad, hess = field.jets(unique)
    resid = np.linalg.norm(grad, axis=1)
    eigs = np.linalg.eigvalsh(hess)
    points = []
    for i, loc in enumerate(unique):
        if np.min(np.abs(eigs[i])) <= tol_eig:
            raise NonMorseError(loc, eigs[i][np.argmin(np.abs(eigs[i]))], tol_eig)
        # min iterations over trajectories that landed here (seed-order invariant)
        d = domain.distance(pts, loc[None, :])
        nearby = d <= dedup_radius
        its = int(iters_by_loc[nearby].min()) if nearby.any() else int(iters_by_loc[np.argmin(d)])
        points.append(
            CriticalPoint(
                location=loc,
                height=float(val[i]),
                index=int(np.sum(eigs[i] < -tol_eig)),
                eigenvalues=eigs[i],
                gradient_residual=float(resid[i]),
                newton_iterations=its,
            )
        )
    return points, diag


def find_critical_points(field, domain, config=None):
    """Enumerate, deduplicate and classify the critical points in a domain.

    The returned catalog is sorted lexicographically by location.  When
    config.refine_check is set the search is repeated at doubled resolution
    and refinement_stable records whether per-index counts agree.
    """
    config = config or SearchConfig()
    if field.dimension != domain.dimension:
        raise ValueError("field and domain dimensions differ")
    tol_grad = config.tol_grad
    if tol_grad is None:
        tol_grad = 1e-10 * field.gradient_scale()
    tol_eig = config.tol_eig
    if tol_eig is None:
        tol_eig = 1e-8 * field.hessian_scale()
    dedup_radius = config.dedup_radius
    if dedup_radius is None:
        dedup_radius = 1e-4 * field.model.length_scale

    resolution = _default_resolution(field, domain, config)
    points, diag = _search_once(
        field, domain, resolution, tol_grad, tol_eig, dedup_radius, config.max_iterations
    )

    stable = True
    if config.refine_check:
        fine_res = tuple(2 * m for m in resolution)
        fine_points, fine_diag = _search_once(
            field, domain, fine_res, tol_grad, tol_eig, dedup_radius, config.max_iterations
        )
        coarse_counts = np.zeros(domain.dimension + 1, dtype=int)
        for p in points:
            coarse_counts[p.index] += 1
        fine_counts = np.zeros(domain.dimension + 1, dtype=int)
        for p in fine_points:
            fine_counts[p.index] += 1
        stable = bool(np.array_equal(coarse_counts, fine_counts))
        diag = {**diag, "refine": fine_diag}

    return CriticalCatalog(
        points=tuple(points),
        domain=domain,
        config=config,
        resolution=resolution,
        refinement_stable=stable,
        diagnostics=diag,
    )


def count_mu(catalog, u, i):
    """Number of catalog points with height >= u and Morse index i."""
    if not 0 <= i <= catalog.dimension:
        raise ValueError(f"index {i} out of range 0..{catalog.dimension}")
    return int(sum(1 for p in catalog.points if p.height >= u and p.index == i))


def morse_sum(catalog):
    """Alternating sum over indices; a topological invariant on closed domains."""
    if not catalog.domain.closed:
        raise ValueError("Morse sum is meaningful only on closed (boundaryless) domains")
    return int(sum((-1) ** p.index for p in catalog.points))


@dataclass(frozen=True)
class MatchReport:
    passed: bool
    pairs: tuple  # (i_x, i_z, distance)
    unmatched_x: tuple
    unmatched_z: tuple
    index_mismatches: tuple  # (i_x, i_z, index_x, index_z)
    height_mismatches: tuple  # (i_x, i_z, |dh|)
    max_distance: float
    max_height_difference: float

    def summary(self):
        if self.passed:
            return (
                f"PASS: {len(self.pairs)} pairs, max |f(t)-t'| = {self.max_distance:.3e}, "
                f"max |dh| = {self.max_height_difference:.3e}"
            )
        return (
            f"FAIL: {len(self.unmatched_x)} unmatched left, {len(self.unmatched_z)} "
            f"unmatched right, {len(self.index_mismatches)} index mismatches, "
            f"{len(self.height_mismatches)} height mismatches"
        )


def match_catalogs(catalog_x, catalog_z, diffeo, tol_loc=1e-6, tol_height=1e-9):
    """Greedy nearest-neighbor matching of f(catalog_X) against catalog_Z.

    PASS means a perfect bijection with every pair closer than tol_loc,
    equal Morse indices, and heights equal to tol_height.
    """
    if catalog_x.dimension != catalog_z.dimension:
        raise ValueError("catalog dimensions differ")
    nx, nz = len(catalog_x), len(catalog_z)
    if nx == 0 and nz == 0:
        return MatchReport(True, (), (), (), (), (), 0.0, 0.0)

    mapped = diffeo.forward(catalog_x.locations()) if nx else np.zeros((0, catalog_x.dimension))
    locs_z = catalog_z.locations()
    used = np.zeros(nz, dtype=bool)
    pairs, index_mismatches, height_mismatches = [], [], []
    unmatched_x = []
    max_d = 0.0
    max_dh = 0.0
    for ix in range(nx):
        if nz == 0 or used.all():
            unmatched_x.append(ix)
            continue
        d = catalog_z.domain.distance(locs_z, mapped[ix][None, :])
        d[used] = np.inf
        iz = int(np.argmin(d))
        if d[iz] > tol_loc:
            unmatched_x.append(ix)
            continue
        used[iz] = True
        pairs.append((ix, iz, float(d[iz])))
        max_d = max(max_d, float(d[iz]))
        px, pz = catalog_x.points[ix], catalog_z.points[iz]
        if px.index != pz.index:
            index_mismatches.append((ix, iz, px.index, pz.index))
        dh = abs(px.height - pz.height)
        max_dh = max(max_dh, dh)
        if dh > tol_height:
            height_mismatches.append((ix, iz, dh))
    unmatched_z = [iz for iz in range(nz) if not used[iz]]
    passed = (
        not unmatched_x
        and not unmatched_z
        and not index_mismatches
        and not height_mismatches
        and nx == nz
    )
    return MatchReport(
        passed=passed,
        pairs=tuple(pairs),
        unmatched_x=tuple(unmatched_x),
        unmatched_z=tuple(unmatched_z),
        index_mismatches=tuple(index_mismatches),
        height_mismatches=tuple(height_mismatches),
        max_distance=max_d,
        max_height_difference=max_dh,
    )
