"""Field-free Monte Carlo oracles for critical-point statistics.

Works entirely with the joint Gaussian law of (value x, Hessian H) at a
point of a unit-variance stationary isotropic field.  Because the gradient
at a point is independent of (x, H) for such fields, conditioning on a
zero gradient leaves this joint law unchanged, so

* the height distribution of index-i critical points is the ratio
      F_i(u) = E[|det H| 1{x > u} 1{index = i}] / E[|det H| 1{index = i}],
* the expected count of index-i critical points above u per unit volume is
      (2 pi lambda)^(-N/2) E[|det H| 1{x >= u, index = i}].

Both are estimated by vectorized sampling of (x, H); the determinant comes
from the same eigenvalues used for the index, so the two are always
mutually consistent per sample.
"""

from dataclasses import dataclass

import numpy as np

from .covariance import SpectralMoments


def sample_value_hessian(moments, rng, n=1):
    """Draw n samples of (x, H): x (n,), H (n, N, N) symmetric.

    Conditional decomposition: E[H_ii | x] = a x; the diagonal fluctuation
    has covariance 2b I + (b - a^2) J (J = all ones), realized as
    sqrt(2b) (z - zbar) + sqrt((2b + N(b - a^2))/N) w; off-diagonals are
    independent N(0, b).  Marginally this reproduces Var(H_ii) = 3b,
    Cov(H_ii, H_jj) = b, Var(H_ij) = b and Cov(x, H_ii) = a exactly.
    """
    ndim = moments.dimension
    a, b = moments.a, moments.b
    common_var = 2.0 * b + ndim * (b - a * a)
    if b < 0 or common_var < -1e-12:
        raise ValueError("moments define an indefinite joint covariance")
    common_var = max(common_var, 0.0)

    x = rng.standard_normal(n)
    z = rng.standard_normal((n, ndim))
    w = rng.standard_normal(n)
    diag = np.sqrt(2.0 * b) * (z - z.mean(axis=1, keepdims=True))
    diag += np.sqrt(common_var / ndim) * w[:, None]
    diag += a * x[:, None]

    h = np.zeros((n, ndim, ndim))
    ii = np.arange(ndim)
    h[:, ii, ii] = diag
    if ndim > 1:
        iu, ju = np.triu_indices(ndim, k=1)
        off = np.sqrt(b) * rng.standard_normal((n, len(iu)))
        h[:, iu, ju] = off
        h[:, ju, iu] = off
    return x, h


def _weights(x, h, index):
    """|det H| restricted to samples of the requested Morse index (None = all)."""
    eig = np.linalg.eigvalsh(h)
    absdet = np.abs(np.prod(eig, axis=1))
    if index is None:
        return absdet
    idx = np.sum(eig < 0.0, axis=1)
    return np.where(idx == index, absdet, 0.0)


@dataclass(frozen=True)
class HeightDistEstimate:
    """Monte Carlo estimate of the index-i critical height survival curve."""

    u_grid: np.ndarray
    index: int
    estimate: np.ndarray
    std_error: np.ndarray
    n: int
    n_effective: float
    reliable: bool


def estimate_height_dist(moments, index, u_grid, n, rng):
    """Ratio estimator of F_i(u) on a grid, common random numbers across u.

    Sharing one sample across thresholds makes the curve exactly
    non-increasing.  Standard errors come from the delta method for the
    ratio; estimates with a denominator of fewer than 10 effective samples
    are flagged unreliable rather than suppressed.
    """
    if not 0 <= index <= moments.dimension:
        raise ValueError(f"index {index} out of range 0..{moments.dimension}")
    u_grid = np.atleast_1d(np.asarray(u_grid, dtype=float))
    x, h = sample_value_hessian(moments, rng, n)
    w = _weights(x, h, index)
    denom = w.mean()
    wsum = w.sum()
    n_eff = float(wsum**2 / np.sum(w**2)) if wsum > 0 else 0.0
    est = np.empty(len(u_grid))
    se = np.empty(len(u_grid))
    for j, u in enumerate(u_grid):
        num_terms = w * (x > u)
        ratio = num_terms.mean() / denom if denom > 0 else np.nan
        est[j] = ratio
        # delta method: Var(A/B) ~ Var(a - r b) / (n B^2)
        resid = num_terms - ratio * w
        se[j] = np.sqrt(np.var(resid) / n) / denom if denom > 0 else np.nan
    return HeightDistEstimate(
        u_grid=u_grid,
        index=index,
        estimate=est,
        std_error=se,
        n=n,
        n_effective=n_eff,
        reliable=bool(n_eff >= 10.0),
    )


@dataclass(frozen=True)
class DensityEstimate:
    """Expected critical-point count per unit volume, with Monte Carlo error."""

    value: float
    std_error: float
    n: int


def expected_count_density(moments, u, index, n, rng):
    """(2 pi lambda)^(-N/2) E[|det H| 1{x >= u, index = i}] by Monte Carlo.

    index=None counts critical points of any index.  u may be -inf/+inf.
    """
    x, h = sample_value_hessian(moments, rng, n)
    w = _weights(x, h, index) * (x >= u)
    scale = (2.0 * np.pi * moments.lam) ** (-moments.dimension / 2.0)
    return DensityEstimate(
        value=float(scale * w.mean()),
        std_error=float(scale * np.std(w) / np.sqrt(n)),
        n=n,
    )


def predicted_aniso_count(moments, matrix, box, u, index, n, rng):
    """Corollary prediction |det A| * Vol(D) * density for X(t) = Z(A t)."""
    a = np.asarray(matrix, dtype=float)
    det = np.linalg.det(a)
    if abs(det) < 1e-12:
        raise ValueError("anisotropy matrix must be nonsingular")
    dens = expected_count_density(moments, u, index, n, rng)
    vol = box.interior_volume()
    return DensityEstimate(
        value=abs(det) * vol * dens.value,
        std_error=abs(det) * vol * dens.std_error,
        n=n,
    )
