"""Isotropic covariance models and their derivative moments at zero lag.

A model is the function rho with C(h) = rho(||h||^2), unit variance
(rho(0) = 1), together with a sampler for its spectral density.  Two kinds
are provided, both C-infinity in the sample-path sense:

* ``squared-exponential``: rho(s) = exp(-s / (2 l^2)); spectral density is
  the N(0, I/l^2) law.
* ``band-limited``: spectral density uniform on the ball of radius 1/l;
  rho is the ball's characteristic function.

The zero-lag quantities that drive everything downstream:

    lambda = -2 rho'(0)        variance of each gradient component
    a      =  2 rho'(0)        Cov(X, H_ii)
    b      =  4 rho''(0)       Var(H_ij) for i < j; Cov(H_ii, H_jj) = b,
                               Var(H_ii) = 3 b

The gradient is uncorrelated with (X, Hessian) at a point (odd derivatives
of C vanish at 0), so conditioning on a zero gradient leaves the (X, H)
law untouched; the Kac-Rice module relies on this.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import j1

KINDS = ("squared-exponential", "band-limited")


@dataclass(frozen=True)
class CovarianceModel:
    """Admissible isotropic covariance rho(squared distance)."""

    kind: str
    length_scale: float
    dimension: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unsupported covariance kind {self.kind!r}")
        if not self.length_scale > 0:
            raise ValueError(f"length_scale must be positive, got {self.length_scale}")
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")

    def rho(self, s):
        """Covariance as a function of squared distance s = ||t - u||^2."""
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.kind == "squared-exponential":
            out = np.exp(-s / (2.0 * self.length_scale**2))
            return float(out[0]) if scalar else out
        # band-limited: characteristic function of the uniform ball, radius 1/l
        r = np.sqrt(s) / self.length_scale
        out = np.empty_like(r)
        big = r > 1e-2
        rb = r[big]
        if self.dimension == 1:
            out[big] = np.sin(rb) / rb
            c2, c4 = 1.0 / 6.0, 1.0 / 120.0
        elif self.dimension == 2:
            out[big] = 2.0 * j1(rb) / rb
            c2, c4 = 1.0 / 8.0, 1.0 / 192.0
        else:
            out[big] = 3.0 * (np.sin(rb) - rb * np.cos(rb)) / rb**3
            c2, c4 = 1.0 / 10.0, 1.0 / 280.0
        # Taylor branch avoids cancellation near 0 (error O(r^6) < 1e-12)
        rs = r[~big] ** 2
        out[~big] = 1.0 - c2 * rs + c4 * rs**2
        return float(out[0]) if scalar else out

    @property
    def rho_prime0(self):
        """rho'(0); always negative for an admissible model."""
        if self.kind == "squared-exponential":
            return -1.0 / (2.0 * self.length_scale**2)
        # -E[w_i^2] / 2 for the uniform ball of radius 1/l
        return -1.0 / (2.0 * self.length_scale**2 * (self.dimension + 2))

    @property
    def rho_doubleprime0(self):
        """rho''(0) = E[w_1^4] / 12."""
        if self.kind == "squared-exponential":
            return 1.0 / (4.0 * self.length_scale**4)
        n = self.dimension
        return 1.0 / (4.0 * self.length_scale**4 * (n + 2) * (n + 4))

    def sample_frequencies(self, count, rng):
        """Draw `count` iid frequency vectors from the spectral density."""
        n = self.dimension
        if self.kind == "squared-exponential":
            return rng.standard_normal((count, n)) / self.length_scale
        # uniform in the ball of radius 1/l: uniform direction, r ~ R*U^(1/N)
        radius = 1.0 / self.length_scale
        direction = rng.standard_normal((count, n))
        norms = np.linalg.norm(direction, axis=1, keepdims=True)
        # zero-norm draws have probability zero; guard anyway
        norms[norms == 0] = 1.0
        direction /= norms
        r = radius * rng.random(count) ** (1.0 / n)
        return direction * r[:, None]


def make_covariance(kind, length_scale, dimension):
    """Construct an admissible covariance model (rho(0) = 1 by construction)."""
    return CovarianceModel(kind=kind, length_scale=float(length_scale), dimension=int(dimension))


@dataclass(frozen=True)
class SpectralMoments:
    """Scalar parameters of the joint Gaussian law of (value, Hessian) at a point.

    sigma2 = Var X = 1, lam = per-axis gradient variance, a = Cov(X, H_ii),
    b = Var(H_ij) for i < j.  The gradient is independent of (X, H).
    """

    dimension: int
    sigma2: float
    lam: float
    a: float
    b: float

    @property
    def hessian_scale(self):
        """sqrt(Var H_ii) = sqrt(3 b), the natural eigenvalue scale."""
        return np.sqrt(3.0 * self.b)

    def conditional_diag_covariance(self):
        """Covariance of (H_11..H_NN) given X: 2b I + (b - a^2) J."""
        n = self.dimension
        return 2.0 * self.b * np.eye(n) + (self.b - self.a**2) * np.ones((n, n))


def spectral_moments(model):
    """Derivative moments of the stationary covariance C(h) = rho(||h||^2).

    Raises ValueError when the implied joint covariance of (X, upper
    triangle of H) is not positive semidefinite.  Note the admissibility
    condition is the PSD of that matrix, i.e. b > 0 and
    2b + N(b - a^2) >= 0; the band-limited model has b < a^2 yet is valid.
    """
    n = model.dimension
    a = 2.0 * model.rho_prime0
    b = 4.0 * model.rho_doubleprime0
    lam = -2.0 * model.rho_prime0
    if lam <= 0:
        raise ValueError("gradient variance must be positive (rho'(0) < 0 required)")
    if b <= 0:
        raise ValueError("Hessian moment b = 4 rho''(0) must be positive")
    # smallest eigenvalue of the conditional diagonal-block covariance
    if 2.0 * b + n * (b - a**2) < -1e-12:
        raise ValueError(
            "invalid joint law of (value, Hessian): "
            f"2b + N(b - a^2) = {2 * b + n * (b - a**2):.6g} < 0"
        )
    return SpectralMoments(dimension=n, sigma2=1.0, lam=lam, a=a, b=b)
