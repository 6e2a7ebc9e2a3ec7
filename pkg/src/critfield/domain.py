"""Search domains: axis-aligned boxes, flat tori, and diffeomorphic images of boxes.

Boxes exclude a margin strip near the boundary (critical points there are
out of scope); tori have no boundary at all and admit the Euler-
characteristic completeness check.  A MappedBox is the image f(box) of a
box under a diffeomorphism -- membership is decided through the inverse
map -- and exists so a transformed field's catalog on M can be compared
against the base field's catalog on f(M).
"""

from dataclasses import dataclass, field

import numpy as np


def _grid_axes(lows, highs, counts):
    axes = [np.linspace(lo, hi, int(m), endpoint=False) + (hi - lo) / (2 * int(m))
            for lo, hi, m in zip(lows, highs, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray
    margin: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lower", np.atleast_1d(np.asarray(self.lower, dtype=float)))
        object.__setattr__(self, "upper", np.atleast_1d(np.asarray(self.upper, dtype=float)))
        if self.lower.shape != self.upper.shape:
            raise ValueError("box corners must have equal length")
        if not np.all(self.upper > self.lower):
            raise ValueError("box upper corner must exceed lower corner per axis")
        if self.margin < 0 or 2 * self.margin >= np.min(self.upper - self.lower):
            raise ValueError("margin must be nonnegative and smaller than half the box")

    kind = "box"

    @property
    def dimension(self):
        return len(self.lower)

    @property
    def sides(self):
        return self.upper - self.lower

    def volume(self):
        return float(np.prod(self.sides))

    def interior_volume(self):
        return float(np.prod(self.sides - 2 * self.margin))

    def seed_points(self, counts):
        return _grid_axes(self.lower + self.margin, self.upper - self.margin, counts)

    def contains(self, points):
        pts = np.atleast_2d(points)
        lo = self.lower + self.margin
        hi = self.upper - self.margin
        return np.all((pts > lo) & (pts < hi), axis=1)

    def canonical(self, points):
        return np.array(points, dtype=float, copy=True)

    def distance(self, x, y):
        return np.linalg.norm(np.atleast_2d(x) - np.atleast_2d(y), axis=1)

    @property
    def closed(self):
        return False


@dataclass(frozen=True)
class Torus:
    period: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "period", np.atleast_1d(np.asarray(self.period, dtype=float)))
        if not np.all(self.period > 0):
            raise ValueError("torus periods must be positive")

    kind = "torus"

    @property
    def dimension(self):
        return len(self.period)

    def volume(self):
        return float(np.prod(self.period))

    def interior_volume(self):
        return self.volume()

    def seed_points(self, counts):
        return _grid_axes(np.zeros(self.dimension), self.period, counts)

    def contains(self, points):
        return np.ones(np.atleast_2d(points).shape[0], dtype=bool)

    def canonical(self, points):
        return np.mod(np.atleast_2d(points), self.period)

    def distance(self, x, y):
        d = np.atleast_2d(x) - np.atleast_2d(y)
        d = np.mod(d + 0.5 * self.period, self.period) - 0.5 * self.period
        return np.linalg.norm(d, axis=1)

    @property
    def closed(self):
        return True


@dataclass(frozen=True)
class MappedBox:
    """The region f(base) for a diffeomorphism f; seeds and membership via f."""

    base: Box
    map: object

    kind = "mapped-box"

    @property
    def dimension(self):
        return self.base.dimension

    def seed_points(self, counts):
        return self.map.forward(self.base.seed_points(counts))

    def contains(self, points):
        return self.base.contains(self.map.inverse(np.atleast_2d(points)))

    def canonical(self, points):
        return np.array(points, dtype=float, copy=True)

    def distance(self, x, y):
        return np.linalg.norm(np.atleast_2d(x) - np.atleast_2d(y), axis=1)

    @property
    def closed(self):
        return False
