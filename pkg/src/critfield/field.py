"""Random-wave field realizations with exact analytic jets.

A realization is z(t) = sum_k A_k cos(<w_k, t> + c_k) with frequencies drawn
from the covariance model's spectral density and phases uniform on [0, 2pi).
With A_k = sqrt(2/K) the pointwise variance over the phase ensemble is
exactly 1 for every K, and the ensemble covariance at lag h is the average
of cos(<w, h>) under the frequency law, which converges to rho(||h||^2).

In torus mode the frequencies are rounded to the lattice (2pi/L) Z^N, which
makes every realization exactly L-periodic per axis.  Waves that land on
the same lattice site are merged by phasor addition into a single wave with
its own amplitude; this rewrites the identical function with fewer terms
(the speed win on coarse lattices is large) and is why amplitudes are
stored per wave.
"""

from dataclasses import dataclass

import numpy as np

from . import backends
from .covariance import CovarianceModel, make_covariance


@dataclass(frozen=True)
class FieldJet:
    """Value, gradient and Hessian of a field at one point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray


@dataclass(frozen=True)
class SpectralFieldRealization:
    """Finite cosine superposition; immutable and safe to share across workers."""

    model: CovarianceModel
    frequencies: np.ndarray  # (K, N)
    phases: np.ndarray  # (K,)
    amplitudes: np.ndarray  # (K,)
    period: np.ndarray | None = None  # (N,) axis periods in torus mode
    nominal_waves: int = 0  # K requested before torus consolidation

    def __post_init__(self):
        freqs = np.ascontiguousarray(np.atleast_2d(self.frequencies), dtype=float)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "phases", np.ascontiguousarray(self.phases, dtype=float))
        object.__setattr__(self, "amplitudes", np.ascontiguousarray(self.amplitudes, dtype=float))
        if self.period is not None:
            object.__setattr__(self, "period", np.asarray(self.period, dtype=float))
        if not self.nominal_waves:
            object.__setattr__(self, "nominal_waves", len(self.phases))
        if not (len(self.phases) == len(self.amplitudes) == self.frequencies.shape[0]):
            raise ValueError("frequencies, phases and amplitudes must have equal length")

    @property
    def dimension(self):
        return self.frequencies.shape[1]

    @property
    def periodic(self):
        return self.period is not None

    def jets(self, points):
        """Exact (value, gradient, Hessian) arrays at a (P, N) batch of points."""
        pts = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
        return backends.cosine_jets(self.frequencies, self.amplitudes, self.phases, pts)

    def value_grad(self, points):
        pts = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
        return backends.cosine_val_grad(self.frequencies, self.amplitudes, self.phases, pts)

    def values(self, points):
        pts = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
        return backends.cosine_values(self.frequencies, self.amplitudes, self.phases, pts)

    def gradient_scale(self):
        """sqrt(lambda), the natural size of one gradient component."""
        return float(np.sqrt(-2.0 * self.model.rho_prime0))

    def hessian_scale(self):
        """sqrt(12 rho''(0)), the natural size of one Hessian eigenvalue."""
        return float(np.sqrt(12.0 * self.model.rho_doubleprime0))

    def stretch_factors(self, points=None):
        """Per-axis wavelength compression relative to the base model (1 here)."""
        return np.ones(self.dimension)


def evaluate(field, t):
    """Exact jet of a realization or transformed field at a single point."""
    val, grad, hess = field.jets(np.atleast_2d(np.asarray(t, dtype=float)))
    return FieldJet(value=float(val[0]), gradient=grad[0], hessian=hess[0])


def _consolidate_lattice(freqs, phases, amp, period):
    """Merge waves sharing a lattice frequency: sum_j cos(p + c_j) = R cos(p + psi).

    Exact rewrite of the same function via phasor addition; amplitudes become
    per-wave.  Frequencies are mapped to a canonical representative so that
    (w, c) and (-w, -c), which define the same wave, always merge.
    """
    k = np.round(freqs * period / (2.0 * np.pi)).astype(np.int64)
    # canonical sign: first nonzero lattice coordinate positive
    sign = np.ones(len(k), dtype=np.int64)
    for axis in range(k.shape[1]):
        undecided = sign == 1
        for prev in range(axis):
            undecided &= k[:, prev] == 0
        neg = undecided & (k[:, axis] < 0)
        sign[neg] = -1
    k_canon = k * sign[:, None]
    ph_canon = phases * sign
    uniq, inverse = np.unique(k_canon, axis=0, return_inverse=True)
    phasor = np.zeros(len(uniq), dtype=complex)
    np.add.at(phasor, inverse, np.exp(1j * ph_canon))
    amps = amp * np.abs(phasor)
    new_phases = np.mod(np.angle(phasor), 2.0 * np.pi)
    keep = amps > 1e-15
    new_freqs = uniq[keep] * (2.0 * np.pi / period)
    return new_freqs.astype(float), new_phases[keep], amps[keep]


def sample_field(model, num_waves, rng, torus_period=None):
    """Draw one realization: K waves from the model's spectral density.

    torus_period (scalar or per-axis) rounds frequencies to the lattice
    (2pi/L) Z^N so the realization is exactly periodic, then merges
    coincident lattice waves.
    """
    if num_waves < 1:
        raise ValueError("need at least one wave")
    freqs = model.sample_frequencies(num_waves, rng)
    phases = rng.random(num_waves) * 2.0 * np.pi
    amp = np.sqrt(2.0 / num_waves)
    period = None
    if torus_period is not None:
        period = np.broadcast_to(np.asarray(torus_period, dtype=float), (model.dimension,)).copy()
        if np.any(period <= 0):
            raise ValueError("torus period must be positive")
        freqs, phases, amps = _consolidate_lattice(freqs, phases, amp, period)
    else:
        amps = np.full(num_waves, amp)
    return SpectralFieldRealization(
        model=model,
        frequencies=freqs,
        phases=phases,
        amplitudes=amps,
        period=period,
        nominal_waves=num_waves,
    )


# -- reproducibility: plain-text serialization --------------------------------

_FORMAT_TAG = "critfield-realization v1"


def realization_to_text(realization):
    """Documented text format: header key/values, then one row per wave.

    Row columns: w_1 .. w_N  amplitude  phase, full decimal precision.
    """
    model = realization.model
    lines = [
        _FORMAT_TAG,
        f"kind = {model.kind}",
        f"length_scale = {model.length_scale!r}",
        f"dimension = {model.dimension}",
        f"waves = {realization.frequencies.shape[0]}",
        f"nominal_waves = {realization.nominal_waves}",
    ]
    if realization.periodic:
        lines.append("period = " + " ".join(repr(x) for x in realization.period))
    lines.append("columns = " + " ".join(f"w_{i+1}" for i in range(model.dimension)) + " amplitude phase")
    for row, a, c in zip(realization.frequencies, realization.amplitudes, realization.phases):
        lines.append(" ".join(repr(x) for x in row) + f" {a!r} {c!r}")
    return "\n".join(lines) + "\n"


def realization_from_text(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != _FORMAT_TAG:
        raise ValueError("not a critfield realization file")
    header = {}
    body_start = None
    for i, ln in enumerate(lines[1:], start=1):
        if "=" in ln:
            key, _, val = ln.partition("=")
            header[key.strip()] = val.strip()
            if key.strip() == "columns":
                body_start = i + 1
                break
        else:
            raise ValueError(f"malformed header line: {ln!r}")
    model = make_covariance(header["kind"], float(header["length_scale"]), int(header["dimension"]))
    n = model.dimension
    rows = np.array([[float(x) for x in ln.split()] for ln in lines[body_start:]])
    if rows.shape[0] != int(header["waves"]) or rows.shape[1] != n + 2:
        raise ValueError("wave table does not match header")
    period = None
    if "period" in header:
        period = np.array([float(x) for x in header["period"].split()])
    return SpectralFieldRealization(
        model=model,
        frequencies=rows[:, :n],
        phases=rows[:, n + 1],
        amplitudes=rows[:, n],
        period=period,
        nominal_waves=int(header["nominal_waves"]),
    )
