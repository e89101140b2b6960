"""Shaped Gaussian laser fields, frequency grids and spectral phase masks.

All frequencies are offsets from the carrier in wavenumbers (cm^-1), phases
are in radians and times in femtoseconds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: speed of light in cm/fs
SPEED_OF_LIGHT = 2.99792458e-5

#: minimum grid half-width in units of the widest field bandwidth
MIN_COVERAGE = 4.0
#: default grid half-width in units of the widest field bandwidth
DEFAULT_COVERAGE = 5.0


class GridTruncationError(ValueError):
    """Raised when a grid is too narrow for the fields sampled on it."""


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform frequency grid, symmetric about ``center_offset``.

    Points sit at ``center_offset + k * spacing / 2`` for the integers
    ``k = -(n-1), -(n-1)+2, ..., n-1``, so the sample set is exactly mirror
    symmetric. With an even ``n_points`` the grid does not contain the
    center itself.
    """

    half_width: float
    n_points: int = 2048
    center_offset: float = 0.0

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("n_points must be at least 2")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @classmethod
    def for_bandwidths(cls, *bandwidths: float, n_points: int = 2048,
                       coverage: float = DEFAULT_COVERAGE) -> "FrequencyGrid":
        return cls(half_width=coverage * max(bandwidths), n_points=n_points)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    @property
    def half_indices(self) -> np.ndarray:
        """Integer positions of the samples in units of ``spacing / 2``."""
        return np.arange(-(self.n_points - 1), self.n_points, 2)

    @property
    def offsets(self) -> np.ndarray:
        return self.center_offset + self.half_indices * (0.5 * self.spacing)

    def check_covers(self, bandwidth: float, coverage: float = MIN_COVERAGE):
        if self.half_width < coverage * bandwidth * (1 - 1e-12):
            raise GridTruncationError(
                f"grid half-width {self.half_width:g} cm^-1 is narrower than "
                f"{coverage:g} x bandwidth {bandwidth:g} cm^-1")

    def refined(self, factor: int = 2) -> "FrequencyGrid":
        return FrequencyGrid(self.half_width, self.n_points * factor,
                             self.center_offset)


# --------------------------------------------------------------------------
# phase profiles


@dataclass(frozen=True)
class PhaseProfile:
    """Base class of spectral phase masks; call with offsets to evaluate."""

    def _evaluate(self, offsets: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, offsets) -> np.ndarray:
        offsets = np.asarray(offsets, dtype=float)
        return self._evaluate(offsets) + self.global_offset

    def with_offset(self, global_offset: float) -> "PhaseProfile":
        from dataclasses import replace
        return replace(self, global_offset=global_offset)

    def __add__(self, other: "PhaseProfile") -> "SumPhase":
        return SumPhase((self, other))


@dataclass(frozen=True)
class ZeroPhase(PhaseProfile):
    """Flat phase, i.e. a transform-limited pulse."""

    global_offset: float = 0.0

    def _evaluate(self, offsets):
        return np.zeros_like(offsets)


@dataclass(frozen=True)
class LinearPhase(PhaseProfile):
    """``slope * omega``; a slope of ``tau`` cm delays the pulse by
    ``tau / (2 pi c)`` fs."""

    slope: float = 0.0
    global_offset: float = 0.0

    def _evaluate(self, offsets):
        return self.slope * offsets


@dataclass(frozen=True)
class ArctanPhase(PhaseProfile):
    """``arctan(omega / linewidth)``."""

    linewidth: float = 4.8
    global_offset: float = 0.0

    def __post_init__(self):
        if not self.linewidth > 0:
            raise ValueError("linewidth must be positive")

    def _evaluate(self, offsets):
        return np.arctan(offsets / self.linewidth)


@dataclass(frozen=True)
class ModifiedArctanPhase(PhaseProfile):
    """``arctan(omega / (linewidth - lambda_gamma * (omega**2 + linewidth**2)))``
    on the continuous odd branch.

    Where the denominator changes sign the principal arctan jumps by pi; the
    two-argument form used here passes smoothly through +-pi/2 instead and
    tends to +-pi in the far wings.
    """

    linewidth: float = 4.8
    lambda_gamma: float = 0.0
    global_offset: float = 0.0

    def _evaluate(self, offsets):
        g = self.linewidth
        denom = g - self.lambda_gamma * (offsets**2 + g**2)
        return np.arctan2(offsets, denom)


@dataclass(frozen=True)
class PiStepPhase(PhaseProfile):
    """Staircase mask rising by pi at every listed position.

    The value jumps *at* a step position (right-continuous). With
    ``low_side_zero`` the region left of all steps is at 0, otherwise the
    region right of all steps is.
    """

    positions: tuple[float, ...] = (0.0,)
    low_side_zero: bool = True
    global_offset: float = 0.0

    def __post_init__(self):
        pos = tuple(float(p) for p in self.positions)
        if any(b < a for a, b in zip(pos, pos[1:])):
            raise ValueError("step positions must be sorted")
        object.__setattr__(self, "positions", pos)

    def _evaluate(self, offsets):
        count = np.searchsorted(np.asarray(self.positions), offsets, side="right")
        if not self.low_side_zero:
            count = count - len(self.positions)
        return np.pi * count


@dataclass(frozen=True)
class TabulatedPhase(PhaseProfile):
    """Piecewise-linear interpolation of node values, held constant beyond
    the outermost nodes."""

    nodes: tuple[float, ...] = (0.0,)
    values: tuple[float, ...] = (0.0,)
    global_offset: float = 0.0

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size == 0:
            raise ValueError("nodes and values must be 1-D of equal, nonzero length")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(values))):
            raise ValueError("nodes and values must be finite")
        object.__setattr__(self, "nodes", tuple(nodes.tolist()))
        object.__setattr__(self, "values", tuple(values.tolist()))

    def _evaluate(self, offsets):
        return np.interp(offsets, self.nodes, self.values)


@dataclass(frozen=True)
class SumPhase(PhaseProfile):
    """Weighted sum of other profiles."""

    terms: tuple[PhaseProfile, ...] = ()
    weights: tuple[float, ...] | None = None
    global_offset: float = 0.0

    def _evaluate(self, offsets):
        weights = self.weights or (1.0,) * len(self.terms)
        out = np.zeros_like(offsets)
        for w, term in zip(weights, self.terms):
            out = out + w * term(offsets)
        return out


def evaluate_phase(profile: PhaseProfile, offsets) -> np.ndarray:
    """Evaluate a phase mask at the given offsets (radians)."""
    return profile(offsets)


# --------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class SpectralField:
    """Gaussian pulse ``E/sqrt(D) exp(-w^2/D^2) exp(i phi(w))``.

    ``bandwidth`` is D; the amplitude FWHM is ``2 sqrt(ln 2) D`` and the
    spectral-intensity FWHM ``sqrt(2 ln 2) D``.
    """

    bandwidth: float = 50.0
    amplitude: float = 1.0
    carrier: float = 0.0
    phase: PhaseProfile = field(default_factory=ZeroPhase)

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    def envelope(self, offsets) -> np.ndarray:
        offsets = np.asarray(offsets, dtype=float)
        return (self.amplitude / np.sqrt(self.bandwidth)
                * np.exp(-(offsets / self.bandwidth) ** 2))

    def sample(self, offsets) -> np.ndarray:
        """Complex field at arbitrary offsets, without coverage checks."""
        offsets = np.asarray(offsets, dtype=float)
        return self.envelope(offsets) * np.exp(1j * self.phase(offsets))

    def with_phase(self, phase: PhaseProfile) -> "SpectralField":
        from dataclasses import replace
        return replace(self, phase=phase)

    @property
    def intensity_fwhm(self) -> float:
        return np.sqrt(2 * np.log(2)) * self.bandwidth

    @property
    def amplitude_fwhm(self) -> float:
        return 2 * np.sqrt(np.log(2)) * self.bandwidth


def evaluate_field(field: SpectralField, grid: FrequencyGrid) -> np.ndarray:
    """Sample ``field`` on ``grid``.

    Raises
    ------
    GridTruncationError
        If the grid does not reach 4 bandwidths on each side.
    """
    grid.check_covers(field.bandwidth)
    return field.sample(grid.offsets)


# --------------------------------------------------------------------------
# time domain


@dataclass(frozen=True)
class TimeEnvelope:
    """Complex temporal envelope.

    Uses ``E(t) = sum_w E(w) exp(-2j pi c w t) dw``, so a positive linear
    spectral phase slope ``tau`` delays the pulse by ``tau / (2 pi c)``.
    With this normalization ``sum |E(t)|^2 dt = sum |E(w)|^2 dw / c``.
    """

    times: np.ndarray
    envelope: np.ndarray

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.envelope) ** 2

    @property
    def peak_time(self) -> float:
        return float(self.times[np.argmax(self.intensity)])


def to_time_domain(field: SpectralField, grid: FrequencyGrid) -> TimeEnvelope:
    """FFT of the sampled spectrum onto the reciprocal time axis (fs)."""
    spectrum = evaluate_field(field, grid)
    n, dw = grid.n_points, grid.spacing
    omega0 = grid.offsets[0]
    times = np.fft.fftfreq(n, d=dw * SPEED_OF_LIGHT)
    env = dw * np.fft.fft(spectrum) * np.exp(-2j * np.pi * SPEED_OF_LIGHT * omega0 * times)
    return TimeEnvelope(np.fft.fftshift(times), np.fft.fftshift(env))


def direct_time_envelope(field: SpectralField, grid: FrequencyGrid,
                         times: Sequence[float]) -> np.ndarray:
    """Brute-force Fourier sum at chosen times; slow reference for the FFT."""
    w = grid.offsets
    spectrum = field.sample(w)
    t = np.asarray(times, dtype=float)
    kernel = np.exp(-2j * np.pi * SPEED_OF_LIGHT * np.outer(t, w))
    return grid.spacing * kernel @ spectrum
