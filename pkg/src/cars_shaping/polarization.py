"""Resonant and nonresonant third-order polarizations of shaped pulses.

The triple integral over pump, Stokes and probe frequencies collapses, via
the energy-conservation delta, into two steps:

1. the Raman excitation ``Q(W) = int E_p(w) E_s*(w - W) dw`` (pump-Stokes
   cross-correlation at detuning ``W = w_p - w_s``), and
2. a convolution with the probe,
   ``P_r(w_as)  = int C / (-W - i G) Q(W) E_pr(w_as - W) dW`` and
   ``P_nr(w_as) = chi_nr int Q(W) E_pr(w_as - W) dW``.

Sign convention: with ``Omega_p - Omega_s = Omega_R`` the resonance
denominator ``Omega_R - (w~_p - w~_s) - i G`` reduces to ``-W - i G``. At
the central anti-Stokes frequency ``w_pr = -W`` and it becomes
``w_pr - i G``.

Discretization. Every quantity lives on a lattice with the grid spacing h.
Pump and probe are sampled on the simulation grid, the Stokes field on the
integer lattice ``m h``. Then detunings fall on the (negated) probe
lattice and anti-Stokes offsets on ``m h``, which includes ``w_as = 0``
exactly. The sums below are trapezoidal rules whose end weights multiply
negligible Gaussian tails.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import fftconvolve

from .spectral_model import (FrequencyGrid, GridTruncationError, PhaseProfile,
                             SpectralField)

#: allowed fraction of (phase-independent) spectral weight outside the output window
COVERAGE_TOLERANCE = 1e-6


class ConfigurationError(ValueError):
    pass


class GridCoverageError(GridTruncationError):
    pass


@dataclass(frozen=True)
class MediumParams:
    """Single Lorentzian Raman line plus a flat nonresonant susceptibility.

    ``linewidth`` is the half-width G (the level width is 2G).
    """

    linewidth: float = 4.8
    resonant_constant: float = 1.0
    nonresonant_chi: float = 0.1
    raman_shift: float = 0.0

    def __post_init__(self):
        if not self.linewidth > 0:
            raise ValueError("linewidth must be positive")
        if self.resonant_constant < 0 or self.nonresonant_chi < 0:
            raise ValueError("C and chi_nr must be non-negative")

    def weight_to_lambda(self, k: float) -> float:
        """``lambda = k (chi_nr / C)^2``."""
        return k * (self.nonresonant_chi / self.resonant_constant) ** 2


@dataclass(frozen=True)
class CarsConfiguration:
    """Pump, Stokes and probe fields acting on one medium.

    In two-pulse mode ``probe`` is ``None`` and the pump also plays the
    probe, so shaping the pump shapes the probe identically.
    """

    pump: SpectralField
    stokes: SpectralField
    probe: SpectralField | None = None
    medium: MediumParams = field(default_factory=MediumParams)
    grid: FrequencyGrid | None = None

    def __post_init__(self):
        detuning = self.pump.carrier - self.stokes.carrier - self.medium.raman_shift
        scale = max(1.0, abs(self.medium.raman_shift))
        if abs(detuning) > 1e-9 * scale:
            raise ConfigurationError(
                "pump and Stokes carriers must differ by the Raman shift")

    @classmethod
    def three_pulse(cls, pump, stokes, probe, medium=None, grid=None):
        return cls(pump, stokes, probe, medium or MediumParams(), grid)

    @classmethod
    def two_pulse(cls, pump, stokes, medium=None, grid=None):
        return cls(pump, stokes, None, medium or MediumParams(), grid)

    @classmethod
    def default(cls, bandwidth=50.0, medium=None, probe_phase=None, **kw):
        """Equal-bandwidth, transform-limited three-pulse setup."""
        probe = SpectralField(bandwidth)
        if probe_phase is not None:
            probe = probe.with_phase(probe_phase)
        return cls(SpectralField(bandwidth), SpectralField(bandwidth), probe,
                   medium or MediumParams(), **kw)

    @property
    def is_two_pulse(self) -> bool:
        return self.probe is None

    @property
    def probe_field(self) -> SpectralField:
        return self.pump if self.probe is None else self.probe

    @property
    def simulation_grid(self) -> FrequencyGrid:
        if self.grid is not None:
            return self.grid
        bws = [self.pump.bandwidth, self.stokes.bandwidth, self.probe_field.bandwidth]
        return FrequencyGrid.for_bandwidths(*bws)

    def with_probe_phase(self, phase: PhaseProfile) -> "CarsConfiguration":
        """Reshape the probe (the pump, in two-pulse mode)."""
        if self.is_two_pulse:
            return replace(self, pump=self.pump.with_phase(phase))
        return replace(self, probe=self.probe.with_phase(phase))

    def with_phases(self, pump=None, stokes=None, probe=None) -> "CarsConfiguration":
        out = self
        if pump is not None:
            out = replace(out, pump=out.pump.with_phase(pump))
        if stokes is not None:
            out = replace(out, stokes=out.stokes.with_phase(stokes))
        if probe is not None:
            out = out.with_probe_phase(probe)
        return out

    def with_medium(self, **changes) -> "CarsConfiguration":
        return replace(self, medium=replace(self.medium, **changes))


@dataclass(frozen=True)
class PolarizationSpectrum:
    """Polarizations on the anti-Stokes offset lattice."""

    offsets: np.ndarray
    resonant: np.ndarray
    nonresonant: np.ndarray

    @property
    def spacing(self) -> float:
        return float(self.offsets[1] - self.offsets[0])

    @property
    def cars_intensity(self) -> np.ndarray:
        return np.abs(self.resonant + self.nonresonant) ** 2

    @property
    def resonant_integral(self) -> float:
        return float(np.trapezoid(np.abs(self.resonant) ** 2, self.offsets))

    @property
    def nonresonant_integral(self) -> float:
        return float(np.trapezoid(np.abs(self.nonresonant) ** 2, self.offsets))

    def at(self, offset: float = 0.0) -> tuple[complex, complex]:
        i = int(np.argmin(np.abs(self.offsets - offset)))
        return complex(self.resonant[i]), complex(self.nonresonant[i])


class PolarizationKernel:
    """Precomputed lattices for one grid, bandwidth set and medium.

    Field samples are passed in as arrays whose last axis runs over the
    lattice, so leading axes batch over many candidate masks at once.
    """

    def __init__(self, config: CarsConfiguration):
        self.config = config
        grid = config.simulation_grid
        for f in (config.pump, config.stokes, config.probe_field):
            grid.check_covers(f.bandwidth)
        self.grid = grid
        self.h = h = grid.spacing
        n = grid.n_points
        self.field_offsets = grid.offsets
        m = n // 2 + 1
        self.stokes_offsets = np.arange(-m, m + 1) * h
        # detuning of correlation lag j: pump index i, Stokes index i - j
        half_start = grid.half_indices[0] - 2 * m
        self.detuning_half_index = half_start + 2 * np.arange(n + 2 * m)
        self.detunings = self.detuning_half_index * (0.5 * h)
        med = config.medium
        self.lineshape = med.resonant_constant / (-self.detunings - 1j * med.linewidth)
        # detuning index paired with each probe sample at w_as = 0
        probe_half = grid.half_indices
        self._peak_index = (-probe_half - half_start) // 2
        as_start = half_start + grid.half_indices[0]
        self.anti_stokes_half_index = as_start + 2 * np.arange(n + self.detunings.size - 1)
        self.anti_stokes_offsets = self.anti_stokes_half_index * (0.5 * h)

    # -- sampling
    def pump_samples(self, phase_values=None) -> np.ndarray:
        return self._samples(self.config.pump, self.field_offsets, phase_values)

    def stokes_samples(self, phase_values=None) -> np.ndarray:
        return self._samples(self.config.stokes, self.stokes_offsets, phase_values)

    def probe_samples(self, phase_values=None) -> np.ndarray:
        return self._samples(self.config.probe_field, self.field_offsets, phase_values)

    @staticmethod
    def _samples(f: SpectralField, offsets, phase_values):
        if phase_values is None:
            return f.sample(offsets)
        return f.envelope(offsets) * np.exp(1j * np.asarray(phase_values))

    # -- the two stages
    def excitation(self, pump, stokes) -> np.ndarray:
        """Raman excitation on ``self.detunings``."""
        return self.h * _convolve(pump, np.conj(stokes)[..., ::-1])

    def peak(self, excitation, probe) -> tuple[np.ndarray, np.ndarray]:
        """``(P_r, P_nr)`` at the central anti-Stokes frequency."""
        q = excitation[..., self._peak_index]
        line = self.lineshape[self._peak_index]
        med = self.config.medium
        pr = self.h * np.sum(line * q * probe, axis=-1)
        pnr = self.h * med.nonresonant_chi * np.sum(q * probe, axis=-1)
        return pr, pnr

    def spectrum(self, excitation, probe) -> tuple[np.ndarray, np.ndarray]:
        """``(P_r, P_nr)`` on ``self.anti_stokes_offsets``."""
        med = self.config.medium
        pr = self.h * _convolve(self.lineshape * excitation, probe)
        pnr = self.h * med.nonresonant_chi * _convolve(excitation, probe)
        return pr, pnr

    def output_window(self, half_width: float | None = None) -> slice:
        """Slice of the anti-Stokes lattice within ``+-half_width``.

        Raises
        ------
        GridCoverageError
            If more than ``COVERAGE_TOLERANCE`` of the phase-independent
            upper bound on the spectral weight falls outside the window.
        """
        if half_width is None:
            half_width = self.grid.half_width
        inside = np.abs(self.anti_stokes_offsets) <= half_width * (1 + 1e-12)
        idx = np.nonzero(inside)[0]
        bound = self._magnitude_bound()
        total = bound.sum()
        outside = total - bound[idx].sum()
        if total > 0 and outside > COVERAGE_TOLERANCE * total:
            raise GridCoverageError(
                f"output window +-{half_width:g} cm^-1 misses "
                f"{outside / total:.2e} of the spectral weight")
        return slice(idx[0], idx[-1] + 1)

    def _magnitude_bound(self) -> np.ndarray:
        q = self.excitation(np.abs(self.pump_samples(0.0)),
                            np.abs(self.stokes_samples(0.0))).real
        line = np.abs(self.lineshape)
        weight = line + self.config.medium.nonresonant_chi
        return fftconvolve(np.abs(weight * q), np.abs(self.probe_samples(0.0)))**2


def _convolve(a, b):
    a, b = np.asarray(a), np.asarray(b)
    nd = max(a.ndim, b.ndim)
    a = a.reshape((1,) * (nd - a.ndim) + a.shape)
    b = b.reshape((1,) * (nd - b.ndim) + b.shape)
    return fftconvolve(a, b, axes=-1)


# --------------------------------------------------------------------------
# public operations


def raman_excitation(pump: SpectralField, stokes: SpectralField,
                     grid: FrequencyGrid) -> tuple[np.ndarray, np.ndarray]:
    """Pump-Stokes cross-correlation ``Q(W)``.

    Returns
    -------
    detunings, values : ndarray
        Detunings ``W = w_p - w_s`` (cm^-1) and the complex excitation.
    """
    cfg = CarsConfiguration(pump, stokes, SpectralField(pump.bandwidth),
                            MediumParams(raman_shift=pump.carrier - stokes.carrier),
                            grid)
    kern = PolarizationKernel(cfg)
    return kern.detunings, kern.excitation(kern.pump_samples(), kern.stokes_samples())


def direct_raman_excitation(pump: SpectralField, stokes: SpectralField,
                            grid: FrequencyGrid, detunings) -> np.ndarray:
    """Brute-force quadrature of ``Q`` at arbitrary detunings."""
    w = grid.offsets
    p = pump.sample(w)
    out = [grid.spacing * np.sum(p * np.conj(stokes.sample(w - d))) for d in np.atleast_1d(detunings)]
    return np.asarray(out)


def peak_polarizations(config: CarsConfiguration) -> tuple[complex, complex]:
    kern = PolarizationKernel(config)
    q = kern.excitation(kern.pump_samples(), kern.stokes_samples())
    pr, pnr = kern.peak(q, kern.probe_samples())
    return complex(pr), complex(pnr)


def resonant_peak(config: CarsConfiguration) -> complex:
    """Resonant polarization at the central anti-Stokes frequency."""
    return peak_polarizations(config)[0]


def nonresonant_peak(config: CarsConfiguration) -> complex:
    """Nonresonant polarization at the central anti-Stokes frequency."""
    return peak_polarizations(config)[1]


def full_spectrum(config: CarsConfiguration,
                  output_half_width: float | None = None) -> PolarizationSpectrum:
    """Polarization spectra on ``|w_as| <= output_half_width``.

    The output lattice shares the simulation spacing and contains
    ``w_as = 0``. The default window is the simulation half-width.
    """
    kern = PolarizationKernel(config)
    window = kern.output_window(output_half_width)
    q = kern.excitation(kern.pump_samples(), kern.stokes_samples())
    pr, pnr = kern.spectrum(q, kern.probe_samples())
    return PolarizationSpectrum(kern.anti_stokes_offsets[window], pr[window], pnr[window])


def integrated_intensities(spectrum: PolarizationSpectrum) -> tuple[float, float, float]:
    """``(I_r, I_nr, I_total)`` by the trapezoidal rule.

    ``I_total`` integrates ``|P_r + P_nr|^2``.
    """
    total = float(np.trapezoid(spectrum.cars_intensity, spectrum.offsets))
    return spectrum.resonant_integral, spectrum.nonresonant_integral, total


def direct_spectrum(config: CarsConfiguration, offsets=None) -> PolarizationSpectrum:
    """Nested double sum over pump and Stokes samples for each ``w_as``.

    The probe is evaluated in closed form at ``w_as - w_p + w_s``. This
    skips the excitation/convolution factorization entirely and costs
    O(N^2) per output point; use it on small grids only.
    """
    grid = config.simulation_grid
    h = grid.spacing
    m = grid.n_points // 2 + 1
    wp = grid.offsets
    ws = np.arange(-m, m + 1) * h
    if offsets is None:
        offsets = np.arange(-(grid.n_points // 2 - 1), grid.n_points // 2) * h
    med = config.medium
    ep = config.pump.sample(wp)[:, None]
    es = np.conj(config.stokes.sample(ws))[None, :]
    det = wp[:, None] - ws[None, :]
    line = med.resonant_constant / (-det - 1j * med.linewidth)
    probe = config.probe_field
    pr, pnr = [], []
    for w_as in np.asarray(offsets, dtype=float):
        # restrict the probe to the simulation grid, as the fast path does
        wpr = w_as - det
        epr = np.where(np.abs(wpr) <= grid.half_width * (1 + 1e-12), probe.sample(wpr), 0.0)
        integrand = ep * es * epr
        pr.append(h * h * np.sum(line * integrand))
        pnr.append(h * h * med.nonresonant_chi * np.sum(integrand))
    return PolarizationSpectrum(np.asarray(offsets, dtype=float), np.array(pr), np.array(pnr))
