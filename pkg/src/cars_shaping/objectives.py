"""Signal/background objectives and variational diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polarization import (CarsConfiguration, MediumParams, PolarizationKernel,
                           full_spectrum, integrated_intensities,
                           peak_polarizations)
from .spectral_model import FrequencyGrid, PhaseProfile

OBJECTIVE_KINDS = ("resonant_peak", "local", "broadband")


@dataclass(frozen=True)
class LocalObjective:
    """``|P_r|^2 - k |P_nr|^2`` at the central anti-Stokes frequency."""

    weight: float = 0.0
    medium: MediumParams = MediumParams()

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("weight k must be non-negative")

    @property
    def lam(self) -> float:
        return self.medium.weight_to_lambda(self.weight)

    def __call__(self, config: CarsConfiguration) -> float:
        return local_objective(config, self.weight)


def local_objective(config: CarsConfiguration, k: float) -> float:
    if k < 0:
        raise ValueError("weight k must be non-negative")
    pr, pnr = peak_polarizations(config)
    return abs(pr) ** 2 - k * abs(pnr) ** 2


def pareto_point(config: CarsConfiguration, k: float) -> tuple[float, float, float]:
    """``(|P_r|^2, |P_nr|^2, J)`` at the central anti-Stokes frequency."""
    pr, pnr = peak_polarizations(config)
    pr2, pnr2 = abs(pr) ** 2, abs(pnr) ** 2
    return pr2, pnr2, pr2 - k * pnr2


def broadband_objective(config: CarsConfiguration,
                        output_half_width: float | None = None) -> float:
    """Integrated resonant minus integrated nonresonant intensity."""
    i_r, i_nr, _ = integrated_intensities(full_spectrum(config, output_half_width))
    return i_r - i_nr


class BatchObjective:
    """One objective evaluated for a batch of phase masks.

    Phase arrays are sampled on the kernel lattices: ``pump`` and ``probe``
    on ``kernel.field_offsets``, ``stokes`` on ``kernel.stokes_offsets``.
    Leading axes index candidates. Pulses left as ``None`` keep the mask of
    ``config``. In two-pulse mode the probe *is* the pump; pass its mask as
    either argument.
    """

    def __init__(self, config: CarsConfiguration, kind: str = "resonant_peak",
                 k: float = 0.0, output_half_width: float | None = None):
        if kind not in OBJECTIVE_KINDS:
            raise ValueError(f"unknown objective {kind!r}; expected one of {OBJECTIVE_KINDS}")
        self.config, self.kind, self.k = config, kind, k
        self.kernel = kern = PolarizationKernel(config)
        self._pump = kern.pump_samples()
        self._stokes = kern.stokes_samples()
        self._probe = kern.probe_samples()
        self._q = kern.excitation(self._pump, self._stokes)
        self._window = kern.output_window(output_half_width) if kind == "broadband" else None

    def polarizations(self, pump=None, stokes=None, probe=None):
        kern = self.kernel
        if self.config.is_two_pulse and probe is not None:
            pump, probe = probe, None
        pump_s = self._pump if pump is None else kern.pump_samples(pump)
        stokes_s = self._stokes if stokes is None else kern.stokes_samples(stokes)
        if pump is None and stokes is None:
            q = self._q
        else:
            q = kern.excitation(pump_s, stokes_s)
        if self.config.is_two_pulse:
            probe_s = pump_s
        else:
            probe_s = self._probe if probe is None else kern.probe_samples(probe)
        if self.kind == "broadband":
            pr, pnr = kern.spectrum(q, probe_s)
            return pr[..., self._window], pnr[..., self._window]
        return kern.peak(q, probe_s)

    def __call__(self, pump=None, stokes=None, probe=None) -> np.ndarray:
        pr, pnr = self.polarizations(pump, stokes, probe)
        if self.kind == "broadband":
            x = self.kernel.anti_stokes_offsets[self._window]
            return (np.trapezoid(np.abs(pr) ** 2, x, axis=-1)
                    - np.trapezoid(np.abs(pnr) ** 2, x, axis=-1))
        value = np.abs(pr) ** 2
        if self.kind == "local":
            value = value - self.k * np.abs(pnr) ** 2
        return value


def probe_phase_gradient(config: CarsConfiguration, k: float) -> np.ndarray:
    """Derivative of the discretized ``J = |P_r|^2 - k |P_nr|^2`` with respect
    to the probe phase at each grid sample.

    From ``dJ = 2 Re(P_r* dP_r) - 2k Re(P_nr* dP_nr)`` with
    ``dP = i w_j E_j dphi_j``. Three-pulse configurations only: in two-pulse
    mode the mask also enters the Raman excitation.
    """
    if config.is_two_pulse:
        raise ValueError("probe gradient is defined for three-pulse configurations")
    kern = PolarizationKernel(config)
    q = kern.excitation(kern.pump_samples(), kern.stokes_samples())[kern._peak_index]
    probe = kern.probe_samples()
    w_r = kern.h * kern.lineshape[kern._peak_index] * q
    w_nr = kern.h * config.medium.nonresonant_chi * q
    pr, pnr = np.sum(w_r * probe), np.sum(w_nr * probe)
    return (2 * np.real(np.conj(pr) * 1j * w_r * probe)
            - 2 * k * np.real(np.conj(pnr) * 1j * w_nr * probe))


# --------------------------------------------------------------------------
# stationarity


@dataclass(frozen=True)
class StationarityWorkspace:
    """Pointwise factors and Gaussian-weighted integrals of the variational
    condition for a probe phase (equal-bandwidth, unshaped pump/Stokes)."""

    offsets: np.ndarray
    alpha: np.ndarray
    a1: np.ndarray
    b1: np.ndarray
    a2: np.ndarray
    b2: np.ndarray
    A1: float
    B1: float
    A2: float
    B2: float
    S1: float
    S2: float

    @classmethod
    def build(cls, phase: PhaseProfile, bandwidth: float, linewidth: float,
              grid: FrequencyGrid | None = None) -> "StationarityWorkspace":
        if grid is None:
            grid = FrequencyGrid.for_bandwidths(bandwidth)
        w = grid.offsets
        h = grid.spacing
        weight = np.exp(-1.5 * (w / bandwidth) ** 2)
        phi = phase(w)
        alpha = np.pi / 2 - np.arctan(w / linewidth)
        r = np.hypot(w, linewidth)
        a1, b1 = np.sin(phi), np.cos(phi)
        a2, b2 = np.sin(phi + alpha) / r, np.cos(phi + alpha) / r
        integ = [h * float(np.sum(weight * v)) for v in (a1, b1, a2, b2, 1.0, 1.0 / r)]
        return cls(w, alpha, a1, b1, a2, b2, *integ)

    def residual(self, lam: float) -> np.ndarray:
        """Normalized ``lam (a1 B1 - A1 b1) - (a2 B2 - A2 b2)``.

        The scale ``sqrt(S2^2 + lam^2 S1^2)`` uses the phase-independent
        bounds ``|A1|, |B1| <= S1`` and ``|A2|, |B2| <= S2``, so it stays
        finite where ``P_r`` itself vanishes.
        """
        raw = (lam * (self.a1 * self.B1 - self.A1 * self.b1)
               - (self.a2 * self.B2 - self.A2 * self.b2))
        return raw / np.sqrt(self.S2**2 + lam**2 * self.S1**2)


def stationarity_residual(phase: PhaseProfile, bandwidth: float, linewidth: float,
                          lam: float = 0.0, grid: FrequencyGrid | None = None) -> float:
    """Max-norm of the normalized stationarity residual over the grid.

    Vanishes for every extremal phase of ``|P_r0|^2 - lam |P_nr0|^2``.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    ws = StationarityWorkspace.build(phase, bandwidth, linewidth, grid)
    return float(np.max(np.abs(ws.residual(lam))))


def variational_gradient(phase: PhaseProfile, bandwidth: float, linewidth: float,
                         lam: float = 0.0, grid: FrequencyGrid | None = None,
                         resonant_constant: float = 1.0) -> np.ndarray:
    """Functional derivative of ``|P_r|^2 - lam (C/chi)^2 |P_nr|^2`` with
    respect to the probe phase, times the grid spacing.

    Equal-bandwidth, unshaped pump and Stokes. On the same grid this equals
    ``probe_phase_gradient`` with ``k = lam (C/chi)^2``.
    """
    ws = StationarityWorkspace.build(phase, bandwidth, linewidth, grid)
    raw = (lam * (ws.a1 * ws.B1 - ws.A1 * ws.b1)
           - (ws.a2 * ws.B2 - ws.A2 * ws.b2))
    h = ws.offsets[1] - ws.offsets[0]
    weight = np.exp(-1.5 * (ws.offsets / bandwidth) ** 2)
    return h * np.pi / bandwidth * resonant_constant**2 * weight * raw
