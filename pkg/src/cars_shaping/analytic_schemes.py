"""Closed-form phase masks and reference values for probe shaping.

With transform-limited pump and Stokes pulses of equal bandwidth D, the
peak polarizations reduce to one-dimensional integrals over the probe
offset with the Gaussian weight ``exp(-3 w^2 / (2 D^2))``. The schemes
below are the stationary points and heuristics of those integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .besselk import k0e
from .spectral_model import (SPEED_OF_LIGHT, ArctanPhase, FrequencyGrid,
                             LinearPhase, ModifiedArctanPhase, PhaseProfile,
                             PiStepPhase, SumPhase, ZeroPhase)


class GammaConvergenceError(ArithmeticError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def arctan_scheme(linewidth: float) -> ArctanPhase:
    """Probe phase maximizing the peak resonant signal."""
    return ArctanPhase(linewidth)


def analytic_max_pr(bandwidth: float, linewidth: float, resonant_constant: float = 1.0) -> float:
    """Peak ``|P_r|^2`` reached by the arctan probe.

    ``C^2 pi / (2 D) exp(3 G^2 / (2 D^2)) K0(3 G^2 / (4 D^2))^2``, written
    with the scaled ``exp(x) K0(x)`` so that it stays finite for G >> D.
    """
    if not (bandwidth > 0 and linewidth > 0):
        raise ValueError("bandwidth and linewidth must be positive")
    x = 0.75 * (linewidth / bandwidth) ** 2
    return resonant_constant**2 * math.pi / (2 * bandwidth) * k0e(x) ** 2


def pi_step_scheme(positions=(0.0,)) -> PhaseProfile:
    positions = tuple(positions)
    if not positions:
        return ZeroPhase()
    return PiStepPhase(positions)


def multi_pi_step_positions(bandwidth: float, n_steps: int = 8,
                            spacing: float | None = None) -> tuple[float, ...]:
    """Equally spaced step positions centred on zero (default spacing D/2)."""
    if spacing is None:
        spacing = bandwidth / 2
    return tuple((i - (n_steps - 1) / 2) * spacing for i in range(n_steps))


def matched_delay_fs(spacing: float) -> float:
    """Delay whose linear phase has the mean slope of a pi ladder."""
    return (math.pi / spacing) / (2 * math.pi * SPEED_OF_LIGHT)


def time_delay_scheme(delay_fs: float) -> PhaseProfile:
    """Linear phase delaying the pulse by ``delay_fs``."""
    if delay_fs == 0:
        return ZeroPhase()
    return LinearPhase(2 * math.pi * SPEED_OF_LIGHT * delay_fs)


def two_pulse_composite_scheme(linewidth: float, slope: float = 0.0) -> PhaseProfile:
    """``slope * w + arctan(w / G) / 2`` for the shared pump/probe."""
    if not linewidth > 0:
        raise ValueError("linewidth must be positive")
    return SumPhase((LinearPhase(slope), ArctanPhase(linewidth)), weights=(1.0, 0.5))


@dataclass(frozen=True)
class ExtremalFamily:
    """``arctan(w/G) + L(w) pi``, with L flipping between 0 and 1 at
    ``switch_points``. Every member is a stationary point of the peak
    resonant intensity."""

    linewidth: float
    switch_points: tuple[float, ...] = ()

    def phase(self) -> PhaseProfile:
        if not self.switch_points:
            return ArctanPhase(self.linewidth)
        return SumPhase((ArctanPhase(self.linewidth), PiStepPhase(tuple(self.switch_points))))


# --------------------------------------------------------------------------
# weighted objective: gamma fixed point


@dataclass(frozen=True)
class GammaSolveResult:
    gamma: float
    lam: float
    iterations: int
    residual: float
    trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def lambda_gamma(self) -> float:
        return self.lam * self.gamma


def _quadrature_grid(bandwidth, grid):
    if grid is None:
        grid = FrequencyGrid.for_bandwidths(bandwidth)
    w = grid.offsets
    return w, np.exp(-1.5 * (w / bandwidth) ** 2)


def gamma_map(gamma: float, lam: float, bandwidth: float, linewidth: float,
              grid: FrequencyGrid | None = None) -> float:
    """Right-hand side ``B1 / A2`` of the fixed-point equation for ``gamma``.

    B1 and A2 are evaluated for the modified arctan phase built from
    ``gamma`` (continuous branch).
    """
    w, g = _quadrature_grid(bandwidth, grid)
    return _gamma_map(gamma * lam, w, g, linewidth)


def _gamma_map(mu, w, g, linewidth):
    r2 = w**2 + linewidth**2
    denom = linewidth - mu * r2
    norm = np.hypot(w, denom)
    # cos(phi) = denom / norm; sin(phi + alpha) = sqrt(r2) (1 - mu G) / norm
    b1 = np.sum(g * denom / norm)
    a2 = (1.0 - mu * linewidth) * np.sum(g / norm)
    return b1 / a2


def solve_gamma(lam: float, bandwidth: float = 50.0, linewidth: float = 4.8,
                tol: float = 1e-10, max_iter: int = 100, damping: float = 0.5,
                grid: FrequencyGrid | None = None) -> GammaSolveResult:
    """Solve ``gamma = B1(gamma) / A2(gamma)`` by damped fixed-point iteration.

    The first step is damped with ``damping``; later steps take Wegstein's
    adaptive damping ``1 / (1 - s)`` from the secant slope ``s`` of the map.
    Iterates are kept inside the bracket ``0 < gamma < 1 / (lam G)`` where
    the physical root lies (beyond it the phase collapses to a nearly flat
    mask); a step leaving the bracket is replaced by bisection.

    Raises
    ------
    GammaConvergenceError
        If ``|F(gamma) - gamma| >= tol`` after ``max_iter`` map evaluations.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    w, g = _quadrature_grid(bandwidth, grid)

    def fmap(gamma):
        return _gamma_map(lam * gamma, w, g, linewidth)

    if lam == 0:
        value = fmap(linewidth)
        return GammaSolveResult(value, 0.0, 1, abs(value - linewidth), (linewidth, value))

    lo, hi = 0.0, 1.0 / (lam * linewidth)
    gamma = min(linewidth, 0.5 * hi)
    trace = [gamma]
    prev = None
    for it in range(1, max_iter + 1):
        f = fmap(gamma)
        resid = f - gamma
        if abs(resid) < tol:
            return GammaSolveResult(gamma, lam, it, abs(resid), tuple(trace))
        if resid > 0:
            lo = gamma
        else:
            hi = gamma
        if prev is None:
            beta = damping
        else:
            g_prev, f_prev = prev
            slope = (f - f_prev) / (gamma - g_prev) if gamma != g_prev else 0.0
            beta = 1.0 / (1.0 - slope) if slope != 1.0 else damping
        prev = (gamma, f)
        new = gamma + beta * resid
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        gamma = new
        trace.append(gamma)
    raise GammaConvergenceError(
        f"gamma iteration did not converge in {max_iter} steps "
        f"(lambda={lam:g}, last residual {abs(resid):.3e})", tuple(trace))


def modified_arctan_scheme(lam: float, bandwidth: float = 50.0, linewidth: float = 4.8,
                           **solver_kw) -> ModifiedArctanPhase:
    """Probe phase maximizing ``|P_r|^2 - k |P_nr|^2`` with ``lam = k (chi/C)^2``."""
    sol = solve_gamma(lam, bandwidth, linewidth, **solver_kw)
    return ModifiedArctanPhase(linewidth, sol.lambda_gamma)
