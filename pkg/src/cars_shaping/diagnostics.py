"""Self-checks comparing the solver against independent oracles.

Each check returns a :class:`Diagnostic` holding the measured quantity, its
threshold and whether it passed. ``run_diagnostics`` runs the whole suite
for one equal-bandwidth parameter set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic_schemes import (GammaConvergenceError, analytic_max_pr,
                               arctan_scheme, modified_arctan_scheme,
                               pi_step_scheme, solve_gamma)
from .objectives import (probe_phase_gradient, stationarity_residual,
                         variational_gradient)
from .polarization import (CarsConfiguration, MediumParams, direct_spectrum,
                           full_spectrum, peak_polarizations)
from .spectral_model import (ArctanPhase, FrequencyGrid, PhaseProfile,
                             SumPhase, TabulatedPhase, ZeroPhase)


@dataclass(frozen=True)
class Diagnostic:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""

    @classmethod
    def below(cls, name, value, threshold, detail=""):
        return cls(name, float(value), threshold, bool(value < threshold), detail)

    @classmethod
    def above(cls, name, value, threshold, detail=""):
        return cls(name, float(value), threshold, bool(value > threshold), detail)


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


def check_analytic_vs_quadrature(bandwidth=50.0, medium=MediumParams(), n_points=2048):
    cfg = CarsConfiguration.default(bandwidth, medium, arctan_scheme(medium.linewidth),
                                    grid=FrequencyGrid.for_bandwidths(bandwidth, n_points=n_points))
    quad = abs(peak_polarizations(cfg)[0]) ** 2
    exact = analytic_max_pr(bandwidth, medium.linewidth, medium.resonant_constant)
    return Diagnostic.below("analytic_vs_quadrature", _rel(quad, exact), 1e-3,
                            f"quadrature {quad:.6f}, analytic {exact:.6f}")


def check_stationarity(phase: PhaseProfile, label: str, bandwidth=50.0,
                       medium=MediumParams(), lam=0.0, threshold=1e-8):
    res = stationarity_residual(phase, bandwidth, medium.linewidth, lam)
    return Diagnostic.below(f"stationarity[{label}]", res, threshold)


def check_nonstationary(phase: PhaseProfile, label: str, bandwidth=50.0,
                        medium=MediumParams(), lam=0.0, floor=1e-3):
    res = stationarity_residual(phase, bandwidth, medium.linewidth, lam)
    return Diagnostic.above(f"nonstationary[{label}]", res, floor)


def check_gamma_identity(bandwidth=50.0, medium=MediumParams(), tol=1e-10):
    sol = solve_gamma(0.0, bandwidth, medium.linewidth, tol=tol)
    return Diagnostic("gamma[lambda=0]", abs(sol.gamma - medium.linewidth), tol,
                      abs(sol.gamma - medium.linewidth) < tol, f"gamma {sol.gamma:.12g}")


def check_gamma_sweep(bandwidth=50.0, medium=MediumParams(),
                      lambdas=(1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0),
                      tol=1e-10, max_iter=100):
    worst, iters = 0.0, 0
    try:
        for lam in lambdas:
            sol = solve_gamma(lam, bandwidth, medium.linewidth, tol=tol, max_iter=max_iter)
            worst = max(worst, sol.residual)
            iters = max(iters, sol.iterations)
    except GammaConvergenceError as exc:
        return Diagnostic("gamma_sweep", float("inf"), tol, False, str(exc))
    return Diagnostic.below("gamma_sweep", worst, tol, f"max iterations {iters}")


def check_modified_arctan_stationary(k=1.0, bandwidth=50.0, medium=MediumParams()):
    lam = medium.weight_to_lambda(k)
    phase = modified_arctan_scheme(lam, bandwidth, medium.linewidth)
    return check_stationarity(phase, f"modified_arctan k={k:g}", bandwidth, medium, lam)


def check_convolution_vs_direct(bandwidth=50.0, medium=MediumParams(),
                                phase: PhaseProfile | None = None, n_points=128):
    if phase is None:
        phase = arctan_scheme(medium.linewidth)
    grid = FrequencyGrid.for_bandwidths(bandwidth, n_points=n_points)
    cfg = CarsConfiguration.default(bandwidth, medium, phase, grid=grid)
    fast = full_spectrum(cfg)
    slow = direct_spectrum(cfg, fast.offsets)
    err = max(np.max(np.abs(fast.resonant - slow.resonant)) / np.max(np.abs(slow.resonant)),
              np.max(np.abs(fast.nonresonant - slow.nonresonant))
              / np.max(np.abs(slow.nonresonant)))
    return Diagnostic.below(f"convolution_vs_direct[{n_points}]", err, 1e-6)


def check_grid_refinement(bandwidth=50.0, medium=MediumParams(), n_points=2048):
    grid = FrequencyGrid.for_bandwidths(bandwidth, n_points=n_points)
    base = CarsConfiguration.default(bandwidth, medium, arctan_scheme(medium.linewidth))
    vals = []
    for g in (grid, grid.refined(2)):
        pr, pnr = peak_polarizations(CarsConfiguration(base.pump, base.stokes, base.probe,
                                                       medium, g))
        vals.append(np.array([abs(pr) ** 2, abs(pnr) ** 2]))
    err = float(np.max(np.abs(vals[1] - vals[0]) / np.abs(vals[0])))
    return Diagnostic.below(f"grid_refinement[{n_points}->{2 * n_points}]", err, 1e-6)


def random_mask(rng: np.random.Generator, span=200.0, n_nodes=17, scale=1.0) -> TabulatedPhase:
    nodes = np.linspace(-span, span, n_nodes)
    return TabulatedPhase(tuple(nodes), tuple(rng.normal(0.0, scale, n_nodes)))


def check_gradient(seed=0, bandwidth=50.0, medium=MediumParams(), k=1.0, n_masks=3,
                   n_points=512, step=1e-6):
    """Finite-difference directional derivatives of ``J`` against the
    variational gradient, for random masks and random smooth directions."""
    rng = np.random.default_rng(seed)
    grid = FrequencyGrid.for_bandwidths(bandwidth, n_points=n_points)
    lam = medium.weight_to_lambda(k)
    w = grid.offsets
    worst = 0.0
    for _ in range(n_masks):
        phase = random_mask(rng)
        direction = random_mask(rng)(w)
        grad = variational_gradient(phase, bandwidth, medium.linewidth, lam, grid,
                                    medium.resonant_constant)

        def j_of(eps):
            shifted = TabulatedPhase(tuple(w), tuple(phase(w) + eps * direction))
            cfg = CarsConfiguration.default(bandwidth, medium, shifted, grid=grid)
            pr, pnr = peak_polarizations(cfg)
            return abs(pr) ** 2 - k * abs(pnr) ** 2

        fd = (j_of(step) - j_of(-step)) / (2 * step)
        exact = float(grad @ direction)
        worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-12))
        cfg = CarsConfiguration.default(bandwidth, medium, phase, grid=grid)
        discrete = probe_phase_gradient(cfg, k)
        worst = max(worst, float(np.max(np.abs(discrete - grad)) / np.max(np.abs(grad))))
    return Diagnostic.below("gradient_vs_variational", worst, 1e-4)


def run_diagnostics(bandwidth=50.0, medium=MediumParams(), n_points=2048, seed=0,
                    probe_phase: PhaseProfile | None = None) -> list[Diagnostic]:
    """Full suite. ``probe_phase``, if given, is additionally required to be
    stationary for the peak resonant signal."""
    g = medium.linewidth
    out = [
        check_analytic_vs_quadrature(bandwidth, medium, n_points),
        check_stationarity(ArctanPhase(g), "arctan", bandwidth, medium),
        check_stationarity(SumPhase((ArctanPhase(g), pi_step_scheme((0.0,)))),
                           "arctan+pi_step", bandwidth, medium),
        check_nonstationary(ZeroPhase(), "transform_limited", bandwidth, medium),
        check_modified_arctan_stationary(1.0, bandwidth, medium),
        check_gamma_identity(bandwidth, medium),
        check_gamma_sweep(bandwidth, medium),
        check_convolution_vs_direct(bandwidth, medium),
        check_grid_refinement(bandwidth, medium, n_points),
        check_gradient(seed, bandwidth, medium),
    ]
    if probe_phase is not None:
        out.append(check_stationarity(probe_phase, "scenario_probe", bandwidth, medium))
    return out


def format_table(results: list[Diagnostic]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'value':>11}  {'threshold':>9}  result"]
    for r in results:
        verdict = "PASS" if r.passed else "FAIL"
        line = f"{r.name:<{width}}  {r.value:11.3e}  {r.threshold:9.1e}  {verdict}"
        if r.detail:
            line += f"  ({r.detail})"
        lines.append(line)
    return "\n".join(lines)
