"""Simulation and optimal phase control of coherent anti-Stokes Raman signals.

Frequencies are offsets from the carriers in cm^-1, phases are in radians
and delays in femtoseconds.
"""
from .analytic_schemes import (ExtremalFamily, GammaConvergenceError,
                               GammaSolveResult, analytic_max_pr, arctan_scheme,
                               gamma_map, matched_delay_fs,
                               modified_arctan_scheme, multi_pi_step_positions,
                               pi_step_scheme, solve_gamma, time_delay_scheme,
                               two_pulse_composite_scheme)
from .besselk import k0, k0_integral, k0e
from .objectives import (BatchObjective, LocalObjective, broadband_objective,
                         local_objective, pareto_point, probe_phase_gradient,
                         stationarity_residual, variational_gradient)
from .optimizer import (CmaEsConfig, OptimizationResult, ParetoEntry,
                        PhaseParameterization, cma_es_minimize,
                        optimize_all_pulses, optimize_probe_phase,
                        optimize_pulses, pareto_sweep)
from .polarization import (CarsConfiguration, ConfigurationError,
                           GridCoverageError, MediumParams, PolarizationSpectrum,
                           direct_spectrum, full_spectrum,
                           integrated_intensities, nonresonant_peak,
                           peak_polarizations, raman_excitation, resonant_peak)
from .spectral_model import (SPEED_OF_LIGHT, ArctanPhase, FrequencyGrid,
                             GridTruncationError, LinearPhase,
                             ModifiedArctanPhase, PhaseProfile, PiStepPhase,
                             SpectralField, SumPhase, TabulatedPhase, ZeroPhase,
                             to_time_domain)

__version__ = "0.1.0"
