"""Shaping more than the probe: three independent pulses and the
degenerate two-pulse arrangement where the pump doubles as probe."""
# %%
import numpy as np

from cars_shaping import (ArctanPhase, CarsConfiguration, CmaEsConfig, SpectralField,
                          optimize_all_pulses, optimize_probe_phase, resonant_peak,
                          two_pulse_composite_scheme)

G = 4.8

# %% [markdown]
# Three pulses with different bandwidths. Shaping all of them jointly
# does not beat arctan on the probe alone: the pump and Stokes only pick
# up a common linear phase, i.e. a shared delay.

# %%
three = CarsConfiguration.three_pulse(SpectralField(125.0), SpectralField(100.0),
                                      SpectralField(80.0))
ref = abs(resonant_peak(three.with_probe_phase(ArctanPhase(G)))) ** 2
res = optimize_all_pulses(three, cma=CmaEsConfig(seed=0, max_evals=30_000))
print(f"joint optimum {res.best_value:.6f}, probe-only arctan {ref:.6f}")
for name, bw in (("pump", 125.0), ("stokes", 100.0)):
    w = np.linspace(-bw, bw, 201)
    slope, _ = np.polyfit(w, res.best_phases[name](w), 1)
    print(f"{name:>6} fitted slope {slope:+.2e} rad/cm^-1")

# %% [markdown]
# Two pulses: the shaped pump also drives the Raman coherence, so the
# optimum is a compromise. Half an arctan plus a linear term describes it.

# %%
two = CarsConfiguration.two_pulse(SpectralField(50.0), SpectralField(50.0))
res = optimize_probe_phase(two, cma=CmaEsConfig(seed=0, max_evals=20_000))
w = np.linspace(-100.0, 100.0, 401)
resid = res.best_phase(w) - 0.5 * np.arctan(w / G)
slope, offset = np.polyfit(w, resid, 1)
rms = np.sqrt(np.mean((resid - slope * w - offset) ** 2))
print(f"optimum {res.best_value:.5f}, transform limited {abs(resonant_peak(two)) ** 2:.5f}, "
      f"composite guess {abs(resonant_peak(two.with_probe_phase(two_pulse_composite_scheme(G)))) ** 2:.5f}")
print(f"fit slope {slope:.3e} rad/cm^-1, RMS misfit {rms:.3f} rad")
