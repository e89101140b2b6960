"""CMA-ES optimization of spectral phase masks.

The evolution strategy is the standard (mu/mu_w, lambda)-CMA-ES with
cumulative step-size adaptation and rank-one plus rank-mu covariance
updates (Hansen, "The CMA Evolution Strategy: A Tutorial"), with optional
IPOP restarts. Objectives are maximized by minimizing their negation.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .objectives import BatchObjective, pareto_point
from .polarization import CarsConfiguration
from .spectral_model import LinearPhase, PhaseProfile, SumPhase, TabulatedPhase


@dataclass(frozen=True)
class PhaseParameterization:
    """Phase mask given by values at ``n_nodes`` offsets in ``[-span, span]``,
    interpolated piecewise-linearly.

    With ``core_width`` set, nodes follow ``core_width * sinh(b u)`` for
    uniform ``u``, packing them densely within a few ``core_width`` of the
    centre; otherwise they are equally spaced. The centre node (odd
    ``n_nodes``) is pinned to zero to remove the constant-phase direction.

    With ``slope_scale`` set, one extra trailing coordinate ``s`` adds the
    linear phase ``s * slope_scale * w``. Node values can express a slope
    too, but only through many coordinated moves; the explicit direction
    lets the search reach large delays.
    """

    n_nodes: int = 33
    span: float = 200.0
    core_width: float | None = None
    pin_center: bool = True
    slope_scale: float | None = None

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError("need at least two nodes")
        if self.pin_center and self.n_nodes % 2 == 0:
            raise ValueError("pinning the centre node needs an odd node count")

    @classmethod
    def for_field(cls, bandwidth: float, linewidth: float | None = None,
                  n_nodes: int = 33, **kw) -> "PhaseParameterization":
        return cls(n_nodes=n_nodes, span=4.0 * bandwidth, core_width=linewidth, **kw)

    @property
    def node_offsets(self) -> np.ndarray:
        u = np.linspace(-1.0, 1.0, self.n_nodes)
        if self.core_width is None:
            nodes = self.span * u
        else:
            b = math.asinh(self.span / self.core_width)
            nodes = self.core_width * np.sinh(b * u)
        if self.n_nodes % 2:
            nodes[self.n_nodes // 2] = 0.0
        return nodes

    @property
    def dim(self) -> int:
        free = self.n_nodes - 1 if self.pin_center else self.n_nodes
        return free + (self.slope_scale is not None)

    def node_values(self, x) -> np.ndarray:
        """Phase at the nodes, slope term included."""
        x = np.asarray(x, dtype=float)
        if self.slope_scale is not None:
            x, s = x[..., :-1], x[..., -1:]
        if self.pin_center:
            c = self.n_nodes // 2
            zeros = np.zeros(x.shape[:-1] + (1,))
            x = np.concatenate([x[..., :c], zeros, x[..., c:]], axis=-1)
        if self.slope_scale is not None:
            x = x + s * self.slope_scale * self.node_offsets
        return x

    def decode(self, x) -> PhaseProfile:
        """Phase profile represented by ``x``.

        Beyond the outermost nodes the tabulated part is held constant
        while the slope term keeps growing, exactly as in ``sampler``.
        """
        x = np.asarray(x, dtype=float)
        if self.slope_scale is None:
            return TabulatedPhase(tuple(self.node_offsets), tuple(self.node_values(x)))
        base = replace(self, slope_scale=None)
        slope = float(x[-1]) * self.slope_scale
        return SumPhase((base.decode(x[:-1]), LinearPhase(slope)))

    def encode(self, phase: PhaseProfile) -> np.ndarray:
        """Vector reproducing ``phase`` at the nodes (shifted so the centre is
        0; slope coordinate 0)."""
        values = phase(self.node_offsets)
        if self.pin_center:
            c = self.n_nodes // 2
            values = np.delete(values - values[c], c)
        if self.slope_scale is not None:
            values = np.append(values, 0.0)
        return values

    def interpolation_matrix(self, offsets) -> np.ndarray:
        """``M`` with ``phase(offsets) = M @ node_values``."""
        nodes = self.node_offsets
        eye = np.eye(self.n_nodes)
        return np.stack([np.interp(offsets, nodes, eye[i]) for i in range(self.n_nodes)], axis=1)

    def sampler(self, offsets) -> Callable[[np.ndarray], np.ndarray]:
        """Fast ``x -> phase(offsets)`` for (batches of) parameter vectors."""
        m = self.interpolation_matrix(offsets)
        if self.pin_center:
            m = np.delete(m, self.n_nodes // 2, axis=1)
        if self.slope_scale is not None:
            # interpolation is exact for linear functions, so the slope
            # column is the slope applied directly to the offsets
            m = np.column_stack([m, self.slope_scale * np.asarray(offsets, dtype=float)])
        return lambda x: np.asarray(x) @ m.T


@dataclass(frozen=True)
class CmaEsConfig:
    population: int | None = None
    initial_sigma: float = 0.5
    max_evals: int = 50000
    seed: int = 0
    restarts: int = 0
    tol_fun: float = 1e-12
    tol_x: float = 1e-11

    def __post_init__(self):
        if self.population is not None and self.population < 4:
            raise ValueError("population must be at least 4")
        if not self.initial_sigma > 0:
            raise ValueError("initial_sigma must be positive")

    def fingerprint(self, **extra) -> str:
        payload = json.dumps({**asdict(self), **extra}, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class OptimizationResult:
    best_x: np.ndarray
    best_value: float
    eval_count: int
    history: list[tuple[int, float]]
    seed: int
    fingerprint: str
    converged: bool
    best_phases: dict[str, PhaseProfile] = field(default_factory=dict)
    metrics: dict[str, float] = field(default_factory=dict)

    @property
    def best_phase(self) -> PhaseProfile | None:
        if "probe" in self.best_phases:
            return self.best_phases["probe"]
        return next(iter(self.best_phases.values()), None)


# --------------------------------------------------------------------------
# CMA-ES


class _CmaState:
    def __init__(self, mean, sigma, popsize):
        n = mean.size
        self.n, self.lam = n, popsize
        self.mu = mu = popsize // 2
        w = math.log((popsize + 1) / 2) - np.log(np.arange(1, mu + 1))
        self.weights = w / w.sum()
        self.mueff = mueff = 1.0 / np.sum(self.weights**2)
        self.cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        self.cs = (mueff + 2) / (n + mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + mueff)
        self.cmu = min(1 - self.c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        self.damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + self.cs
        self.chin = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))
        self.mean = mean.astype(float).copy()
        self.sigma = sigma
        self.pc = np.zeros(n)
        self.ps = np.zeros(n)
        self.C = np.eye(n)
        self.B = np.eye(n)
        self.D = np.ones(n)
        self.generation = 0

    def ask(self, rng):
        z = rng.standard_normal((self.lam, self.n))
        y = (z * self.D) @ self.B.T
        return self.mean + self.sigma * y, y

    def tell(self, y, fvals):
        order = np.argsort(fvals, kind="stable")
        ysel = y[order[: self.mu]]
        yw = self.weights @ ysel
        self.mean = self.mean + self.sigma * yw
        n, cs, cc = self.n, self.cs, self.cc
        invsqrt = (self.B / self.D) @ self.B.T
        self.ps = (1 - cs) * self.ps + math.sqrt(cs * (2 - cs) * self.mueff) * (invsqrt @ yw)
        self.generation += 1
        norm_ps = np.linalg.norm(self.ps)
        hsig = (norm_ps / math.sqrt(1 - (1 - cs) ** (2 * self.generation))
                < (1.4 + 2 / (n + 1)) * self.chin)
        self.pc = (1 - cc) * self.pc + hsig * math.sqrt(cc * (2 - cc) * self.mueff) * yw
        rank_mu = (ysel.T * self.weights) @ ysel
        dh = (1 - hsig) * cc * (2 - cc)
        self.C = ((1 - self.c1 - self.cmu + self.c1 * dh) * self.C
                  + self.c1 * np.outer(self.pc, self.pc) + self.cmu * rank_mu)
        self.sigma *= math.exp((cs / self.damps) * (norm_ps / self.chin - 1))
        self.C = 0.5 * (self.C + self.C.T)
        evals, self.B = np.linalg.eigh(self.C)
        self.D = np.sqrt(np.maximum(evals, 1e-300))
        return order


def cma_es_minimize(objective: Callable, dim: int, config: CmaEsConfig = CmaEsConfig(),
                    x0=None, candidates: Sequence = (), vectorized: bool = False
                    ) -> OptimizationResult:
    """Minimize ``objective`` over R^dim.

    Parameters
    ----------
    objective : callable
        Maps a vector (or, if ``vectorized``, a 2-D array of row vectors) to
        a float (array of floats).
    x0 : array_like, optional
        Initial mean. Defaults to the best of ``candidates``, else zero.
    candidates : sequence of array_like
        Solutions evaluated before the search; the result is never worse
        than the best of them.

    Returns
    -------
    OptimizationResult
        ``converged`` is False when the evaluation budget ran out before a
        tolerance criterion triggered.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(config.seed)

    def evaluate(xs):
        if vectorized:
            return np.asarray(objective(xs), dtype=float).reshape(len(xs))
        return np.array([float(objective(x)) for x in xs])

    best_x, best_f, evals = None, math.inf, 0
    history: list[tuple[int, float]] = []

    def record(xs, fs):
        nonlocal best_x, best_f, evals
        evals += len(fs)
        i = int(np.argmin(fs))
        if fs[i] < best_f:
            best_f, best_x = float(fs[i]), np.array(xs[i], dtype=float)
        history.append((evals, best_f))

    if len(candidates):
        cands = np.asarray(candidates, dtype=float).reshape(-1, dim)
        record(cands, evaluate(cands))
    if x0 is None:
        x0 = best_x if best_x is not None else np.zeros(dim)
    x0 = np.asarray(x0, dtype=float).reshape(dim)

    base_pop = config.population or 4 + int(3 * math.log(dim))
    converged = False
    for restart in range(config.restarts + 1):
        if evals >= config.max_evals:
            break
        state = _CmaState(x0, config.initial_sigma, base_pop * 2**restart)
        window = 10 + math.ceil(30 * dim / state.lam)
        recent: list[float] = []
        while evals < config.max_evals:
            xs, ys = state.ask(rng)
            fs = evaluate(xs)
            record(xs, fs)
            state.tell(ys, fs)
            recent.append(float(np.min(fs)))
            recent = recent[-window:]
            spread = max(np.max(fs) - np.min(fs), max(recent) - min(recent))
            if len(recent) == window and spread < config.tol_fun:
                converged = True
                break
            if state.sigma * np.max(state.D) < config.tol_x:
                converged = True
                break
            if np.max(state.D) > 1e7 * np.min(state.D):
                break
            if not np.isfinite(state.sigma):
                break
    return OptimizationResult(best_x, best_f, evals, history, config.seed,
                              config.fingerprint(dim=dim), converged)


# --------------------------------------------------------------------------
# phase-mask drivers


def _fingerprint_config(config: CarsConfiguration, **extra) -> str:
    payload = json.dumps({"config": repr(config), **extra}, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def optimize_pulses(config: CarsConfiguration, shaped: Sequence[str],
                    objective: str = "resonant_peak", k: float = 0.0,
                    parameterizations: dict[str, PhaseParameterization] | None = None,
                    cma: CmaEsConfig = CmaEsConfig(), x0=None, candidates=(),
                    output_half_width: float | None = None) -> OptimizationResult:
    """Maximize an objective over the masks of the ``shaped`` pulses.

    Masks of pulses not in ``shaped`` stay as in ``config``. The decision
    vector concatenates the node vectors in the order of ``shaped``.
    """
    shaped = tuple(shaped)
    if config.is_two_pulse and "probe" in shaped:
        raise ValueError("in two-pulse mode shape the pump, which is also the probe")
    if not config.is_two_pulse and not set(shaped) <= {"pump", "stokes", "probe"}:
        raise ValueError(f"unknown pulse in {shaped}")
    fields = {"pump": config.pump, "stokes": config.stokes, "probe": config.probe_field}
    params = dict(parameterizations or {})
    for name in shaped:
        bw = fields[name].bandwidth
        # delay is physical for the broadband objective
        slope = 1.0 / bw if objective == "broadband" else None
        params.setdefault(name, PhaseParameterization.for_field(
            bw, config.medium.linewidth, slope_scale=slope))
    batch = BatchObjective(config, objective, k, output_half_width)
    kern = batch.kernel
    lattice = {"pump": kern.field_offsets, "stokes": kern.stokes_offsets,
               "probe": kern.field_offsets}
    samplers = [params[name].sampler(lattice[name]) for name in shaped]
    splits = np.cumsum([params[name].dim for name in shaped])[:-1]

    def negated(xs):
        parts = np.split(np.atleast_2d(xs), splits, axis=-1)
        masks = {name: s(p) for name, s, p in zip(shaped, samplers, parts)}
        return -batch(**masks)

    dim = int(sum(params[name].dim for name in shaped))
    res = cma_es_minimize(negated, dim, cma, x0=x0, candidates=candidates, vectorized=True)
    res.best_value = -res.best_value
    res.history = [(e, -v) for e, v in res.history]
    parts = np.split(res.best_x, splits)
    res.best_phases = {name: params[name].decode(p) for name, p in zip(shaped, parts)}
    res.fingerprint = _fingerprint_config(config, cma=res.fingerprint, objective=objective,
                                          k=k, shaped=shaped, params=repr(params))
    return res


def optimize_probe_phase(config: CarsConfiguration, objective: str = "resonant_peak",
                         k: float = 0.0, parameterization: PhaseParameterization | None = None,
                         cma: CmaEsConfig = CmaEsConfig(), **kw) -> OptimizationResult:
    """Shape the probe only (the pump, which doubles as probe, in two-pulse mode)."""
    name = "pump" if config.is_two_pulse else "probe"
    params = {name: parameterization} if parameterization is not None else None
    res = optimize_pulses(config, (name,), objective, k, params, cma, **kw)
    if config.is_two_pulse:
        res.best_phases["probe"] = res.best_phases["pump"]
    return res


def optimize_all_pulses(config: CarsConfiguration, objective: str = "resonant_peak",
                        k: float = 0.0,
                        parameterizations: dict[str, PhaseParameterization] | None = None,
                        cma: CmaEsConfig = CmaEsConfig(), **kw) -> OptimizationResult:
    """Jointly shape pump, Stokes and probe of a three-pulse configuration."""
    if config.is_two_pulse:
        raise ValueError("joint shaping needs a three-pulse configuration")
    return optimize_pulses(config, ("pump", "stokes", "probe"), objective, k,
                           parameterizations, cma, **kw)


@dataclass
class ParetoEntry:
    k: float
    result: OptimizationResult
    resonant: float
    nonresonant: float
    objective: float


def pareto_sweep(config: CarsConfiguration, k_values: Sequence[float],
                 parameterization: PhaseParameterization | None = None,
                 cma: CmaEsConfig = CmaEsConfig(),
                 warm_sigma: float | None = None) -> list[ParetoEntry]:
    """Optimize the probe for ``|P_r|^2 - k |P_nr|^2`` at each ``k``.

    Weights are visited in the given order. Each run after the first is
    seeded with the previous optimum, both as initial mean and as an
    evaluated candidate, with step size ``warm_sigma`` (default: a fifth
    of ``cma.initial_sigma``).
    """
    if any(k < 0 for k in k_values):
        raise ValueError("weights must be non-negative")
    if warm_sigma is None:
        warm_sigma = cma.initial_sigma / 5
    entries = []
    x0 = None
    for k in k_values:
        if x0 is None:
            res = optimize_probe_phase(config, "local", k, parameterization, cma)
        else:
            res = optimize_probe_phase(config, "local", k, parameterization,
                                       replace(cma, initial_sigma=warm_sigma),
                                       x0=x0, candidates=[x0])
        x0 = res.best_x
        pr2, pnr2, j = pareto_point(config.with_probe_phase(res.best_phase), k)
        entries.append(ParetoEntry(k, res, pr2, pnr2, j))
    return entries
