"""Command-line front end.

Usage::

    cars-shaping spectrum --scenario s.json --out spectrum.csv
    cars-shaping optimize --scenario s.json --out results/
    cars-shaping pareto   --scenario s.json --out sweep/ --k-list 0,1,10
    cars-shaping gamma    --scenario s.json --k-list 0.1,1,10
    cars-shaping verify   --scenario s.json

A scenario is a JSON file; every physical key carries its unit in the
name. Exit codes: 0 success, 2 invalid scenario, 3 numerical failure,
4 optimizer not converged (results still written), 5 a diagnostic failed.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .analytic_schemes import (GammaConvergenceError, arctan_scheme,
                               modified_arctan_scheme,
                               multi_pi_step_positions, pi_step_scheme,
                               solve_gamma, time_delay_scheme,
                               two_pulse_composite_scheme)
from .diagnostics import format_table, run_diagnostics
from .objectives import OBJECTIVE_KINDS
from .optimizer import (CmaEsConfig, OptimizationResult, PhaseParameterization,
                        optimize_pulses, pareto_sweep)
from .polarization import (CarsConfiguration, ConfigurationError, MediumParams,
                           full_spectrum, integrated_intensities,
                           peak_polarizations)
from .spectral_model import (FrequencyGrid, GridTruncationError, LinearPhase,
                             PhaseProfile, SpectralField, SumPhase,
                             TabulatedPhase, ZeroPhase)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_NOT_CONVERGED, EXIT_DIAGNOSTICS = 0, 2, 3, 4, 5

SPECTRUM_COLUMNS = ("omega_as_cm1", "re_Pr", "im_Pr", "re_Pnr", "im_Pnr",
                    "abs_Pr", "abs_Pnr", "I_cars")

# --------------------------------------------------------------------------
# scenario schema

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NUMS = {"type": "array", "items": _NUM}


def _scheme(name, props=None, required=()):
    props = {"scheme": {"const": name}, "offset_rad": _NUM, **(props or {})}
    return {"type": "object", "properties": props, "required": ["scheme", *required],
            "additionalProperties": False}


PHASE_SCHEME_NAMES = ("zero", "linear", "time_delay", "arctan", "modified_arctan", "pi_step",
                      "multi_pi_step", "two_pulse_composite", "tabulated", "sum")

PHASE_SCHEMA = {"type": "object", "required": ["scheme"],
                "properties": {"scheme": {"enum": list(PHASE_SCHEME_NAMES)}},
                "oneOf": [
    _scheme("zero"),
    _scheme("linear", {"slope_rad_per_cm1": _NUM}, ["slope_rad_per_cm1"]),
    _scheme("time_delay", {"delay_fs": _NUM}, ["delay_fs"]),
    _scheme("arctan", {"linewidth_cm1": _POS}),
    _scheme("modified_arctan", {"weight_k": {"type": "number", "minimum": 0}}, ["weight_k"]),
    _scheme("pi_step", {"positions_cm1": _NUMS}, ["positions_cm1"]),
    _scheme("multi_pi_step", {"n_steps": {"type": "integer", "minimum": 1},
                              "spacing_cm1": _POS}),
    _scheme("two_pulse_composite", {"slope_rad_per_cm1": _NUM, "linewidth_cm1": _POS}),
    _scheme("tabulated", {"nodes_cm1": {**_NUMS, "minItems": 1},
                          "values_rad": {**_NUMS, "minItems": 1}},
            ["nodes_cm1", "values_rad"]),
    _scheme("sum", {"terms": {"type": "array", "items": {"$ref": "#/$defs/phase"}}},
            ["terms"]),
]}

_PULSE = {
    "type": "object",
    "properties": {"bandwidth_cm1": _POS, "amplitude": _NUM, "carrier_cm1": _NUM,
                   "phase": {"$ref": "#/$defs/phase"}},
    "additionalProperties": False,
}


def _section(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {"phase": PHASE_SCHEMA},
    **_section({
        "mode": {"enum": ["three_pulse", "two_pulse"]},
        "medium": _section({"linewidth_cm1": _POS, "resonant_constant": _NUM,
                            "nonresonant_chi": {"type": "number", "minimum": 0},
                            "raman_shift_cm1": _NUM}),
        "pulses": _section({"pump": _PULSE, "stokes": _PULSE, "probe": _PULSE}),
        "grid": _section({"n_points": {"type": "integer", "minimum": 16},
                          "half_width_cm1": _POS, "output_half_width_cm1": _POS}),
        "objective": _section({
            "kind": {"enum": list(OBJECTIVE_KINDS)},
            "weight_k": {"type": "number", "minimum": 0},
            "shaped_pulses": {"type": "array", "uniqueItems": True, "minItems": 1,
                              "items": {"enum": ["pump", "stokes", "probe"]}},
        }),
        "optimizer": _section({
            "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
            "n_nodes": {"type": "integer", "minimum": 3},
            "span_cm1": _POS,
            "core_width_cm1": {"type": ["number", "null"], "exclusiveMinimum": 0},
            "max_evals": {"type": "integer", "minimum": 1},
            "population": {"type": ["integer", "null"], "minimum": 4},
            "initial_sigma_rad": _POS,
            "restarts": {"type": "integer", "minimum": 0},
            "tol_fun": _POS,
            "tol_x": _POS,
        }),
        "pareto": _section({"k_values": {"type": "array", "minItems": 1,
                                         "items": {"type": "number", "minimum": 0}}}),
        "verify": _section({"stationary_probe_phase": {"$ref": "#/$defs/phase"}}),
    }),
}

DEFAULTS = {
    "mode": "three_pulse",
    "medium": {"linewidth_cm1": 4.8, "resonant_constant": 1.0, "nonresonant_chi": 0.1,
               "raman_shift_cm1": 0.0},
    "pulse": {"bandwidth_cm1": 50.0, "amplitude": 1.0, "carrier_cm1": 0.0,
              "phase": {"scheme": "zero"}},
    "grid": {"n_points": 2048},
    "objective": {"kind": "resonant_peak", "weight_k": 0.0},
    "optimizer": {"seed": 0, "n_nodes": 33, "max_evals": 50000, "population": None,
                  "initial_sigma_rad": 0.5, "restarts": 0, "tol_fun": 1e-10,
                  "tol_x": 1e-11},
    "pareto": {"k_values": [0.0, 0.1, 1.0, 10.0, 100.0, 1000.0]},
}


class ScenarioError(ValueError):
    """Scenario failed validation; the message names the offending key."""


def _where(error: jsonschema.ValidationError) -> str:
    path = "/".join(str(p) for p in error.absolute_path)
    return path or "<root>"


def validate_scenario(raw: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: -len(e.absolute_path))
    if errors:
        err = errors[0]
        # for a phase oneOf, report the branch whose scheme name matched
        while err.context:
            wrong = {e.relative_schema_path[0] for e in err.context
                     if e.validator == "const" and list(e.relative_path) == ["scheme"]}
            inner = [e for e in err.context if e.relative_schema_path[0] not in wrong]
            if not inner:
                break
            err = max(inner, key=lambda e: len(e.absolute_path))
        raise ScenarioError(f"invalid scenario at '{_where(err)}': {err.message}")


def normalize_scenario(raw: dict) -> dict:
    """Validated copy of ``raw`` with every default filled in.

    Normalizing twice gives the same result, so a normalized scenario
    echoed to disk re-parses to an identical configuration.
    """
    validate_scenario(raw)
    s = copy.deepcopy(raw)
    out = {"mode": s.get("mode", DEFAULTS["mode"])}
    out["medium"] = {**DEFAULTS["medium"], **s.get("medium", {})}
    pulses = s.get("pulses", {})
    names = ("pump", "stokes") if out["mode"] == "two_pulse" else ("pump", "stokes", "probe")
    if out["mode"] == "two_pulse" and "probe" in pulses:
        raise ScenarioError("invalid scenario at 'pulses/probe': two-pulse mode has no "
                            "separate probe; shape the pump instead")
    out["pulses"] = {n: {**DEFAULTS["pulse"], **pulses.get(n, {})} for n in names}
    out["grid"] = {**DEFAULTS["grid"], **s.get("grid", {})}
    out["objective"] = {**DEFAULTS["objective"], **s.get("objective", {})}
    out["objective"].setdefault(
        "shaped_pulses", ["pump"] if out["mode"] == "two_pulse" else ["probe"])
    if out["mode"] == "two_pulse" and "probe" in out["objective"]["shaped_pulses"]:
        raise ScenarioError("invalid scenario at 'objective/shaped_pulses': two-pulse "
                            "mode shapes the pump, which doubles as probe")
    out["optimizer"] = {**DEFAULTS["optimizer"], **s.get("optimizer", {})}
    out["pareto"] = {**DEFAULTS["pareto"], **s.get("pareto", {})}
    if "verify" in s:
        out["verify"] = s["verify"]
    return out


def load_scenario(path) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScenarioError("invalid scenario at '<root>': expected an object")
    return normalize_scenario(raw)


# --------------------------------------------------------------------------
# scenario -> model objects


def build_phase(entry: dict, bandwidth: float, medium: MediumParams) -> PhaseProfile:
    kind = entry["scheme"]
    g = entry.get("linewidth_cm1", medium.linewidth)
    if kind == "zero":
        phase = ZeroPhase()
    elif kind == "linear":
        phase = LinearPhase(entry["slope_rad_per_cm1"])
    elif kind == "time_delay":
        phase = time_delay_scheme(entry["delay_fs"])
    elif kind == "arctan":
        phase = arctan_scheme(g)
    elif kind == "modified_arctan":
        phase = modified_arctan_scheme(medium.weight_to_lambda(entry["weight_k"]),
                                       bandwidth, medium.linewidth)
    elif kind == "pi_step":
        phase = pi_step_scheme(entry["positions_cm1"])
    elif kind == "multi_pi_step":
        phase = pi_step_scheme(multi_pi_step_positions(
            bandwidth, entry.get("n_steps", 8), entry.get("spacing_cm1")))
    elif kind == "two_pulse_composite":
        phase = two_pulse_composite_scheme(g, entry.get("slope_rad_per_cm1", 0.0))
    elif kind == "tabulated":
        if len(entry["nodes_cm1"]) != len(entry["values_rad"]):
            raise ScenarioError("invalid scenario at 'phase/values_rad': length differs "
                                "from nodes_cm1")
        phase = TabulatedPhase(tuple(entry["nodes_cm1"]), tuple(entry["values_rad"]))
    elif kind == "sum":
        phase = SumPhase(tuple(build_phase(t, bandwidth, medium) for t in entry["terms"]))
    else:  # pragma: no cover - schema rejects it
        raise ScenarioError(f"unknown phase scheme {kind!r}")
    offset = entry.get("offset_rad", 0.0)
    return phase.with_offset(offset) if offset else phase


def build_medium(scenario: dict) -> MediumParams:
    m = scenario["medium"]
    return MediumParams(m["linewidth_cm1"], m["resonant_constant"], m["nonresonant_chi"],
                        m["raman_shift_cm1"])


def build_configuration(scenario: dict) -> CarsConfiguration:
    medium = build_medium(scenario)
    fields = {}
    for name, p in scenario["pulses"].items():
        phase = build_phase(p["phase"], p["bandwidth_cm1"], medium)
        fields[name] = SpectralField(p["bandwidth_cm1"], p["amplitude"], p["carrier_cm1"], phase)
    g = scenario["grid"]
    bws = [f.bandwidth for f in fields.values()]
    if "half_width_cm1" in g:
        grid = FrequencyGrid(g["half_width_cm1"], g["n_points"])
        for bw in bws:
            grid.check_covers(bw)
    else:
        grid = FrequencyGrid.for_bandwidths(*bws, n_points=g["n_points"])
    try:
        return CarsConfiguration(fields["pump"], fields["stokes"], fields.get("probe"),
                                 medium, grid)
    except ConfigurationError as exc:
        raise ScenarioError(f"invalid scenario at 'pulses': {exc}") from exc


def build_cma(scenario: dict) -> CmaEsConfig:
    o = scenario["optimizer"]
    return CmaEsConfig(population=o["population"], initial_sigma=o["initial_sigma_rad"],
                       max_evals=o["max_evals"], seed=o["seed"], restarts=o["restarts"],
                       tol_fun=o["tol_fun"], tol_x=o["tol_x"])


def build_parameterizations(scenario: dict) -> dict[str, PhaseParameterization]:
    o = scenario["optimizer"]
    medium = scenario["medium"]
    broadband = scenario["objective"]["kind"] == "broadband"
    out = {}
    for name in scenario["objective"]["shaped_pulses"]:
        bw = scenario["pulses"][name]["bandwidth_cm1"]
        out[name] = PhaseParameterization(
            n_nodes=o["n_nodes"], span=o.get("span_cm1", 4.0 * bw),
            core_width=o.get("core_width_cm1", medium["linewidth_cm1"]),
            slope_scale=1.0 / bw if broadband else None)
    return out


# --------------------------------------------------------------------------
# output


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def spectrum_csv(spectrum) -> str:
    pr, pnr = spectrum.resonant, spectrum.nonresonant
    rows = zip(spectrum.offsets, pr.real, pr.imag, pnr.real, pnr.imag,
               np.abs(pr), np.abs(pnr), spectrum.cars_intensity)
    return _csv(SPECTRUM_COLUMNS, rows)


def phase_table(result: OptimizationResult, params: dict[str, PhaseParameterization],
                key_prefix=()) -> list[tuple]:
    rows = []
    for name, phase in result.best_phases.items():
        if name not in params:
            continue
        nodes = params[name].node_offsets
        for w, v in zip(nodes, phase(nodes)):
            rows.append((*key_prefix, name, float(w), float(v)))
    return rows


# --------------------------------------------------------------------------
# commands


@dataclass
class _Ctx:
    scenario: dict
    out: Path | None
    quiet: bool

    def say(self, text: str) -> None:
        if not self.quiet:
            print(text)


def cmd_spectrum(ctx: _Ctx) -> int:
    config = build_configuration(ctx.scenario)
    spectrum = full_spectrum(config, ctx.scenario["grid"].get("output_half_width_cm1"))
    pr, pnr = peak_polarizations(config)
    i_r, i_nr, i_tot = integrated_intensities(spectrum)
    summary = {"peak_abs_Pr_sq": abs(pr) ** 2, "peak_abs_Pnr_sq": abs(pnr) ** 2,
               "I_r": i_r, "I_nr": i_nr, "I_total": i_tot,
               "n_rows": int(spectrum.offsets.size)}
    out = ctx.out or Path("spectrum.csv")
    write_atomic(out, spectrum_csv(spectrum))
    write_atomic(str(out) + ".summary.json", _json(summary))
    ctx.say(_json(summary).strip())
    return EXIT_OK


def _optimize(scenario):
    config = build_configuration(scenario)
    obj = scenario["objective"]
    params = build_parameterizations(scenario)
    result = optimize_pulses(config, obj["shaped_pulses"], obj["kind"], obj["weight_k"],
                             params, build_cma(scenario),
                             output_half_width=scenario["grid"].get("output_half_width_cm1"))
    return config, params, result


def _metrics(config, result, k, output_half_width=None):
    shaped = config.with_phases(**{n: p for n, p in result.best_phases.items()
                                   if n in ("pump", "stokes")},
                                probe=result.best_phases.get("probe"))
    pr, pnr = peak_polarizations(shaped)
    i_r, i_nr, _ = integrated_intensities(full_spectrum(shaped, output_half_width))
    return {"peak_abs_Pr_sq": abs(pr) ** 2, "peak_abs_Pnr_sq": abs(pnr) ** 2,
            "J_local": abs(pr) ** 2 - k * abs(pnr) ** 2, "I_r": i_r, "I_nr": i_nr}


def cmd_optimize(ctx: _Ctx) -> int:
    sc = ctx.scenario
    config, params, result = _optimize(sc)
    metrics = _metrics(config, result, sc["objective"]["weight_k"],
                       sc["grid"].get("output_half_width_cm1"))
    out = ctx.out or Path("optimize_out")
    write_atomic(out / "best_phase.csv",
                 _csv(("pulse", "node_cm1", "phase_rad"), phase_table(result, params)))
    write_atomic(out / "trace.csv", _csv(("evaluations", "best_value"), result.history))
    report = {"objective": sc["objective"], "best_value": result.best_value,
              "evaluations": result.eval_count, "converged": result.converged,
              "seed": result.seed, "fingerprint": result.fingerprint,
              "metrics": metrics}
    write_atomic(out / "result.json", _json(report))
    write_atomic(out / "scenario.json", _json(sc))
    ctx.say(_json(report).strip())
    if not result.converged:
        print("warning: optimizer budget exhausted before convergence", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_pareto(ctx: _Ctx, k_list=None) -> int:
    sc = ctx.scenario
    if sc["objective"]["kind"] == "broadband":
        raise ScenarioError("invalid scenario at 'objective/kind': pareto sweeps the "
                            "local objective")
    config = build_configuration(sc)
    name = sc["objective"]["shaped_pulses"]
    if len(name) != 1 or name[0] not in ("probe", "pump"):
        raise ScenarioError("invalid scenario at 'objective/shaped_pulses': pareto shapes "
                            "the probe only")
    ks = k_list if k_list is not None else sc["pareto"]["k_values"]
    scenario_local = {**sc, "objective": {**sc["objective"], "kind": "local"}}
    params = build_parameterizations(scenario_local)
    param = params[name[0]]
    entries = pareto_sweep(config, ks, param, build_cma(sc))
    rows, phases = [], []
    for e in entries:
        rows.append((e.k, e.resonant, e.nonresonant, e.objective, int(e.result.converged)))
        phases.extend(phase_table(e.result, {name[0]: param}, (e.k,)))
    out = ctx.out or Path("pareto_out")
    write_atomic(out / "pareto.csv",
                 _csv(("k", "abs_Pr_sq", "abs_Pnr_sq", "J", "converged"), rows))
    write_atomic(out / "phases.csv", _csv(("k", "pulse", "node_cm1", "phase_rad"), phases))
    write_atomic(out / "scenario.json", _json({**sc, "pareto": {"k_values": list(ks)}}))
    ctx.say(_csv(("k", "abs_Pr_sq", "abs_Pnr_sq", "J", "converged"), rows).strip())
    if not all(e.result.converged for e in entries):
        print("warning: some sweep points did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_gamma(ctx: _Ctx, k_list=None) -> int:
    sc = ctx.scenario
    medium = build_medium(sc)
    bw = sc["pulses"]["pump"]["bandwidth_cm1"]
    ks = k_list if k_list is not None else sc["pareto"]["k_values"]
    rows = []
    for k in ks:
        lam = medium.weight_to_lambda(k)
        sol = solve_gamma(lam, bw, medium.linewidth)
        rows.append((k, lam, sol.gamma, sol.lambda_gamma, sol.iterations, sol.residual))
    text = _csv(("k", "lambda", "gamma", "lambda_gamma", "iterations", "residual"), rows)
    if ctx.out is not None:
        write_atomic(ctx.out, text)
    ctx.say(text.strip())
    return EXIT_OK


def cmd_verify(ctx: _Ctx) -> int:
    sc = ctx.scenario
    medium = build_medium(sc)
    bw = sc["pulses"]["pump"]["bandwidth_cm1"]
    probe = None
    if "verify" in sc and "stationary_probe_phase" in sc["verify"]:
        probe = build_phase(sc["verify"]["stationary_probe_phase"], bw, medium)
    results = run_diagnostics(bw, medium, sc["grid"]["n_points"], sc["optimizer"]["seed"],
                              probe)
    table = format_table(results)
    # the table is the command's output; --quiet keeps only the verdict line
    ok = all(r.passed for r in results)
    ctx.say(table)
    print("all diagnostics passed" if ok else
          f"{sum(not r.passed for r in results)} diagnostic(s) failed")
    if ctx.out is not None:
        rows = [(r.name, r.value, r.threshold, int(r.passed)) for r in results]
        write_atomic(ctx.out, _csv(("check", "value", "threshold", "passed"), rows))
    return EXIT_OK if ok else EXIT_DIAGNOSTICS


COMMANDS = {"spectrum": cmd_spectrum, "optimize": cmd_optimize, "pareto": cmd_pareto,
            "gamma": cmd_gamma, "verify": cmd_verify}


def _k_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad --k-list: {exc}") from exc
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("--k-list needs non-negative numbers")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cars-shaping",
                                     description="CARS pulse-shaping simulation and control")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--scenario", help="scenario JSON (defaults used if omitted)")
    parser.add_argument("--out", help="output file (spectrum, gamma, verify) or directory")
    parser.add_argument("--seed", type=int, help="override optimizer.seed")
    parser.add_argument("--grid-points", type=int, help="override grid.n_points")
    parser.add_argument("--k-list", type=_k_list, help="comma-separated weights k")
    parser.add_argument("--quiet", action="store_true", help="suppress tables on stdout")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = {}
        if args.scenario:
            raw = json.loads(json.dumps(load_scenario(args.scenario)))
        if args.seed is not None:
            raw.setdefault("optimizer", {})["seed"] = args.seed
        if args.grid_points is not None:
            raw.setdefault("grid", {})["n_points"] = args.grid_points
        scenario = normalize_scenario(raw)
        ctx = _Ctx(scenario, Path(args.out) if args.out else None, args.quiet)
        if args.command in ("pareto", "gamma"):
            return COMMANDS[args.command](ctx, args.k_list)
        return COMMANDS[args.command](ctx)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (GridTruncationError, GammaConvergenceError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
