import csv
import json

import numpy as np
import pytest

from cars_shaping import (CarsConfiguration, MediumParams, analytic_max_pr,
                          local_objective, modified_arctan_scheme)
from cars_shaping.cli import (EXIT_DIAGNOSTICS, EXIT_INVALID, EXIT_NOT_CONVERGED,
                              EXIT_NUMERICAL, EXIT_OK, ScenarioError, load_scenario,
                              main, normalize_scenario, validate_scenario)

D, G = 50.0, 4.8


def write(tmp_path, scenario, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(scenario))
    return str(path)


def probe_scenario(scheme, **extra):
    return {"pulses": {"probe": {"phase": {"scheme": scheme, **extra}}}}


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestSpectrum:
    def test_arctan_peak(self, tmp_path):
        out = tmp_path / "spectrum.csv"
        code = main(["spectrum", "--scenario", write(tmp_path, probe_scenario("arctan")),
                     "--out", str(out), "--quiet"])
        assert code == EXIT_OK
        summary = json.loads((tmp_path / "spectrum.csv.summary.json").read_text())
        assert summary["peak_abs_Pr_sq"] == pytest.approx(analytic_max_pr(D, G), rel=1e-3)
        rows = read_rows(out)
        assert len(rows) == summary["n_rows"]
        i_cars = np.array([float(r["I_cars"]) for r in rows])
        total = np.abs(np.array([complex(float(r["re_Pr"]) + float(r["re_Pnr"]),
                                         float(r["im_Pr"]) + float(r["im_Pnr"]))
                                 for r in rows])) ** 2
        np.testing.assert_allclose(i_cars, total, rtol=1e-12, atol=1e-300)

    def test_pi_step_suppresses_background(self, tmp_path):
        out = tmp_path / "spectrum.csv"
        scenario = probe_scenario("pi_step", positions_cm1=[0.0])
        assert main(["spectrum", "--scenario", write(tmp_path, scenario),
                     "--out", str(out), "--quiet"]) == EXIT_OK
        summary = json.loads((tmp_path / "spectrum.csv.summary.json").read_text())
        assert summary["peak_abs_Pnr_sq"] < 1e-20
        assert summary["peak_abs_Pr_sq"] > 0.4

    def test_defaults_without_scenario(self, tmp_path):
        out = tmp_path / "spectrum.csv"
        assert main(["spectrum", "--out", str(out), "--quiet"]) == EXIT_OK
        summary = json.loads((tmp_path / "spectrum.csv.summary.json").read_text())
        # transform-limited background peak: chi^2 pi^2 D / 3
        assert summary["peak_abs_Pnr_sq"] == pytest.approx(0.01 * np.pi**2 * D / 3, rel=1e-6)

    def test_truncated_grid_is_numerical_failure(self, tmp_path, capsys):
        code = main(["spectrum", "--scenario", write(tmp_path, {"grid": {"half_width_cm1": 60}}),
                     "--out", str(tmp_path / "x.csv")])
        assert code == EXIT_NUMERICAL
        assert "half-width" in capsys.readouterr().err
        assert not (tmp_path / "x.csv").exists()


class TestValidation:
    @pytest.mark.parametrize("scenario, key", [
        ({"medium": {"linewidth_cm1": -1}}, "medium/linewidth_cm1"),
        ({"medium": {"linewdth_cm1": 4.8}}, "linewdth_cm1"),
        ({"pulses": {"probe": {"phase": {"scheme": "arctan", "slope": 1}}}}, "slope"),
        ({"pulses": {"probe": {"phase": {"scheme": "spiral"}}}}, "scheme"),
        ({"pulses": {"probe": {"phase": {"scheme": "pi_step"}}}}, "positions_cm1"),
        ({"pulses": {"probe": {"phase": {"scheme": "linear"}}}}, "slope_rad_per_cm1"),
        ({"objective": {"kind": "local", "weight_k": -2}}, "weight_k"),
        ({"optimizer": {"population": 2}}, "population"),
    ])
    def test_bad_scenario_names_the_key(self, tmp_path, capsys, scenario, key):
        code = main(["spectrum", "--scenario", write(tmp_path, scenario),
                     "--out", str(tmp_path / "x.csv")])
        assert code == EXIT_INVALID
        assert key in capsys.readouterr().err

    def test_unreadable_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["verify", "--scenario", str(path)]) == EXIT_INVALID

    def test_normalize_is_idempotent(self):
        once = normalize_scenario(probe_scenario("modified_arctan", weight_k=3.0))
        assert normalize_scenario(once) == once
        validate_scenario(once)

    def test_validate_raises(self):
        with pytest.raises(ScenarioError):
            validate_scenario({"mode": "four_pulse"})


class TestGammaAndVerify:
    def test_gamma_table(self, tmp_path):
        out = tmp_path / "gamma.csv"
        assert main(["gamma", "--k-list", "0,1,100", "--out", str(out), "--quiet"]) == EXIT_OK
        rows = read_rows(out)
        assert [float(r["k"]) for r in rows] == [0.0, 1.0, 100.0]
        assert float(rows[0]["gamma"]) == pytest.approx(G, abs=1e-10)
        gammas = [float(r["gamma"]) for r in rows]
        assert gammas[0] > gammas[1] > gammas[2]
        lam_gamma = [float(r["lambda_gamma"]) for r in rows]
        assert lam_gamma[0] < lam_gamma[1] < lam_gamma[2]
        assert all(float(r["residual"]) < 1e-10 for r in rows)

    def test_verify_passes(self, tmp_path):
        out = tmp_path / "verify.csv"
        scenario = {"verify": {"stationary_probe_phase": {"scheme": "arctan"}}}
        code = main(["verify", "--scenario", write(tmp_path, scenario), "--out", str(out),
                     "--quiet"])
        assert code == EXIT_OK
        assert all(r["passed"] == "1" for r in read_rows(out))

    def test_verify_negative_control(self, tmp_path, capsys):
        scenario = {"verify": {"stationary_probe_phase": {
            "scheme": "tabulated", "nodes_cm1": [-40, 0, 40], "values_rad": [0, 1.0, 0]}}}
        code = main(["verify", "--scenario", write(tmp_path, scenario), "--quiet"])
        assert code == EXIT_DIAGNOSTICS
        assert "1 diagnostic(s) failed" in capsys.readouterr().out


class TestOptimize:
    def test_budget_exhausted_is_deterministic(self, tmp_path):
        scenario = {"optimizer": {"max_evals": 1200}}
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / run
            code = main(["optimize", "--scenario", write(tmp_path, scenario), "--out", str(out),
                         "--seed", "4", "--quiet"])
            assert code == EXIT_NOT_CONVERGED
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        assert outputs[0] == outputs[1]
        assert set(outputs[0]) == {"best_phase.csv", "trace.csv", "result.json",
                                   "scenario.json"}
        assert not list(tmp_path.rglob("*.tmp*"))

    def test_converged_run_and_round_trip(self, tmp_path):
        out = tmp_path / "run"
        assert main(["optimize", "--out", str(out), "--quiet"]) == EXIT_OK
        report = json.loads((out / "result.json").read_text())
        assert report["converged"]
        assert report["best_value"] == pytest.approx(analytic_max_pr(D, G), rel=5e-3)
        assert report["metrics"]["peak_abs_Pr_sq"] == pytest.approx(report["best_value"],
                                                                    rel=1e-9)
        trace = read_rows(out / "trace.csv")
        best = [float(r["best_value"]) for r in trace]
        assert best == sorted(best)
        # the echoed scenario reproduces the run exactly
        echoed = load_scenario(out / "scenario.json")
        assert normalize_scenario(echoed) == echoed
        again = tmp_path / "again"
        main(["optimize", "--scenario", str(out / "scenario.json"), "--out", str(again),
              "--quiet"])
        assert (again / "result.json").read_bytes() == (out / "result.json").read_bytes()

    def test_pareto_sweep(self, tmp_path):
        out = tmp_path / "pareto"
        code = main(["pareto", "--k-list", "0,10", "--out", str(out), "--quiet"])
        assert code == EXIT_OK
        rows = read_rows(out / "pareto.csv")
        assert [float(r["k"]) for r in rows] == [0.0, 10.0]
        assert float(rows[0]["abs_Pr_sq"]) == pytest.approx(analytic_max_pr(D, G), rel=5e-3)
        ref = modified_arctan_scheme(MediumParams().weight_to_lambda(10.0))
        j_ref = local_objective(CarsConfiguration.default(probe_phase=ref), 10.0)
        assert float(rows[1]["J"]) == pytest.approx(j_ref, rel=5e-3)
        phases = read_rows(out / "phases.csv")
        assert {float(r["k"]) for r in phases} == {0.0, 10.0}

    def test_pareto_rejects_broadband(self, tmp_path):
        scenario = {"objective": {"kind": "broadband"}}
        assert main(["pareto", "--scenario", write(tmp_path, scenario),
                     "--out", str(tmp_path / "p")]) == EXIT_INVALID
