import runpy
from pathlib import Path

DEMOS = Path(__file__).resolve().parents[1] / "demos"


def test_signal_and_background_demo_runs(capsys):
    runpy.run_path(str(DEMOS / "01_peak_signal_and_background.py"), run_name="__main__")
    out = capsys.readouterr().out
    assert "closed-form maximum 0.825419" in out
