import importlib.util
import json
from pathlib import Path

import pytest

SCRIPT = Path(__file__).parent.parent / "scripts" / "summarize_run.py"


@pytest.fixture(scope="module")
def summarize():
    spec = importlib.util.spec_from_file_location("summarize_run", SCRIPT)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def stat(mean):
    return {"mean": mean, "std": 0.0, "n": 1}


def test_run_summary(summarize):
    keys = (
        "throughput_bps", "energy_efficiency", "switch_count", "switches_per_minute", "md_rate",
        "avg_coalition_fa", "mean_rate_dissatisfied", "stability_breaks",
    )
    summary = {
        "name": "demo",
        "command": "run",
        "aggregate": {k: stat(1.0) for k in keys},
        "per_seed": {"0": {"throughput_bps": 2e6, "switch_count": 3, "md_rate": 0.01}},
    }
    text = summarize.render_summary(summary)
    assert "coalspec - demo (run)" in text
    assert "seed    0:    2.000 Mbit/s" in text

    single_point = summarize.render_summary({**summary, "command": "sweep"})
    assert "coalspec - demo (sweep)" in single_point
    assert "seed    0:    2.000 Mbit/s" in single_point


def test_split_summary(summarize):
    summary = {
        "command": "sweep", "variable": "split", "mean_snr": 5.0, "md_coalition": 1e-4,
        "and_argmax": 50, "or_argmin": 50, "center": 50,
        "md_condition": True, "threshold_condition": False,
    }
    assert "Extremes at equal split:     yes" in summarize.render_summary(summary)


def test_points_summary(summarize):
    summary = {
        "command": "sweep", "variable": "V",
        "points": {"N=3,V=1.0": stat(4.0)},
    }
    assert "N=3,V=1.0" in summarize.render_summary(summary)
    summary = {
        "command": "sweep", "variable": "N", "all_stable": True,
        "points": {"2": {"t_converge": stat(5), "switch_count": stat(2), "fa_computation_count": stat(60)}},
    }
    assert "All partitions Nash-stable:  ✅" in summarize.render_summary(summary)


def test_main_reads_directory(summarize, tmp_path, monkeypatch, capsys):
    (tmp_path / "summary.json").write_text(json.dumps({
        "command": "sweep", "variable": "V", "points": {},
    }), encoding="utf-8")
    monkeypatch.setattr("sys.argv", ["summarize_run.py", str(tmp_path)])
    assert summarize.main() == 0
    assert "SWEEP OVER V" in capsys.readouterr().out

    monkeypatch.setattr("sys.argv", ["summarize_run.py", str(tmp_path / "nothing")])
    assert summarize.main() == 1
    monkeypatch.setattr("sys.argv", ["summarize_run.py"])
    assert summarize.main() == 2
