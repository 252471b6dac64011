"""Command line behaviour and exit codes."""

import numpy as np

from fringelock.cli import main


def _run_args(tmp_path, *extra):
    return [
        "run",
        "--scenario", "pol_on",
        "--seed", "3",
        "--duration-s", "20",
        "--set", "analysis.window_s=10",
        "--set", "pol.warmup_steps=200",
        "--out-dir", str(tmp_path / "out"),
        *extra,
    ]


def test_run_writes_outputs(tmp_path, capsys):
    assert main(_run_args(tmp_path)) == 0
    out = tmp_path / "out"
    for name in ("counts.csv", "pd.csv", "visibility.csv", "histogram.csv",
                 "diagnostics.csv", "manifest.cfg"):
        assert (out / name).exists()
    text = capsys.readouterr().out
    assert "mean_visibility=" in text


def test_run_unknown_key_exits_2(tmp_path, capsys):
    code = main(_run_args(tmp_path, "--set", "arm9.loss=1"))
    assert code == 2
    assert "arm9.loss" in capsys.readouterr().err


def test_run_runtime_failure_exits_3(tmp_path, capsys):
    code = main(_run_args(tmp_path, "--set", "v_path=0"))
    assert code == 3
    assert "run failed" in capsys.readouterr().err


def test_config_file_round_trip(tmp_path):
    cfg_file = tmp_path / "case.cfg"
    cfg_file.write_text("scenario = phase_off\nduration_s = 20\nseed = 2\n"
                        "analysis.window_s = 10\n")
    code = main(["run", "--config", str(cfg_file),
                 "--out-dir", str(tmp_path / "out")])
    assert code == 0
    manifest = (tmp_path / "out" / "manifest.cfg").read_text()
    assert "scenario = phase_off" in manifest
    assert "duration_s = 20.0" in manifest


def test_sweep_runs_each_seed(tmp_path, capsys):
    code = main([
        "sweep", "--scenario", "phase_off", "--seeds", "1,2",
        "--duration-s", "20", "--set", "analysis.window_s=10",
        "--out-dir", str(tmp_path / "sweep"),
    ])
    assert code == 0
    assert (tmp_path / "sweep" / "seed_1" / "counts.csv").exists()
    assert (tmp_path / "sweep" / "seed_2" / "counts.csv").exists()
    summary = (tmp_path / "sweep" / "sweep_summary.csv").read_text().splitlines()
    assert summary[0] == "seed,mean_visibility,std_visibility,n_valid"
    assert len(summary) == 3
    assert "grand_mean=" in capsys.readouterr().out


def test_sweep_rejects_bad_seed_list(tmp_path):
    assert main(["sweep", "--seeds", "1,x", "--out-dir", str(tmp_path)]) == 2


def test_analyze_matches_run_output(tmp_path, capsys):
    assert main(_run_args(tmp_path)) == 0
    counts = tmp_path / "out" / "counts.csv"
    code = main([
        "analyze", "--counts", str(counts), "--window-s", "10",
        "--out-dir", str(tmp_path / "re"),
    ])
    assert code == 0
    original = (tmp_path / "out" / "visibility.csv").read_text()
    recomputed = (tmp_path / "re" / "visibility.csv").read_text()
    orig_v = np.array([l.split(",")[1] for l in original.splitlines()[1:]], dtype=float)
    re_v = np.array([l.split(",")[1] for l in recomputed.splitlines()[1:]], dtype=float)
    assert np.allclose(orig_v, re_v, atol=1e-9, equal_nan=True)


def test_analyze_missing_file_exits_2(tmp_path, capsys):
    code = main(["analyze", "--counts", str(tmp_path / "nope.csv")])
    assert code == 2


def test_version_flag(capsys):
    try:
        main(["--version"])
    except SystemExit as exc:
        assert exc.code == 0
    assert capsys.readouterr().out.strip()
