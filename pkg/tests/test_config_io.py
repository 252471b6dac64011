"""Config parsing, presets, validation and manifest round trips."""

import numpy as np
import pytest

from fringelock import ConfigError, default_config, dump_config, load_config
from fringelock.config import build_config, parse_assignments, validate_config


def test_presets_are_valid():
    for scenario in ("pol_on", "pol_off", "phase_off", "custom"):
        validate_config(default_config(scenario))


def test_unknown_scenario_rejected():
    with pytest.raises(ConfigError):
        default_config("banana")


def test_preset_differences():
    on = default_config("pol_on")
    off = default_config("pol_off")
    quiet = default_config("phase_off")
    assert not on.pol.freeze_after_warmup
    assert off.pol.freeze_after_warmup
    assert not quiet.lock.enabled
    assert not quiet.pol.enabled
    assert quiet.arm1.sigma_pol == 0.0
    assert quiet.arm1.loss_db == quiet.arm2.loss_db


def test_dump_load_round_trip(tmp_path):
    cfg = default_config("pol_off")
    cfg.seed = 99
    cfg.arm2.loss_db = 4.5
    cfg.lock.kp = 1.25
    path = tmp_path / "case.cfg"
    path.write_text(dump_config(cfg))
    loaded = load_config(path)
    assert loaded == cfg


def test_meta_keys_ignored_on_load(tmp_path):
    cfg = default_config("pol_on")
    text = dump_config(cfg, meta={"mean_visibility": "0.92", "note": "x"})
    path = tmp_path / "manifest.cfg"
    path.write_text(text)
    assert load_config(path) == cfg


def test_unknown_key_rejected_by_name(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("arm3.loss_db = 1.0\n")
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert "arm3.loss_db" in str(err.value)


def test_bad_value_type_rejected(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("seed = one\n")
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert "seed" in str(err.value)


def test_malformed_line_rejected(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("duration_s 100\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_comments_and_blank_lines_skipped():
    pairs = parse_assignments("# header\n\nseed = 4  # trailing\n")
    assert pairs == [("seed", "4")]


def test_file_overrides_preset_and_cli_overrides_file(tmp_path):
    path = tmp_path / "case.cfg"
    path.write_text("scenario = pol_off\nseed = 5\narm1.loss_db = 9.0\n")
    cfg = load_config(path)
    assert cfg.scenario == "pol_off"
    assert cfg.seed == 5
    assert cfg.arm1.loss_db == 9.0
    cfg2 = load_config(path, overrides={"seed": "12", "arm1.loss_db": "2.0"})
    assert cfg2.seed == 12
    assert cfg2.arm1.loss_db == 2.0
    assert cfg2.pol.freeze_after_warmup  # preset survives overrides


def test_bool_parsing():
    cfg = build_config([("pol.enabled", "false"), ("init_random_pol", "no")])
    assert not cfg.pol.enabled
    assert not cfg.init_random_pol


def test_validation_timing_grid():
    cfg = default_config("pol_on")
    cfg.dt_fast_s = 0.3
    cfg.bin_s = 1.0
    with pytest.raises(ConfigError) as err:
        validate_config(cfg)
    assert "bin_s" in str(err.value)

    cfg = default_config("pol_on")
    cfg.duration_s = 10.5
    with pytest.raises(ConfigError):
        validate_config(cfg)

    cfg = default_config("pol_on")
    cfg.pol.period_s = 0.017
    with pytest.raises(ConfigError):
        validate_config(cfg)


def test_validation_rejects_bad_detector():
    cfg = default_config("pol_on")
    cfg.detector.efficiency = 1.2
    with pytest.raises(ConfigError) as err:
        validate_config(cfg)
    assert "detector" in str(err.value)


def test_validation_rejects_off_grid_plan():
    cfg = default_config("pol_on")
    cfg.plan.lock_nm = 1547.30
    with pytest.raises(ConfigError) as err:
        validate_config(cfg)
    assert "plan" in str(err.value)


def test_validation_rejects_orthogonal_references():
    cfg = default_config("pol_on")
    cfg.pol.ref2_deg = 90.0
    with pytest.raises(ConfigError):
        validate_config(cfg)


def test_validation_rejects_bad_v_path():
    cfg = default_config("pol_on")
    cfg.v_path = 1.5
    with pytest.raises(ConfigError):
        validate_config(cfg)


def test_dump_is_stable():
    cfg = default_config("pol_on")
    assert dump_config(cfg) == dump_config(cfg)
    # Every known key appears exactly once.
    lines = [l for l in dump_config(cfg).splitlines() if l]
    keys = [l.split(" = ")[0] for l in lines]
    assert len(keys) == len(set(keys))
    assert "arm2.phase_diffusion" in keys
