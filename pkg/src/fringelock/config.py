"""Scenario configuration: defaults, presets, file format, manifest.

Config files are flat ``key = value`` text, one assignment per line, with
``#`` comments.  Keys are namespaced with dots (``arm2.loss_db``).  A file
may name a ``scenario`` preset; explicit assignments then override preset
values, and command-line options override both.  Unknown keys are rejected
by name.  ``meta.*`` keys are reserved for annotations written into run
manifests and are ignored on load, which makes every manifest itself a
loadable config reproducing its run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

from .detection import SpcmConfig
from .dynamics import ChannelPlan
from .errors import ConfigError, ContractViolation

SCENARIOS = ("pol_on", "pol_off", "phase_off", "custom")


@dataclass
class SourceConfig:
    """Launch levels per channel; the quantum channel is photons per gate."""

    mu_q: float = 0.5
    power_p1: float = 1.0
    power_p2: float = 1.0
    power_lock: float = 1.0


@dataclass
class ArmConfig:
    """Static and stochastic parameters of one fibre arm."""

    length_km: float = 8.0
    loss_db: float = 3.0
    sigma_pol: float = 0.02
    kappa_per_nm: float = 0.05
    phase_diffusion: float = 0.0
    fast_amp_rad: float = 0.0
    fast_freq_hz: float = 0.0


@dataclass
class UnlockedConfig:
    """Slow uncontrolled phase on the quantum channel relative to the lock."""

    ramp_rad_s: float = 2.0 * math.pi / 300.0
    diffusion: float = 2.0e-4


@dataclass
class PolConfig:
    """Polarisation controller settings shared by both arms."""

    enabled: bool = True
    freeze_after_warmup: bool = False
    period_s: float = 0.01
    dither_rad: float = 0.12
    step_gain: float = 0.6
    warmup_steps: int = 800
    ref1_deg: float = 0.0
    ref2_deg: float = 45.0


@dataclass
class LockConfig:
    """Phase lock loop settings."""

    enabled: bool = True
    kp: float = 2.0
    ki_per_s: float = 50.0
    pd_noise: float = 0.002
    calibration_points: int = 600


@dataclass
class StretcherConfig:
    gain_rad_per_unit: float = 1.0
    stroke_rad: float = 5000.0
    slew_rad_per_s: float = 1.0e5


@dataclass
class AnalysisConfig:
    window_s: float = 600.0
    hist_bin: float = 0.01


@dataclass
class ScenarioConfig:
    """Everything a run needs; one seed gives one reproducible record."""

    scenario: str = "pol_on"
    seed: int = 1
    duration_s: float = 5100.0
    bin_s: float = 1.0
    dt_fast_s: float = 1.0e-4
    v_path: float = 0.995
    delta0_q_rad: float = 0.0
    delta0_lock_rad: float = 0.0
    init_random_pol: bool = True
    plan: ChannelPlan = field(default_factory=ChannelPlan)
    source: SourceConfig = field(default_factory=SourceConfig)
    arm1: ArmConfig = field(default_factory=ArmConfig)
    arm2: ArmConfig = field(default_factory=ArmConfig)
    unlocked: UnlockedConfig = field(default_factory=UnlockedConfig)
    detector: SpcmConfig = field(default_factory=SpcmConfig)
    pol: PolConfig = field(default_factory=PolConfig)
    lock: LockConfig = field(default_factory=LockConfig)
    stretcher: StretcherConfig = field(default_factory=StretcherConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)


# Canonical key order for parsing and manifest output: (key, section attr or
# None, field name, type).  bool values are written and parsed as true/false.
_KEYS: list[tuple[str, str | None, str, type]] = [
    ("scenario", None, "scenario", str),
    ("seed", None, "seed", int),
    ("duration_s", None, "duration_s", float),
    ("bin_s", None, "bin_s", float),
    ("dt_fast_s", None, "dt_fast_s", float),
    ("v_path", None, "v_path", float),
    ("delta0_q_rad", None, "delta0_q_rad", float),
    ("delta0_lock_rad", None, "delta0_lock_rad", float),
    ("init_random_pol", None, "init_random_pol", bool),
    ("plan.pilot1_nm", "plan", "pilot1_nm", float),
    ("plan.quantum_nm", "plan", "quantum_nm", float),
    ("plan.pilot2_nm", "plan", "pilot2_nm", float),
    ("plan.lock_nm", "plan", "lock_nm", float),
    ("plan.grid_ghz", "plan", "grid_ghz", float),
    ("source.mu_q", "source", "mu_q", float),
    ("source.power_p1", "source", "power_p1", float),
    ("source.power_p2", "source", "power_p2", float),
    ("source.power_lock", "source", "power_lock", float),
    ("arm1.length_km", "arm1", "length_km", float),
    ("arm1.loss_db", "arm1", "loss_db", float),
    ("arm1.sigma_pol", "arm1", "sigma_pol", float),
    ("arm1.kappa_per_nm", "arm1", "kappa_per_nm", float),
    ("arm1.phase_diffusion", "arm1", "phase_diffusion", float),
    ("arm1.fast_amp_rad", "arm1", "fast_amp_rad", float),
    ("arm1.fast_freq_hz", "arm1", "fast_freq_hz", float),
    ("arm2.length_km", "arm2", "length_km", float),
    ("arm2.loss_db", "arm2", "loss_db", float),
    ("arm2.sigma_pol", "arm2", "sigma_pol", float),
    ("arm2.kappa_per_nm", "arm2", "kappa_per_nm", float),
    ("arm2.phase_diffusion", "arm2", "phase_diffusion", float),
    ("arm2.fast_amp_rad", "arm2", "fast_amp_rad", float),
    ("arm2.fast_freq_hz", "arm2", "fast_freq_hz", float),
    ("unlocked.ramp_rad_s", "unlocked", "ramp_rad_s", float),
    ("unlocked.diffusion", "unlocked", "diffusion", float),
    ("detector.efficiency", "detector", "efficiency", float),
    ("detector.gate_rate_hz", "detector", "gate_rate_hz", float),
    ("detector.gate_width_ns", "detector", "gate_width_ns", float),
    ("detector.p_dark", "detector", "p_dark", float),
    ("detector.p_bg", "detector", "p_bg", float),
    ("pol.enabled", "pol", "enabled", bool),
    ("pol.freeze_after_warmup", "pol", "freeze_after_warmup", bool),
    ("pol.period_s", "pol", "period_s", float),
    ("pol.dither_rad", "pol", "dither_rad", float),
    ("pol.step_gain", "pol", "step_gain", float),
    ("pol.warmup_steps", "pol", "warmup_steps", int),
    ("pol.ref1_deg", "pol", "ref1_deg", float),
    ("pol.ref2_deg", "pol", "ref2_deg", float),
    ("lock.enabled", "lock", "enabled", bool),
    ("lock.kp", "lock", "kp", float),
    ("lock.ki_per_s", "lock", "ki_per_s", float),
    ("lock.pd_noise", "lock", "pd_noise", float),
    ("lock.calibration_points", "lock", "calibration_points", int),
    ("stretcher.gain_rad_per_unit", "stretcher", "gain_rad_per_unit", float),
    ("stretcher.stroke_rad", "stretcher", "stroke_rad", float),
    ("stretcher.slew_rad_per_s", "stretcher", "slew_rad_per_s", float),
    ("analysis.window_s", "analysis", "window_s", float),
    ("analysis.hist_bin", "analysis", "hist_bin", float),
]

_KEY_MAP = {key: (section, name, typ) for key, section, name, typ in _KEYS}


def default_config(scenario: str = "pol_on") -> ScenarioConfig:
    """Fresh config for a named scenario preset."""
    if scenario not in SCENARIOS:
        raise ConfigError("scenario", f"unknown scenario {scenario!r}")
    cfg = ScenarioConfig(scenario=scenario)
    # The long arm carries the delay line, so it is both lossier and the one
    # whose phase is driven; values below reproduce the reference behaviour.
    cfg.arm1.loss_db = 6.7
    cfg.arm2.loss_db = 3.0
    cfg.arm2.phase_diffusion = 10.0
    cfg.arm2.fast_amp_rad = 2.4
    cfg.arm2.fast_freq_hz = 70.0
    if scenario == "pol_off":
        cfg.pol.freeze_after_warmup = True
    elif scenario == "phase_off":
        cfg.lock.enabled = False
        cfg.pol.enabled = False
        cfg.init_random_pol = False
        for arm in (cfg.arm1, cfg.arm2):
            arm.sigma_pol = 0.0
            arm.kappa_per_nm = 0.0
            arm.loss_db = 2.75
    return cfg


def _parse_value(key: str, raw: str, typ: type):
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r} as {typ.__name__}") from None


def set_key(cfg: ScenarioConfig, key: str, raw_value: str) -> None:
    """Assign one flat key; unknown keys are rejected by name."""
    if key not in _KEY_MAP:
        raise ConfigError(key, "unknown key")
    section, name, typ = _KEY_MAP[key]
    value = _parse_value(key, raw_value, typ)
    target = cfg if section is None else getattr(cfg, section)
    setattr(target, name, value)


def parse_assignments(text: str, origin: str = "config") -> list[tuple[str, str]]:
    """Split config text into (key, value) pairs, preserving order."""
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{origin}:{lineno}", f"expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        pairs.append((key.strip(), value.strip()))
    return pairs


def load_config(path, overrides: dict[str, str] | None = None) -> ScenarioConfig:
    """Read a config file, apply overrides, validate.

    The file's ``scenario`` key (if any) selects the starting preset; other
    assignments are applied on top in file order.  ``meta.*`` keys are
    ignored so run manifests load unchanged.
    """
    with open(path, "r", encoding="utf-8") as fh:
        pairs = parse_assignments(fh.read(), origin=str(path))
    return build_config(pairs, overrides)


def build_config(
    pairs: list[tuple[str, str]], overrides: dict[str, str] | None = None
) -> ScenarioConfig:
    """Assemble and validate a config from assignment pairs plus overrides."""
    scenario = "pol_on"
    for key, value in pairs:
        if key == "scenario":
            scenario = value
    if overrides and "scenario" in overrides:
        scenario = overrides["scenario"]
    cfg = default_config(scenario)
    for key, value in pairs:
        if key == "scenario" or key.startswith("meta."):
            continue
        set_key(cfg, key, value)
    if overrides:
        for key, value in overrides.items():
            if key == "scenario":
                continue
            set_key(cfg, key, value)
    validate_config(cfg)
    return cfg


def _require(cond: bool, key: str, message: str) -> None:
    if not cond:
        raise ConfigError(key, message)


def validate_config(cfg: ScenarioConfig) -> None:
    """Check cross-field invariants; raises ConfigError naming the field."""
    _require(cfg.scenario in SCENARIOS, "scenario", f"unknown scenario {cfg.scenario!r}")
    _require(cfg.seed >= 0, "seed", "must be >= 0")
    _require(cfg.duration_s > 0, "duration_s", "must be positive")
    _require(cfg.bin_s > 0, "bin_s", "must be positive")
    _require(cfg.dt_fast_s > 0, "dt_fast_s", "must be positive")
    _require(cfg.dt_fast_s <= cfg.bin_s, "dt_fast_s", "must not exceed bin_s")
    _require(0.0 <= cfg.v_path <= 1.0, "v_path", "must be in [0, 1]")

    def _integer_ratio(num: float, den: float) -> bool:
        ratio = num / den
        return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, abs(ratio)) and round(ratio) >= 1

    _require(
        _integer_ratio(cfg.bin_s, cfg.dt_fast_s),
        "bin_s",
        "must be an integer multiple of dt_fast_s",
    )
    _require(
        _integer_ratio(cfg.duration_s, cfg.bin_s),
        "duration_s",
        "must be an integer multiple of bin_s",
    )
    _require(cfg.source.mu_q >= 0, "source.mu_q", "must be >= 0")
    for name in ("power_p1", "power_p2", "power_lock"):
        _require(getattr(cfg.source, name) >= 0, f"source.{name}", "must be >= 0")
    for arm_key in ("arm1", "arm2"):
        arm = getattr(cfg, arm_key)
        _require(arm.length_km > 0, f"{arm_key}.length_km", "must be positive")
        _require(arm.loss_db >= 0, f"{arm_key}.loss_db", "must be >= 0")
        _require(arm.sigma_pol >= 0, f"{arm_key}.sigma_pol", "must be >= 0")
        _require(arm.phase_diffusion >= 0, f"{arm_key}.phase_diffusion", "must be >= 0")
        _require(arm.fast_amp_rad >= 0, f"{arm_key}.fast_amp_rad", "must be >= 0")
        _require(arm.fast_freq_hz >= 0, f"{arm_key}.fast_freq_hz", "must be >= 0")
    _require(cfg.unlocked.diffusion >= 0, "unlocked.diffusion", "must be >= 0")
    try:
        cfg.plan.validate()
    except ContractViolation as exc:
        raise ConfigError("plan", str(exc)) from None
    try:
        SpcmConfig(**asdict(cfg.detector))
    except ContractViolation as exc:
        raise ConfigError("detector", str(exc)) from None
    # The segment cadence applies even with the controller off (the
    # birefringence walk advances per segment), so check it always.
    _require(cfg.pol.period_s > 0, "pol.period_s", "must be positive")
    _require(
        _integer_ratio(cfg.bin_s, cfg.pol.period_s),
        "pol.period_s",
        "must divide bin_s a whole number of times",
    )
    _require(
        _integer_ratio(cfg.pol.period_s, cfg.dt_fast_s),
        "pol.period_s",
        "must be an integer multiple of dt_fast_s",
    )
    if cfg.pol.enabled:
        _require(cfg.pol.dither_rad > 0, "pol.dither_rad", "must be positive")
        _require(cfg.pol.step_gain >= 0, "pol.step_gain", "must be >= 0")
        _require(cfg.pol.warmup_steps >= 0, "pol.warmup_steps", "must be >= 0")
        spread = abs(cfg.pol.ref1_deg - cfg.pol.ref2_deg) % 180.0
        _require(
            5.0 <= spread <= 85.0 or 95.0 <= spread <= 175.0,
            "pol.ref2_deg",
            "reference polarisations must be distinct and non-orthogonal",
        )
    _require(cfg.lock.kp >= 0, "lock.kp", "must be >= 0")
    _require(cfg.lock.ki_per_s >= 0, "lock.ki_per_s", "must be >= 0")
    _require(cfg.lock.pd_noise >= 0, "lock.pd_noise", "must be >= 0")
    _require(cfg.lock.calibration_points >= 16, "lock.calibration_points", "must be >= 16")
    _require(
        cfg.stretcher.gain_rad_per_unit != 0,
        "stretcher.gain_rad_per_unit",
        "must be nonzero",
    )
    _require(cfg.stretcher.stroke_rad > 0, "stretcher.stroke_rad", "must be positive")
    _require(cfg.stretcher.slew_rad_per_s > 0, "stretcher.slew_rad_per_s", "must be positive")
    _require(
        cfg.analysis.window_s >= 3.0 * cfg.bin_s,
        "analysis.window_s",
        "must span at least 3 bins",
    )
    _require(0.0 < cfg.analysis.hist_bin <= 1.0, "analysis.hist_bin", "must be in (0, 1]")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(cfg: ScenarioConfig, meta: dict[str, str] | None = None) -> str:
    """Render every effective parameter, one key per line, loadable as-is."""
    lines = []
    if meta:
        for key, value in meta.items():
            lines.append(f"meta.{key} = {value}")
    for key, section, name, _typ in _KEYS:
        target = cfg if section is None else getattr(cfg, section)
        lines.append(f"{key} = {_format_value(getattr(target, name))}")
    return "\n".join(lines) + "\n"
