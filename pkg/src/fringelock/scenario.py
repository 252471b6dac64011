"""End-to-end scenario runs: warmup, main loop, output records.

The engine advances three nested time scales:

* fast steps (``dt_fast_s``, default 0.1 ms): phase drift, the lock monitor
  sample, the PI update and the stretcher slew;
* control segments (``pol.period_s``, default 10 ms): birefringence random
  walk, one polarisation-controller plate step per arm, re-evaluation of the
  channel overlaps feeding fringe amplitude and phase;
* bins (``bin_s``, default 1 s): detector counts are Binomial over the gates
  of the bin at the time-averaged click probability, then dark-subtracted.

The per-sample lock arithmetic is an inline mirror of
:func:`control.phase_lock_step`, :func:`interferometer.apply_stretcher` and
:func:`control.range_reset`, kept honest by an equivalence test; calling the
public ops per fast step would dominate the runtime of an 85 minute record.

Randomness comes from one numpy Generator in a fixed draw order: warmup
(initial arm states, calibration noise), then per bin the polarisation step
batch for each moving arm, the slow-phase increments for each diffusing arm,
the residual-ramp increments when diffusing, the monitor noise, and last the
bin's count draw.  Equal seeds give bit-identical records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import VisibilityStats, analyze_counts
from .config import ScenarioConfig, dump_config, validate_config
from .control import (
    PhaseLockState,
    PolControllerState,
    lock_calibration,
    pol_control_step,
)
from .detection import CountSeries

TWO_PI = 2.0 * math.pi


# 2x2 complex matrices as flat tuples (m00, m01, m10, m11): the control and
# overlap arithmetic runs millions of times per run and plain complex tuples
# are several times faster than 2x2 ndarrays at this size.


def _mm(a, b):
    return (
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    )


def _mv(m, v):
    return (m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1])


def _su2(n1, n2, n3, angle):
    c = math.cos(0.5 * angle)
    s = math.sin(0.5 * angle)
    return (
        complex(c, -s * n1),
        complex(s * n3, -s * n2),
        complex(-s * n3, -s * n2),
        complex(c, s * n1),
    )


def _axis_angle(m):
    c = 0.5 * (m[0].real + m[3].real)
    c = min(1.0, max(-1.0, c))
    angle = 2.0 * math.acos(c)
    s = math.sin(0.5 * angle)
    if abs(s) < 1e-12:
        return (1.0, 0.0, 0.0), 0.0
    n1 = -m[0].imag / s
    n2 = -m[1].imag / s
    n3 = m[1].real / s
    norm = math.sqrt(n1 * n1 + n2 * n2 + n3 * n3)
    if norm == 0.0:
        return (1.0, 0.0, 0.0), 0.0
    return (n1 / norm, n2 / norm, n3 / norm), angle


def _retarder(c2, s2, delta):
    c = math.cos(0.5 * delta)
    s = math.sin(0.5 * delta)
    return (
        complex(c, -s * c2),
        complex(0.0, -s * s2),
        complex(0.0, -s * s2),
        complex(c, s * c2),
    )


def _stack(trigs, deltas):
    m = (1.0 + 0.0j, 0.0j, 0.0j, 1.0 + 0.0j)
    for (c2, s2), delta in zip(trigs, deltas):
        m = _mm(_retarder(c2, s2, delta), m)
    return m


def _wrap(x):
    return (x + math.pi) % TWO_PI - math.pi


class _ArmRt:
    """Mutable runtime state of one arm in engine form."""

    __slots__ = (
        "axis",
        "alpha",
        "sigma",
        "kappa",
        "lam_ref",
        "transmission",
        "walk",
        "diffusion",
        "fast_amp",
        "fast_w",
        "ctrl",
        "trigs",
        "stack",
    )

    def __init__(self, arm_cfg, lam_ref, ctrl):
        self.axis = (1.0, 0.0, 0.0)
        self.alpha = 0.0
        self.sigma = arm_cfg.sigma_pol
        self.kappa = arm_cfg.kappa_per_nm
        self.lam_ref = lam_ref
        self.transmission = 10.0 ** (-arm_cfg.loss_db / 10.0)
        self.walk = 0.0
        self.diffusion = arm_cfg.phase_diffusion
        self.fast_amp = arm_cfg.fast_amp_rad
        self.fast_w = TWO_PI * arm_cfg.fast_freq_hz
        self.ctrl = ctrl
        self.trigs = tuple(
            (math.cos(2.0 * a), math.sin(2.0 * a)) for a in ctrl.axes_rad
        )
        self.stack = _stack(self.trigs, ctrl.retardances_rad)

    def unitary_at(self, wavelength_nm):
        scale = 1.0 + self.kappa * (wavelength_nm - self.lam_ref)
        return _su2(*self.axis, self.alpha * scale)

    def apply_walk_step(self, ax, ay, az, angle):
        norm = math.sqrt(ax * ax + ay * ay + az * az)
        if norm < 1e-12:
            return
        step = _su2(ax / norm, ay / norm, az / norm, abs(angle))
        base = _su2(*self.axis, self.alpha)
        self.axis, self.alpha = _axis_angle(_mm(step, base))

    def refresh_stack(self):
        self.stack = _stack(self.trigs, self.ctrl.retardances_rad)


@dataclass
class RunResult:
    """One scenario record plus its analysis and effective configuration."""

    config: ScenarioConfig
    counts: CountSeries
    pd_intensity: np.ndarray
    diagnostics: dict[str, np.ndarray]
    stats: VisibilityStats


def _ref_tuple(angle_deg):
    a = math.radians(angle_deg)
    return (complex(math.cos(a)), complex(math.sin(a)))


class _Engine:
    def __init__(self, cfg: ScenarioConfig):
        validate_config(cfg)
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.n_bins = round(cfg.duration_s / cfg.bin_s)
        self.steps_per_bin = round(cfg.bin_s / cfg.dt_fast_s)
        self.steps_per_seg = round(cfg.pol.period_s / cfg.dt_fast_s)
        self.segs_per_bin = round(cfg.bin_s / cfg.pol.period_s)
        self.dt = cfg.dt_fast_s
        self.seg_dt = cfg.pol.period_s

        refs = (_ref_tuple(cfg.pol.ref1_deg), _ref_tuple(cfg.pol.ref2_deg))
        self.refs = refs
        ref_arrays = (
            np.array(refs[0], dtype=complex),
            np.array(refs[1], dtype=complex),
        )
        lam_ref = cfg.plan.quantum_nm

        def fresh_ctrl():
            return PolControllerState(
                dither_rad=cfg.pol.dither_rad,
                step_gain=cfg.pol.step_gain,
                ref_states=ref_arrays,
                enabled=cfg.pol.enabled,
            )

        self.arm1 = _ArmRt(cfg.arm1, lam_ref, fresh_ctrl())
        self.arm2 = _ArmRt(cfg.arm2, lam_ref, fresh_ctrl())

        t1, t2 = self.arm1.transmission, self.arm2.transmission
        self.mid_q = cfg.source.mu_q * (t1 + t2) / 4.0
        self.amp0_q = 0.5 * cfg.source.mu_q * math.sqrt(t1 * t2) * cfg.v_path
        self.mid_lk = cfg.source.power_lock * (t1 + t2) / 4.0
        self.amp0_lk = 0.5 * cfg.source.power_lock * math.sqrt(t1 * t2) * cfg.v_path

        self.eta = cfg.detector.efficiency
        self.p_floor = cfg.detector.p_dark + cfg.detector.p_bg
        self.n_gates_bin = round(cfg.detector.gate_rate_hz * cfg.bin_s)

        self.lock = PhaseLockState(
            kp=cfg.lock.kp, ki_per_s=cfg.lock.ki_per_s, enabled=cfg.lock.enabled
        )
        g = cfg.stretcher.gain_rad_per_unit
        self.g = g
        self.max_step = cfg.stretcher.slew_rad_per_s * self.dt / abs(g)
        self.climit = 0.5 * cfg.stretcher.stroke_rad / abs(g)
        self.sc = 0.0
        self.sc_clamped = False

        self.unl_phase = 0.0
        self.pol_stepping = cfg.pol.enabled
        # With frozen plates and frozen fibre the per-segment overlaps never
        # change, so they are computed once and reused.
        self.static_pol = (
            self.arm1.sigma == 0.0
            and self.arm2.sigma == 0.0
            and not (cfg.pol.enabled and not cfg.pol.freeze_after_warmup)
        )
        self.seg_cache = None

    # -- warmup ---------------------------------------------------------

    def warmup(self):
        cfg = self.cfg
        if cfg.init_random_pol:
            for arm in (self.arm1, self.arm2):
                q = self.rng.standard_normal(4)
                n = np.linalg.norm(q)
                while n < 1e-12:
                    q = self.rng.standard_normal(4)
                    n = np.linalg.norm(q)
                w, x, y, z = q / n
                angle = 2.0 * math.acos(min(1.0, max(-1.0, w)))
                s = math.sin(0.5 * angle)
                if s > 1e-12:
                    arm.axis = (x / s, y / s, z / s)
                    arm.alpha = angle
        if cfg.pol.enabled:
            for _ in range(cfg.pol.warmup_steps):
                for arm in (self.arm1, self.arm2):
                    pol_control_step(arm.ctrl, self._make_source(arm))
                    arm.refresh_stack()
            if cfg.pol.freeze_after_warmup:
                self.arm1.ctrl.enabled = False
                self.arm2.ctrl.enabled = False
                self.pol_stepping = False
        if cfg.lock.enabled:
            self._calibrate_lock()

    def _make_source(self, arm):
        u1 = arm.unitary_at(self.cfg.plan.pilot1_nm)
        u2 = arm.unitary_at(self.cfg.plan.pilot2_nm)
        r1, r2 = self.refs
        v1 = _mv(u1, r1)
        v2 = _mv(u2, r2)
        trigs = arm.trigs

        def source(deltas):
            c = _stack(trigs, deltas)
            w1 = _mv(c, v1)
            w2 = _mv(c, v2)
            a1 = r1[0].conjugate() * w1[0] + r1[1].conjugate() * w1[1]
            a2 = r2[0].conjugate() * w2[0] + r2[1].conjugate() * w2[1]
            return (
                a1.real * a1.real + a1.imag * a1.imag,
                a2.real * a2.real + a2.imag * a2.imag,
            )

        return source

    def _channel_params(self, wavelength_nm, amp0):
        """Fringe (amplitude, phase) of one channel from current arm states."""
        u1 = self.arm1.unitary_at(wavelength_nm)
        u2 = self.arm2.unitary_at(wavelength_nm)
        # Launch is horizontal, so only the first matrix column matters.
        j1 = _mv(self.arm1.stack, (u1[0], u1[2]))
        j2 = _mv(self.arm2.stack, (u2[0], u2[2]))
        c = j1[0].conjugate() * j2[0] + j1[1].conjugate() * j2[1]
        mag = abs(c)
        return amp0 * mag, math.atan2(c.imag, c.real), mag

    def _calibrate_lock(self):
        cfg = self.cfg
        pts = cfg.lock.calibration_points
        amp_lk, gamma_lk, _ = self._channel_params(cfg.plan.lock_nm, self.amp0_lk)
        sweep = np.linspace(-2.5 * math.pi, 2.5 * math.pi, pts)
        phase0 = gamma_lk + cfg.delta0_lock_rad
        samples = self.mid_lk - amp_lk * np.sin(phase0 + sweep)
        if cfg.lock.pd_noise > 0:
            samples = samples + self.rng.normal(0.0, cfg.lock.pd_noise, pts)
        samples = np.maximum(samples, 0.0)
        i_max, i_min, setpoint = lock_calibration(samples)
        self.lock.i_max = i_max
        self.lock.i_min = i_min
        self.lock.setpoint = setpoint
        self.lock.command = 0.0
        self.lock.integrator = 0.0

    # -- main loop ------------------------------------------------------

    def _segment_arrays(self):
        """Advance fibre and controllers over one bin; per-segment channel data."""
        if self.static_pol and self.seg_cache is not None:
            return self.seg_cache
        cfg = self.cfg
        s_count = self.segs_per_bin
        rng = self.rng
        draws = {}
        for name, arm in (("a1", self.arm1), ("a2", self.arm2)):
            if arm.sigma > 0:
                draws[name] = (
                    rng.standard_normal((s_count, 3)),
                    rng.normal(0.0, arm.sigma * math.sqrt(self.seg_dt), s_count),
                )
        amp_q = np.empty(s_count)
        gam_q = np.empty(s_count)
        amp_lk = np.empty(s_count)
        gam_lk = np.empty(s_count)
        ov_q = np.empty(s_count)
        ov_lk = np.empty(s_count)
        fb1 = np.empty(s_count)
        fb2 = np.empty(s_count)
        lam_q = cfg.plan.quantum_nm
        lam_lk = cfg.plan.lock_nm
        for s in range(s_count):
            for name, arm in (("a1", self.arm1), ("a2", self.arm2)):
                if arm.sigma > 0:
                    axes, angles = draws[name]
                    arm.apply_walk_step(*axes[s], angles[s])
            if self.pol_stepping:
                for arm in (self.arm1, self.arm2):
                    pol_control_step(arm.ctrl, self._make_source(arm))
                    arm.refresh_stack()
            amp_q[s], gam_q[s], ov_q[s] = self._channel_params(lam_q, self.amp0_q)
            amp_lk[s], gam_lk[s], ov_lk[s] = self._channel_params(lam_lk, self.amp0_lk)
            p1, p2 = self._make_source(self.arm1)(self.arm1.ctrl.retardances_rad)
            fb1[s] = 0.5 * (p1 + p2)
            p1, p2 = self._make_source(self.arm2)(self.arm2.ctrl.retardances_rad)
            fb2[s] = 0.5 * (p1 + p2)
        arrays = {
            "amp_q": amp_q,
            "gam_q": gam_q,
            "amp_lk": amp_lk,
            "gam_lk": gam_lk,
            "ov_q": ov_q,
            "ov_lk": ov_lk,
            "fb1": fb1,
            "fb2": fb2,
        }
        if self.static_pol:
            self.seg_cache = arrays
        return arrays

    def _free_phase(self, t0):
        """Per-step difference of the two arms' drifting phase over one bin."""
        n = self.steps_per_bin
        rng = self.rng
        t = t0 + self.dt * np.arange(1, n + 1)
        phi = np.zeros(n)
        for arm, sign in ((self.arm1, -1.0), (self.arm2, 1.0)):
            if arm.diffusion > 0:
                inc = rng.normal(
                    0.0, math.sqrt(2.0 * arm.diffusion * self.dt), n
                )
                walk = arm.walk + np.cumsum(inc)
                arm.walk = float(walk[-1])
            else:
                walk = arm.walk
            term = walk if np.ndim(walk) else np.full(n, walk)
            if arm.fast_amp > 0:
                term = term + arm.fast_amp * np.sin(arm.fast_w * t)
            phi += sign * term
        return phi

    def _unlocked_phase(self):
        n = self.steps_per_bin
        cfg = self.cfg.unlocked
        inc = np.full(n, cfg.ramp_rad_s * self.dt)
        if cfg.diffusion > 0:
            inc = inc + self.rng.normal(
                0.0, math.sqrt(2.0 * cfg.diffusion * self.dt), n
            )
        unl = self.unl_phase + np.cumsum(inc)
        self.unl_phase = float(unl[-1])
        return unl

    def _locked_offsets(self, lk_angle_nom, lk_amp_steps, pdn):
        """Sequential PI + stretcher pass; returns the offset used each step.

        Mirrors phase_lock_step, apply_stretcher and range_reset exactly
        (same operation order); tests compare both paths step for step.
        """
        lock = self.lock
        kp = lock.kp
        ki = lock.ki_per_s
        setp = lock.setpoint
        i_range = lock.i_max - lock.i_min
        cmd = lock.command
        integ = lock.integrator
        resets = lock.reset_count
        sc = self.sc
        clamped = False
        g = self.g
        dt = self.dt
        max_step = self.max_step
        climit = self.climit
        mid = self.mid_lk
        angles = lk_angle_nom.tolist()
        amps = lk_amp_steps.tolist()
        noise = pdn.tolist()
        off_arr = np.empty(len(angles))
        off = g * sc
        sin = math.sin
        for i, angle in enumerate(angles):
            off_arr[i] = off
            measured = mid - amps[i] * sin(angle + off) + noise[i]
            if measured < 0.0:
                measured = 0.0
            error = (measured - setp) / i_range
            cmd += -(kp * error + ki * integ)
            integ += error * dt
            step = cmd - sc
            if step > max_step:
                step = max_step
            elif step < -max_step:
                step = -max_step
            sc += step
            clamped = False
            if sc > climit:
                sc = climit
                clamped = True
            elif sc < -climit:
                sc = -climit
                clamped = True
            if clamped:
                n_wrap = round(cmd * g / TWO_PI)
                cmd -= n_wrap * TWO_PI / g
                integ = 0.0
                resets += 1
            off = g * sc
        lock.command = cmd
        lock.integrator = integ
        lock.reset_count = resets
        self.sc = sc
        self.sc_clamped = clamped
        return off_arr

    def run(self):
        cfg = self.cfg
        self.warmup()
        n_bins = self.n_bins
        n = self.steps_per_bin
        rep = self.steps_per_seg
        raw = np.empty(n_bins, dtype=np.int64)
        pd_mean = np.empty(n_bins)
        diag = {
            name: np.empty(n_bins)
            for name in (
                "overlap_q",
                "overlap_lock",
                "fb_arm1",
                "fb_arm2",
                "phase_q_rad",
                "phase_lock_rad",
                "quad_rms",
                "stretcher_rad",
                "unlocked_rad",
                "resets",
                "expected_counts",
            )
        }
        d0q = cfg.delta0_q_rad
        d0lk = cfg.delta0_lock_rad
        for b in range(n_bins):
            t0 = b * cfg.bin_s
            seg = self._segment_arrays()
            lk_amp_steps = np.repeat(seg["amp_lk"], rep)
            lk_gam_steps = np.repeat(seg["gam_lk"], rep)
            q_amp_steps = np.repeat(seg["amp_q"], rep)
            q_gam_steps = np.repeat(seg["gam_q"], rep)
            phi = self._free_phase(t0)
            unl = self._unlocked_phase()
            pdn = (
                self.rng.normal(0.0, cfg.lock.pd_noise, n)
                if cfg.lock.pd_noise > 0
                else np.zeros(n)
            )
            lk_angle = phi + lk_gam_steps + d0lk
            if self.lock.enabled:
                off = self._locked_offsets(lk_angle, lk_amp_steps, pdn)
            else:
                off = np.full(n, self.g * self.sc)
            lk_sin = np.sin(lk_angle + off)
            intensity = np.maximum(self.mid_lk - lk_amp_steps * lk_sin + pdn, 0.0)
            mu = self.mid_q - q_amp_steps * np.sin(phi + off + unl + q_gam_steps + d0q)
            p = np.clip(1.0 - np.exp(-mu * self.eta) + self.p_floor, 0.0, 1.0)
            p_bin = float(p.mean())
            raw[b] = self.rng.binomial(self.n_gates_bin, p_bin)
            diag["expected_counts"][b] = self.n_gates_bin * p_bin
            pd_mean[b] = float(intensity.mean())
            diag["overlap_q"][b] = float(seg["ov_q"].mean())
            diag["overlap_lock"][b] = float(seg["ov_lk"].mean())
            diag["fb_arm1"][b] = float(seg["fb1"].mean())
            diag["fb_arm2"][b] = float(seg["fb2"].mean())
            diag["phase_q_rad"][b] = _wrap(float(phi[-1] + off[-1] + unl[-1] + q_gam_steps[-1] + d0q))
            diag["phase_lock_rad"][b] = _wrap(float(lk_angle[-1] + off[-1]))
            diag["quad_rms"][b] = float(np.sqrt(np.mean(lk_sin**2)))
            diag["stretcher_rad"][b] = float(off[-1])
            diag["unlocked_rad"][b] = self.unl_phase
            diag["resets"][b] = self.lock.reset_count
        expected_dark = cfg.detector.gate_rate_hz * cfg.bin_s * cfg.detector.p_dark
        counts = CountSeries(
            bin_s=cfg.bin_s, raw=raw, net=raw.astype(float) - expected_dark
        )
        stats = analyze_counts(counts, cfg.analysis.window_s, cfg.analysis.hist_bin)
        return RunResult(
            config=cfg,
            counts=counts,
            pd_intensity=pd_mean,
            diagnostics=diag,
            stats=stats,
        )


def run_scenario(cfg: ScenarioConfig) -> RunResult:
    """Simulate one record with the given configuration and analyse it."""
    return _Engine(cfg).run()


def _write_csv(path: Path, header: str, columns, fmt) -> None:
    rows = zip(*columns)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f(v) for f, v in zip(fmt, row)) + "\n")


def _f(value) -> str:
    return f"{value:.10g}"


def write_outputs(result: RunResult, out_dir) -> list[Path]:
    """Write the run record as CSV files plus a reloadable manifest.

    Produces counts.csv, pd.csv, visibility.csv, histogram.csv,
    diagnostics.csv and manifest.cfg inside `out_dir` (created if needed).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    times = result.counts.times_s()
    stats = result.stats
    written = []

    path = out / "counts.csv"
    _write_csv(
        path,
        "time_s,raw,net",
        (times, result.counts.raw, result.counts.net),
        (_f, str, _f),
    )
    written.append(path)

    path = out / "pd.csv"
    _write_csv(path, "time_s,intensity", (times, result.pd_intensity), (_f, _f))
    written.append(path)

    path = out / "visibility.csv"
    _write_csv(
        path,
        "time_s,visibility,valid",
        (times, stats.visibility, stats.valid.astype(int)),
        (_f, _f, str),
    )
    written.append(path)

    path = out / "histogram.csv"
    _write_csv(
        path,
        "bin_lo,bin_hi,count",
        (stats.hist_edges[:-1], stats.hist_edges[1:], stats.hist_counts),
        (_f, _f, str),
    )
    written.append(path)

    path = out / "diagnostics.csv"
    names = list(result.diagnostics)
    _write_csv(
        path,
        ",".join(["time_s"] + names),
        (times, *(result.diagnostics[k] for k in names)),
        tuple([_f] * (1 + len(names))),
    )
    written.append(path)

    path = out / "manifest.cfg"
    meta = {
        "mean_visibility": _f(stats.mean) if not math.isnan(stats.mean) else "nan",
        "std_visibility": _f(stats.std) if not math.isnan(stats.std) else "nan",
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_config(result.config, meta=meta))
    written.append(path)
    return written
