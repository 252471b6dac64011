"""Feedback: the four-plate polarisation controller and the fringe phase lock.

Both controllers are written against abstract signal callables rather than
the physics modules, so the same code drives the full scenario engine, unit
tests with synthetic plants, and hardware-style step-response checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CalibrationError, ContractViolation
from .jones import make_retarder, require_normalized

TWO_PI = 2.0 * math.pi

# Deterministic large moves tried on the active plate when the gradient
# step failed to improve the objective (a stall or a local ridge).
ESCAPE_PROBES_RAD = (0.5 * math.pi, math.pi, -0.5 * math.pi)


@dataclass
class PolControllerState:
    """Endless four-plate polarisation controller with fixed plate axes.

    The controller maximises the mean analyser transmission of two reference
    polarisations sent down the arm on the pilot channels.  One call to
    :func:`pol_control_step` dithers a single plate (round robin) and applies
    a safeguarded gradient move, so four calls revisit every plate once.
    """

    axes_rad: tuple[float, float, float, float] = (0.0, 0.25 * math.pi, 0.0, 0.25 * math.pi)
    retardances_rad: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0, 0.0])
    dither_rad: float = 0.12
    step_gain: float = 0.6
    ref_states: tuple[np.ndarray, np.ndarray] = field(
        default_factory=lambda: (
            np.array([1.0, 0.0], dtype=complex),
            np.array([math.sqrt(0.5), math.sqrt(0.5)], dtype=complex),
        )
    )
    coord: int = 0
    enabled: bool = True

    def __post_init__(self):
        if len(self.axes_rad) != 4 or len(self.retardances_rad) != 4:
            raise ContractViolation("PolControllerState: exactly four plates")
        if self.dither_rad <= 0 or self.step_gain < 0:
            raise ContractViolation("PolControllerState: bad dither or gain")
        a, b = self.ref_states
        a = require_normalized(a, "PolControllerState.ref_states[0]")
        b = require_normalized(b, "PolControllerState.ref_states[1]")
        c = abs(np.vdot(a, b))
        if c < 1e-6 or c > 1.0 - 1e-6:
            raise ContractViolation(
                "PolControllerState: reference states must be distinct and "
                "non-orthogonal"
            )
        self.ref_states = (a, b)

    def stack_matrix(self, retardances_rad=None) -> np.ndarray:
        """Jones element of the plate stack (last plate applied last)."""
        deltas = self.retardances_rad if retardances_rad is None else retardances_rad
        m = np.eye(2, dtype=complex)
        for axis, delta in zip(self.axes_rad, deltas):
            m = make_retarder(axis, delta) @ m
        return m


def pol_feedback_signals(
    ctrl: PolControllerState,
    plant_unitaries: tuple[np.ndarray, np.ndarray],
    retardances_rad=None,
) -> tuple[float, float]:
    """Analyser transmissions of the two pilot references through plant + stack.

    Each reference state passes its own plant unitary, then the controller
    stack, then an analyser matched to the undisturbed reference.
    """
    stack = ctrl.stack_matrix(retardances_rad)
    out = []
    for ref, plant in zip(ctrl.ref_states, plant_unitaries):
        state = stack @ (np.asarray(plant, dtype=complex) @ ref)
        out.append(float(abs(np.vdot(ref, state)) ** 2))
    return out[0], out[1]


def _objective(signals: tuple[float, float]) -> float:
    return 0.5 * (signals[0] + signals[1])


def pol_control_step(ctrl: PolControllerState, signal_source) -> PolControllerState:
    """One safeguarded dither step on the active plate.

    `signal_source(retardances) -> (p1, p2)` evaluates the feedback powers
    for a trial plate setting.  The move is kept only if it does not lower
    the objective; on failure a few fixed large offsets are probed instead,
    which unsticks the controller from ridges without any randomness.
    Disabled controllers return unchanged.
    """
    if not ctrl.enabled:
        return ctrl
    k = ctrl.coord
    base = list(ctrl.retardances_rad)
    j0 = _objective(signal_source(base))

    probe = base.copy()
    probe[k] = base[k] + ctrl.dither_rad
    j_up = _objective(signal_source(probe))
    probe[k] = base[k] - ctrl.dither_rad
    j_dn = _objective(signal_source(probe))
    grad = (j_up - j_dn) / (2.0 * ctrl.dither_rad)

    candidate = base.copy()
    candidate[k] = base[k] + ctrl.step_gain * grad
    j_cand = _objective(signal_source(candidate))

    if j_cand >= j0:
        accepted = candidate
    else:
        accepted, j_best = base, j0
        for offset in ESCAPE_PROBES_RAD:
            probe = base.copy()
            probe[k] = base[k] + offset
            j_probe = _objective(signal_source(probe))
            if j_probe > j_best:
                accepted, j_best = probe.copy(), j_probe
    accepted[k] = accepted[k] % TWO_PI
    ctrl.retardances_rad = accepted
    ctrl.coord = (k + 1) % 4
    return ctrl


@dataclass
class PhaseLockState:
    """Side-of-fringe PI lock driving the fibre stretcher in velocity form.

    The error is the monitor intensity's distance from the setpoint,
    normalised by the calibrated fringe swing, so loop gains are dimensionless
    and independent of optical power.  `command` is in stretcher drive units.
    """

    kp: float = 2.0
    ki_per_s: float = 50.0
    command: float = 0.0
    integrator: float = 0.0
    setpoint: float | None = None
    i_max: float | None = None
    i_min: float | None = None
    reset_count: int = 0
    enabled: bool = True

    def __post_init__(self):
        if self.kp < 0 or self.ki_per_s < 0:
            raise ContractViolation("PhaseLockState: gains must be >= 0")

    @property
    def calibrated(self) -> bool:
        return (
            self.setpoint is not None
            and self.i_max is not None
            and self.i_min is not None
            and self.i_max > self.i_min
        )


def lock_calibration(samples: np.ndarray) -> tuple[float, float, float]:
    """Extract (i_max, i_min, setpoint) from a calibration fringe sweep.

    `samples` is the monitor intensity recorded while the stretcher sweeps
    more than one full fringe.  The sweep is rejected (CalibrationError) if
    the swing is within the noise floor or the trace does not actually cross
    the fringe, judged by hysteresis transitions through the mid line.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or len(samples) < 16:
        raise CalibrationError("calibration sweep too short")
    i_max = float(samples.max())
    i_min = float(samples.min())
    swing = i_max - i_min
    noise = float(np.std(np.diff(samples))) / math.sqrt(2.0)
    # Pure noise over ~1e3 samples spans about 7 sigma peak to peak, so the
    # swing must clear that by a margin before it counts as a fringe.
    if swing <= 12.0 * noise:
        raise CalibrationError("fringe swing indistinguishable from noise")
    mid = 0.5 * (i_max + i_min)
    band = 0.15 * swing
    state = 0
    transitions = 0
    for value in samples:
        if value > mid + band:
            if state == -1:
                transitions += 1
            state = 1
        elif value < mid - band:
            if state == 1:
                transitions += 1
            state = -1
    if transitions < 2:
        raise CalibrationError("sweep does not cross a full fringe")
    return i_max, i_min, mid


def phase_lock_step(lock: PhaseLockState, measured: float, dt_s: float) -> float:
    """One PI update from a monitor sample; returns the new drive command.

    The proportional term acts on the current error, the integral term on the
    error history, both pushing the command so the intensity returns to the
    setpoint.  Requires a calibrated, enabled lock.
    """
    if not lock.enabled:
        raise ContractViolation("phase_lock_step: lock is disabled")
    if not lock.calibrated:
        raise ContractViolation("phase_lock_step: lock is not calibrated")
    if dt_s <= 0:
        raise ContractViolation("phase_lock_step: dt_s must be positive")
    error = (measured - lock.setpoint) / (lock.i_max - lock.i_min)
    lock.command += -(lock.kp * error + lock.ki_per_s * lock.integrator)
    lock.integrator += error * dt_s
    return lock.command


def range_reset(lock: PhaseLockState, gain_rad_per_unit: float) -> PhaseLockState:
    """Recentre a railed stretcher by the nearest whole number of fringes.

    Jumping the command by a multiple of 2 pi worth of phase leaves the
    interference unchanged, so the lock re-acquires immediately.  The
    integrator is cleared because its history belongs to the old rail.
    """
    if gain_rad_per_unit == 0:
        raise ContractViolation("range_reset: gain must be nonzero")
    n = round(lock.command * gain_rad_per_unit / TWO_PI)
    lock.command -= n * TWO_PI / gain_rad_per_unit
    lock.integrator = 0.0
    lock.reset_count += 1
    return lock
