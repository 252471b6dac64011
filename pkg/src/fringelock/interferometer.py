"""Field bookkeeping through the two-arm interferometer.

A ChannelField carries one DWDM channel: its polarisation state, a mean
photon number (or classical power in the same units) and a scalar propagation
phase.  The couplers follow the symmetric convention

    out1 = (in1 + i in2) / sqrt(2),   out2 = (i in1 + in2) / sqrt(2),

i.e. the cross port picks up pi/2.  Energy is conserved exactly by both
couplers and checked in tests rather than at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractViolation
from .dynamics import ArmState, arm_unitary_at
from .jones import require_normalized

WAVELENGTH_MATCH_NM = 0.01


@dataclass
class ChannelField:
    """One channel at one point in the optical path.

    `power` is the mean photon number per detection gate for the quantum
    channel and an arbitrary linear power unit for classical ones; the two
    never mix.  `jones` must stay normalised: amplitude scaling lives in
    `power`, overall phase in `phase`.
    """

    wavelength_nm: float
    jones: np.ndarray
    power: float
    phase: float = 0.0

    def __post_init__(self):
        if self.wavelength_nm <= 0:
            raise ContractViolation("ChannelField: wavelength must be positive")
        if not (self.power >= 0.0 and math.isfinite(self.power)):
            raise ContractViolation("ChannelField: power must be finite and >= 0")
        self.jones = require_normalized(self.jones, "ChannelField.jones")


def split_input(field: ChannelField) -> tuple[ChannelField, ChannelField]:
    """Split a field on the input coupler; the cross output leads by pi/2."""
    half = replace(field, power=field.power / 2.0, jones=field.jones.copy())
    cross = replace(
        field, power=field.power / 2.0, phase=field.phase + math.pi / 2.0,
        jones=field.jones.copy(),
    )
    return half, cross


def propagate(field: ChannelField, arm: ArmState) -> ChannelField:
    """Transport a field through one arm at its own wavelength.

    Applies the arm's birefringence (and compensator, if fitted), attenuates
    by the arm loss and adds the arm's current phase, stretcher offset and,
    for the matching channel, any unlocked residual phase.
    """
    u = arm_unitary_at(arm, field.wavelength_nm)
    jones = u @ field.jones
    if arm.controller is not None:
        jones = arm.controller @ jones
    phase = field.phase + arm.phase + arm.stretcher_offset_rad
    if (
        arm.unlocked is not None
        and abs(arm.unlocked.wavelength_nm - field.wavelength_nm) < WAVELENGTH_MATCH_NM
    ):
        phase += arm.unlocked.phase
    return ChannelField(
        wavelength_nm=field.wavelength_nm,
        jones=jones,
        power=field.power * arm.transmission(),
        phase=phase,
    )


def _amplitudes(field: ChannelField) -> np.ndarray:
    return math.sqrt(field.power) * np.exp(1j * field.phase) * field.jones


def _from_amplitude(wavelength_nm: float, e: np.ndarray) -> ChannelField:
    power = float(np.vdot(e, e).real)
    if power < 1e-300:
        # Dark port; polarisation is undefined, report H with zero power.
        return ChannelField(wavelength_nm, np.array([1.0, 0.0], dtype=complex), 0.0)
    return ChannelField(wavelength_nm, e / math.sqrt(power), power)


def combine_coupler(
    in1: ChannelField, in2: ChannelField
) -> tuple[ChannelField, ChannelField]:
    """Recombine the two arms on the output coupler.

    Inputs must be the same channel.  Output phases are folded into the Jones
    amplitudes, so the returned fields carry phase 0.
    """
    if abs(in1.wavelength_nm - in2.wavelength_nm) > WAVELENGTH_MATCH_NM:
        raise ValueError("combine_coupler: inputs are different channels")
    e1 = _amplitudes(in1)
    e2 = _amplitudes(in2)
    inv = 1.0 / math.sqrt(2.0)
    out1 = (e1 + 1j * e2) * inv
    out2 = (1j * e1 + e2) * inv
    return (
        _from_amplitude(in1.wavelength_nm, out1),
        _from_amplitude(in1.wavelength_nm, out2),
    )


def output_mean_photons(in1: ChannelField, in2: ChannelField, port: int) -> float:
    """Mean photon number at one output port, in closed form.

    With overlap c = <j1|j2> and phase difference dphi = phase2 - phase1:

        port 1:  (P1 + P2)/2 - sqrt(P1 P2) |c| sin(dphi + arg c)
        port 2:  (P1 + P2)/2 + sqrt(P1 P2) |c| sin(dphi + arg c)

    Matches the power of :func:`combine_coupler` outputs to rounding error.
    """
    if port not in (1, 2):
        raise ValueError("output_mean_photons: port must be 1 or 2")
    if abs(in1.wavelength_nm - in2.wavelength_nm) > WAVELENGTH_MATCH_NM:
        raise ValueError("output_mean_photons: inputs are different channels")
    c = complex(np.vdot(in1.jones, in2.jones))
    mid = 0.5 * (in1.power + in2.power)
    amp = math.sqrt(in1.power * in2.power) * abs(c)
    arg = in2.phase - in1.phase + math.atan2(c.imag, c.real)
    sign = -1.0 if port == 1 else 1.0
    return mid + sign * amp * math.sin(arg)


@dataclass
class Stretcher:
    """Fibre stretcher: a rate- and range-limited phase actuator.

    `command` is in drive units; the produced phase offset is
    gain_rad_per_unit * command, clamped to +-stroke_rad/2.  Requests beyond
    the slew rate or the stroke are clamped in-contract and the stroke clamp
    latches `out_of_range` for the caller to act on.
    """

    gain_rad_per_unit: float = 1.0
    stroke_rad: float = 5000.0
    slew_rad_per_s: float = 1.0e5
    command: float = 0.0
    out_of_range: bool = False

    def __post_init__(self):
        if self.gain_rad_per_unit == 0.0:
            raise ContractViolation("Stretcher: gain must be nonzero")
        if self.stroke_rad <= 0 or self.slew_rad_per_s <= 0:
            raise ContractViolation("Stretcher: stroke and slew must be positive")


def apply_stretcher(s: Stretcher, command: float, dt_s: float) -> float:
    """Drive the stretcher toward `command` for dt_s; return the phase offset.

    The command moves at most slew_rad_per_s * dt_s worth of phase in one call
    and is clamped to the stroke, setting `out_of_range` when that happens.
    """
    if dt_s <= 0:
        raise ContractViolation("apply_stretcher: dt_s must be positive")
    max_step = s.slew_rad_per_s * dt_s / abs(s.gain_rad_per_unit)
    step = command - s.command
    if step > max_step:
        step = max_step
    elif step < -max_step:
        step = -max_step
    new_command = s.command + step
    limit = 0.5 * s.stroke_rad / abs(s.gain_rad_per_unit)
    if new_command > limit:
        new_command = limit
        s.out_of_range = True
    elif new_command < -limit:
        new_command = -limit
        s.out_of_range = True
    else:
        s.out_of_range = False
    s.command = new_command
    return s.gain_rad_per_unit * s.command
