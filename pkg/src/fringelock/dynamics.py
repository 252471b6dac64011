"""Wavelength plan and the slow stochastic dynamics of the fibre arms.

Three processes live here: an isotropic rotational random walk of each arm's
birefringence on the Poincare sphere, a Wiener phase drift with an added
deterministic fast sinusoid, and the slow quasi-linear phase ramp used for
deliberately unlocked stretches.  All randomness flows through a caller-owned
numpy Generator so runs are reproducible draw for draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .jones import random_unitary_step, su2_axis_angle, su2_rotation

SPEED_OF_LIGHT_M_S = 299_792_458.0

# Widest offset (nm) from the plan edges at which the linearised dispersion
# of the birefringence is still trusted.
PLAN_MARGIN_NM = 5.0


@dataclass
class ChannelPlan:
    """DWDM wavelengths (nm) of the four co-propagating channels.

    Two classical pilots bracket the single-photon channel, and a fourth
    channel carries the classical fringe used by the phase lock.  Channels
    must be distinct and sit on a common frequency grid.
    """

    pilot1_nm: float = 1545.32
    quantum_nm: float = 1546.12
    pilot2_nm: float = 1546.92
    lock_nm: float = 1547.72
    grid_ghz: float = 100.0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        lams = self.wavelengths_nm()
        if any(l <= 0 for l in lams):
            raise ContractViolation("ChannelPlan: wavelengths must be positive")
        if len(set(lams)) != 4:
            raise ContractViolation("ChannelPlan: wavelengths must be distinct")
        if self.grid_ghz <= 0:
            raise ContractViolation("ChannelPlan: grid spacing must be positive")
        freqs = sorted(SPEED_OF_LIGHT_M_S / (l * 1e-9) / 1e9 for l in lams)
        for lo, hi in zip(freqs, freqs[1:]):
            gap = hi - lo
            multiple = round(gap / self.grid_ghz)
            if multiple < 1 or abs(gap - multiple * self.grid_ghz) > 0.02 * self.grid_ghz:
                raise ContractViolation(
                    f"ChannelPlan: channel gap {gap:.2f} GHz is not on a "
                    f"{self.grid_ghz:g} GHz grid"
                )

    def wavelengths_nm(self) -> list[float]:
        return [self.pilot1_nm, self.quantum_nm, self.pilot2_nm, self.lock_nm]

    def span_nm(self) -> tuple[float, float]:
        lams = self.wavelengths_nm()
        return min(lams) - PLAN_MARGIN_NM, max(lams) + PLAN_MARGIN_NM


@dataclass
class PhaseDriftState:
    """Accumulated slow optical phase of one arm plus its drift parameters.

    `value` integrates a Wiener process with diffusion `diffusion_rad2_s`;
    the deterministic term fast_amp_rad * sin(2 pi fast_freq_hz t) models
    acoustic pickup and is evaluated analytically at sample time.
    """

    diffusion_rad2_s: float = 0.0
    fast_amp_rad: float = 0.0
    fast_freq_hz: float = 0.0
    value: float = 0.0

    def __post_init__(self):
        if self.diffusion_rad2_s < 0:
            raise ContractViolation("PhaseDriftState: diffusion must be >= 0")
        if self.fast_amp_rad < 0 or self.fast_freq_hz < 0:
            raise ContractViolation("PhaseDriftState: fast term must be >= 0")


def advance_phase(
    state: PhaseDriftState, t_s: float, dt_s: float, rng: np.random.Generator
) -> float:
    """Advance the slow walk by dt_s and return the total phase at time t_s.

    The Wiener increment is N(0, sqrt(2 * diffusion * dt)); the fast sinusoid
    is added without touching the stored walk value.
    """
    if dt_s < 0:
        raise ContractViolation("advance_phase: dt_s must be >= 0")
    if dt_s > 0 and state.diffusion_rad2_s > 0:
        state.value += rng.normal(0.0, math.sqrt(2.0 * state.diffusion_rad2_s * dt_s))
    fast = 0.0
    if state.fast_amp_rad > 0:
        fast = state.fast_amp_rad * math.sin(2.0 * math.pi * state.fast_freq_hz * t_s)
    return state.value + fast


@dataclass
class UnlockedSegmentState:
    """Residual phase on one channel while its servo is deliberately off.

    Models a slow environmental ramp plus a small leftover random walk; used
    to emulate stretches of a run where the fringe is left to drift.
    """

    wavelength_nm: float
    ramp_rad_s: float = 0.0
    diffusion_rad2_s: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.diffusion_rad2_s < 0:
            raise ContractViolation("UnlockedSegmentState: diffusion must be >= 0")


def advance_unlocked(
    state: UnlockedSegmentState, dt_s: float, rng: np.random.Generator
) -> float:
    """Advance the residual phase by dt_s and return its new value."""
    if dt_s < 0:
        raise ContractViolation("advance_unlocked: dt_s must be >= 0")
    if dt_s > 0:
        state.phase += state.ramp_rad_s * dt_s
        if state.diffusion_rad2_s > 0:
            state.phase += rng.normal(
                0.0, math.sqrt(2.0 * state.diffusion_rad2_s * dt_s)
            )
    return state.phase


@dataclass
class ArmState:
    """One interferometer arm: static losses plus everything that moves.

    `birefringence` is the arm's det-1 Jones element at `lambda_ref_nm`; its
    wavelength dependence is a first-order rescaling of the rotation angle
    with slope `kappa_per_nm`.  `phase` holds the propagation phase most
    recently published by the running scenario (slow walk plus fast term).
    `controller` is the Jones element of the compensator appended after the
    fibre, when one is fitted.
    """

    length_km: float
    loss_db: float
    sigma_pol_rad_sqrt_s: float = 0.0
    kappa_per_nm: float = 0.0
    lambda_ref_nm: float = 1546.12
    lambda_min_nm: float = 1540.0
    lambda_max_nm: float = 1553.0
    birefringence: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))
    phase: float = 0.0
    stretcher_offset_rad: float = 0.0
    drift: PhaseDriftState = field(default_factory=PhaseDriftState)
    unlocked: UnlockedSegmentState | None = None
    controller: np.ndarray | None = None

    def __post_init__(self):
        if self.length_km <= 0:
            raise ContractViolation("ArmState: length must be positive")
        if self.loss_db < 0:
            raise ContractViolation("ArmState: loss must be >= 0 dB")
        if self.sigma_pol_rad_sqrt_s < 0:
            raise ContractViolation("ArmState: sigma_pol must be >= 0")
        if not (self.lambda_min_nm < self.lambda_max_nm):
            raise ContractViolation("ArmState: empty wavelength range")

    def transmission(self) -> float:
        """Linear power transmission of the arm."""
        return 10.0 ** (-self.loss_db / 10.0)


def advance_birefringence(
    arm: ArmState, dt_s: float, rng: np.random.Generator
) -> ArmState:
    """Left-multiply one random-walk step onto the arm's birefringence.

    The step angle scales as sigma_pol * sqrt(dt), so statistics depend on
    elapsed time, not on how finely it is sliced.  Returns the mutated arm.
    """
    if dt_s < 0:
        raise ContractViolation("advance_birefringence: dt_s must be >= 0")
    if dt_s > 0 and arm.sigma_pol_rad_sqrt_s > 0:
        step = random_unitary_step(rng, arm.sigma_pol_rad_sqrt_s * math.sqrt(dt_s))
        arm.birefringence = step @ arm.birefringence
    return arm


def arm_unitary_at(arm: ArmState, wavelength_nm: float) -> np.ndarray:
    """Arm birefringence evaluated at `wavelength_nm`.

    The rotation angle alpha of the stored element is rescaled to
    alpha * (1 + kappa_per_nm * (wavelength - lambda_ref)) about the same
    axis.  Wavelengths outside the arm's trusted range raise ValueError.
    """
    if not (arm.lambda_min_nm <= wavelength_nm <= arm.lambda_max_nm):
        raise ValueError(
            f"arm_unitary_at: {wavelength_nm:g} nm outside trusted range "
            f"[{arm.lambda_min_nm:g}, {arm.lambda_max_nm:g}] nm"
        )
    axis, angle = su2_axis_angle(arm.birefringence)
    if angle == 0.0:
        return arm.birefringence.copy()
    scale = 1.0 + arm.kappa_per_nm * (wavelength_nm - arm.lambda_ref_nm)
    return su2_rotation(axis, angle * scale)
