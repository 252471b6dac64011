"""Simulator of a long fibre Mach-Zehnder interferometer for single photons
with active polarisation and phase stabilisation."""

__version__ = "0.1.0"

from .errors import CalibrationError, ConfigError, ContractViolation
from .jones import (
    apply,
    haar_random_unitary,
    jones_vector,
    linear,
    make_retarder,
    overlap,
    random_unitary_step,
    su2_axis_angle,
    su2_rotation,
    to_stokes,
)
from .dynamics import (
    ArmState,
    ChannelPlan,
    PhaseDriftState,
    UnlockedSegmentState,
    advance_birefringence,
    advance_phase,
    advance_unlocked,
    arm_unitary_at,
)
from .interferometer import (
    ChannelField,
    Stretcher,
    apply_stretcher,
    combine_coupler,
    output_mean_photons,
    propagate,
    split_input,
)
from .detection import (
    CountSeries,
    SpcmConfig,
    gate_detection_prob,
    net_counts,
    pin_intensity,
    sample_counts,
)
from .control import (
    PhaseLockState,
    PolControllerState,
    lock_calibration,
    phase_lock_step,
    pol_control_step,
    pol_feedback_signals,
    range_reset,
)
from .analysis import (
    VisibilityStats,
    analyze_counts,
    compute_envelope,
    visibility_histogram,
    visibility_series,
)
from .config import ScenarioConfig, default_config, dump_config, load_config
from .scenario import RunResult, run_scenario, write_outputs

__all__ = [
    "CalibrationError",
    "ConfigError",
    "ContractViolation",
    "apply",
    "haar_random_unitary",
    "jones_vector",
    "linear",
    "make_retarder",
    "overlap",
    "random_unitary_step",
    "su2_axis_angle",
    "su2_rotation",
    "to_stokes",
    "ArmState",
    "ChannelPlan",
    "PhaseDriftState",
    "UnlockedSegmentState",
    "advance_birefringence",
    "advance_phase",
    "advance_unlocked",
    "arm_unitary_at",
    "ChannelField",
    "Stretcher",
    "apply_stretcher",
    "combine_coupler",
    "output_mean_photons",
    "propagate",
    "split_input",
    "CountSeries",
    "SpcmConfig",
    "gate_detection_prob",
    "net_counts",
    "pin_intensity",
    "sample_counts",
    "PhaseLockState",
    "PolControllerState",
    "lock_calibration",
    "phase_lock_step",
    "pol_control_step",
    "pol_feedback_signals",
    "range_reset",
    "VisibilityStats",
    "analyze_counts",
    "compute_envelope",
    "visibility_histogram",
    "visibility_series",
    "ScenarioConfig",
    "default_config",
    "dump_config",
    "load_config",
    "RunResult",
    "run_scenario",
    "write_outputs",
]
