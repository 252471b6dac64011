"""Controller unit behaviour on synthetic plants."""

import math

import numpy as np
import pytest

from fringelock import (
    CalibrationError,
    ContractViolation,
    PhaseLockState,
    PolControllerState,
    Stretcher,
    apply_stretcher,
    haar_random_unitary,
    lock_calibration,
    phase_lock_step,
    pol_control_step,
    pol_feedback_signals,
    range_reset,
)


def _source_for(ctrl, plant):
    """Feedback closure for a wavelength-flat plant."""

    def source(deltas):
        return pol_feedback_signals(ctrl, (plant, plant), deltas)

    return source


def test_feedback_signals_identity_plant():
    ctrl = PolControllerState()
    p1, p2 = pol_feedback_signals(ctrl, (np.eye(2), np.eye(2)))
    assert p1 == pytest.approx(1.0, abs=1e-12)
    assert p2 == pytest.approx(1.0, abs=1e-12)


def test_feedback_signals_crossed_plant():
    # A half-wave plate at 45 degrees swaps H and V: the H reference is
    # extinguished while the diagonal reference is unaffected.
    swap = np.array([[0.0, -1.0j], [-1.0j, 0.0]])
    ctrl = PolControllerState()
    p1, p2 = pol_feedback_signals(ctrl, (swap, swap))
    assert p1 == pytest.approx(0.0, abs=1e-12)
    assert p2 == pytest.approx(1.0, abs=1e-12)


def test_step_is_noop_when_disabled():
    ctrl = PolControllerState(enabled=False)
    before = list(ctrl.retardances_rad)
    pol_control_step(ctrl, _source_for(ctrl, np.eye(2)))
    assert ctrl.retardances_rad == before
    assert ctrl.coord == 0


def test_step_objective_never_decreases_on_static_plant():
    rng = np.random.default_rng(41)
    for _ in range(10):
        plant = haar_random_unitary(rng)
        ctrl = PolControllerState()
        source = _source_for(ctrl, plant)
        last = 0.5 * sum(source(ctrl.retardances_rad))
        for _ in range(400):
            pol_control_step(ctrl, source)
            now = 0.5 * sum(source(ctrl.retardances_rad))
            assert now >= last - 1e-12
            last = now


def test_step_converges_on_known_hard_plant():
    # Quarter-wave plate at an odd angle; both references are disturbed.
    from fringelock import make_retarder

    plant = make_retarder(0.4, math.pi / 2.0)
    ctrl = PolControllerState()
    source = _source_for(ctrl, plant)
    for _ in range(1200):
        pol_control_step(ctrl, source)
    p1, p2 = source(ctrl.retardances_rad)
    assert p1 > 0.99 and p2 > 0.99


def test_retardances_stay_in_one_period():
    rng = np.random.default_rng(42)
    ctrl = PolControllerState()
    source = _source_for(ctrl, haar_random_unitary(rng))
    for _ in range(500):
        pol_control_step(ctrl, source)
        assert all(0.0 <= d < 2.0 * math.pi for d in ctrl.retardances_rad)


def test_coordinate_round_robin():
    ctrl = PolControllerState()
    source = _source_for(ctrl, np.eye(2))
    seen = []
    for _ in range(8):
        seen.append(ctrl.coord)
        pol_control_step(ctrl, source)
    assert seen == [0, 1, 2, 3, 0, 1, 2, 3]


def test_zero_gain_leaves_settings_unchanged():
    ctrl = PolControllerState(step_gain=0.0)
    rng = np.random.default_rng(43)
    source = _source_for(ctrl, haar_random_unitary(rng))
    before = list(ctrl.retardances_rad)
    for _ in range(8):
        pol_control_step(ctrl, source)
    assert ctrl.retardances_rad == pytest.approx(before)


def test_controller_rejects_orthogonal_references():
    with pytest.raises(ContractViolation):
        PolControllerState(
            ref_states=(
                np.array([1.0, 0.0], dtype=complex),
                np.array([0.0, 1.0], dtype=complex),
            )
        )


def test_lock_calibration_recovers_fringe():
    # 401 points over two periods puts samples exactly on the extrema.
    phase = np.linspace(0.0, 4.0 * math.pi, 401)
    samples = 0.5 - 0.3 * np.sin(phase)
    i_max, i_min, setpoint = lock_calibration(samples)
    assert i_max == pytest.approx(0.8, abs=1e-6)
    assert i_min == pytest.approx(0.2, abs=1e-6)
    assert setpoint == pytest.approx(0.5, abs=1e-6)


def test_lock_calibration_rejects_flat_sweep():
    rng = np.random.default_rng(44)
    with pytest.raises(CalibrationError):
        lock_calibration(0.5 + rng.normal(0.0, 0.01, 400))


def test_lock_calibration_rejects_partial_fringe():
    phase = np.linspace(0.0, 0.6 * math.pi, 400)  # never crosses back
    with pytest.raises(CalibrationError):
        lock_calibration(0.5 - 0.3 * np.sin(phase))


def test_lock_calibration_rejects_short_input():
    with pytest.raises(CalibrationError):
        lock_calibration(np.zeros(5))


def _calibrated_lock(**kwargs):
    lock = PhaseLockState(**kwargs)
    lock.i_max = 0.8
    lock.i_min = 0.2
    lock.setpoint = 0.5
    return lock


def test_lock_step_requires_calibration_and_enable():
    with pytest.raises(ContractViolation):
        phase_lock_step(PhaseLockState(), 0.5, 1e-4)
    lock = _calibrated_lock(enabled=False)
    with pytest.raises(ContractViolation):
        phase_lock_step(lock, 0.5, 1e-4)


def test_lock_step_zero_error_fresh_state_holds_command():
    lock = _calibrated_lock()
    assert phase_lock_step(lock, 0.5, 1e-4) == 0.0
    assert lock.integrator == 0.0


def test_lock_closed_loop_converges_to_setpoint():
    # Plant: intensity = 0.5 - 0.3 sin(phase + offset); lock holds the
    # mid-fringe point against a static phase error.  The proportional
    # term deadbeats the error in a few steps; the residual left over
    # from the transient integral decays at Ki*dt/2 per step, so 0.2 s
    # of loop time is needed to settle below 1e-4.
    lock = _calibrated_lock(kp=2.0, ki_per_s=50.0)
    stretcher = Stretcher(gain_rad_per_unit=1.0, stroke_rad=1000.0,
                          slew_rad_per_s=1e5)
    phase_err = math.pi + 0.8
    dt = 1e-4
    off = 0.0
    for _ in range(2000):
        measured = 0.5 - 0.3 * math.sin(phase_err + off)
        cmd = phase_lock_step(lock, measured, dt)
        off = apply_stretcher(stretcher, cmd, dt)
    assert abs(math.sin(phase_err + off)) < 1e-4


def test_range_reset_jumps_whole_fringes_and_clears_integrator():
    lock = _calibrated_lock()
    lock.command = 2501.3
    lock.integrator = 0.4
    range_reset(lock, 1.0)
    assert abs(lock.command) <= math.pi + 1e-9
    assert (2501.3 - lock.command) / (2.0 * math.pi) == pytest.approx(
        round((2501.3 - lock.command) / (2.0 * math.pi)), abs=1e-9
    )
    assert lock.integrator == 0.0
    assert lock.reset_count == 1


def test_range_reset_scaled_gain():
    lock = _calibrated_lock()
    lock.command = 100.0
    range_reset(lock, 0.5)  # 2 pi of phase = 4 pi of command
    assert abs(lock.command * 0.5) <= math.pi + 1e-9
