#!/usr/bin/env python3
"""Side-of-fringe lock: calibrate, acquire, survive a step, ride a ramp.

The plant is the usual monitor fringe I = mid - amp*sin(phase + offset) plus
photodiode noise.  The stretcher has a finite stroke, so a long one-way drift
eventually rails it and the lock recentres by a whole number of fringes.

Run:
    python3 demos/phase_lock_demo.py
"""

import math

import numpy as np

from fringelock import (
    PhaseLockState,
    Stretcher,
    apply_stretcher,
    lock_calibration,
    phase_lock_step,
    range_reset,
)

MID, AMP, NOISE = 0.5, 0.3, 0.002
DT = 1e-4


def monitor(phase, rng):
    return max(0.0, MID - AMP * math.sin(phase) + rng.normal(0.0, NOISE))


def calibrate(lock, rng):
    sweep = np.linspace(-2.5 * math.pi, 2.5 * math.pi, 600)
    samples = np.array([monitor(s, rng) for s in sweep])
    lock.i_max, lock.i_min, lock.setpoint = lock_calibration(samples)
    print(f"calibrated: i_max = {lock.i_max:.3f}, i_min = {lock.i_min:.3f}, "
          f"setpoint = {lock.setpoint:.3f}")


def residual(phase):
    # distance from the stable point at pi
    return (phase % (2.0 * math.pi)) - math.pi


def main():
    rng = np.random.default_rng(17)
    lock = PhaseLockState(kp=2.0, ki_per_s=50.0)
    stretcher = Stretcher(gain_rad_per_unit=1.0, stroke_rad=5000.0,
                          slew_rad_per_s=1e5)
    calibrate(lock, rng)

    print("\n== acquisition from 0.8 rad off the lock point ==")
    phase_err = math.pi + 0.8
    off = 0.0
    for step in range(2000):
        off = apply_stretcher(
            stretcher, phase_lock_step(lock, monitor(phase_err + off, rng), DT), DT
        )
        if step in (0, 1, 4, 19, 199, 1999):
            print(f"t = {1e3 * DT * (step + 1):7.1f} ms: "
                  f"residual = {residual(phase_err + off):+.4f} rad")

    print("\n== 0.5 rad disturbance step ==")
    phase_err += 0.5
    for step in range(500):
        off = apply_stretcher(
            stretcher, phase_lock_step(lock, monitor(phase_err + off, rng), DT), DT
        )
        if step in (0, 4, 49, 499):
            print(f"t = {1e3 * DT * (step + 1):5.1f} ms: "
                  f"residual = {residual(phase_err + off):+.4f} rad")

    print("\n== one-way ramp railing a short-stroke stretcher ==")
    short = Stretcher(gain_rad_per_unit=1.0, stroke_rad=200.0,
                      slew_rad_per_s=1e5)
    lock.command = lock.integrator = 0.0
    phase_err = math.pi
    off = 0.0
    for step in range(300_000):
        phase_err += 20.0 * DT  # 20 rad/s one-way drift
        off = apply_stretcher(
            short, phase_lock_step(lock, monitor(phase_err + off, rng), DT), DT
        )
        if short.out_of_range:
            # jump back by whole fringes and let the lock re-acquire
            range_reset(lock, short.gain_rad_per_unit)
    print(f"after {300_000 * DT:.0f} s of 20 rad/s drift on a 200 rad stroke: "
          f"range resets = {lock.reset_count}, "
          f"residual = {residual(phase_err + off):+.4f} rad")


if __name__ == "__main__":
    main()
