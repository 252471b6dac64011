#!/usr/bin/env python3
"""Endless polarisation control on a scrambled fibre, one plate at a time.

A Haar-random unitary stands in for the fibre; the controller only sees the
two pilot transmissions and dithers its four plates round robin until both
are back near 1.  Run a handful of seeds to see typical convergence times.

Run:
    python3 demos/pol_controller_demo.py [--seeds N]
"""

import argparse

import numpy as np

from fringelock import (
    PolControllerState,
    haar_random_unitary,
    pol_control_step,
    pol_feedback_signals,
)


def converge(seed, max_steps=400):
    rng = np.random.default_rng(seed)
    plant = haar_random_unitary(rng)
    ctrl = PolControllerState()

    def source(deltas):
        return pol_feedback_signals(ctrl, (plant, plant), deltas)

    trace = [source(None)]
    for step in range(max_steps):
        pol_control_step(ctrl, source)
        p1, p2 = source(None)
        trace.append((p1, p2))
        if p1 >= 0.99 and p2 >= 0.99:
            return step + 1, trace
    return None, trace


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=8,
                        help="number of random fibres to try")
    args = parser.parse_args()

    steps_needed = []
    for seed in range(args.seeds):
        steps, trace = converge(seed)
        p1, p2 = trace[-1]
        if steps is None:
            print(f"seed {seed}: no convergence in {len(trace) - 1} steps "
                  f"(powers {p1:.3f}, {p2:.3f})")
        else:
            print(f"seed {seed}: both pilots >= 0.99 after {steps:3d} steps "
                  f"(start {trace[0][0]:.3f}/{trace[0][1]:.3f} -> "
                  f"{p1:.3f}/{p2:.3f})")
            steps_needed.append(steps)
    if steps_needed:
        print(f"\nmedian convergence: {int(np.median(steps_needed))} steps "
              f"({len(steps_needed)}/{args.seeds} converged)")


if __name__ == "__main__":
    main()
