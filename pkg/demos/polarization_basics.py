#!/usr/bin/env python3
"""Walk through the Jones/Stokes layer: retarders, the sphere, drift steps.

Run:
    python3 demos/polarization_basics.py
"""

import math

import numpy as np

from fringelock import (
    apply,
    jones_vector,
    linear,
    make_retarder,
    overlap,
    random_unitary_step,
    su2_axis_angle,
    su2_rotation,
    to_stokes,
)


def quarter_wave_tour():
    print("== quarter-wave plate at 45 degrees ==")
    h = linear(0.0)
    qwp = make_retarder(math.pi / 4.0, math.pi / 2.0)
    out = apply(qwp, h)
    print(f"H in : stokes = {np.round(to_stokes(h), 6)}")
    print(f"out  : stokes = {np.round(to_stokes(out), 6)}  (circular, s3 = +/-1)")
    hwp = make_retarder(math.pi / 8.0, math.pi)
    out = apply(hwp, h)
    print(f"half-wave at 22.5 deg sends H to 45 deg: "
          f"stokes = {np.round(to_stokes(out), 6)}")


def sphere_rotation():
    print("\n== sphere rotations ==")
    axis = np.array([0.0, 0.0, 1.0])
    v = linear(0.0)  # on the equator
    for angle_deg in (30, 90, 180):
        u = su2_rotation(axis, math.radians(angle_deg))
        s = to_stokes(apply(u, v))
        print(f"rotate H by {angle_deg:3d} deg about s3: "
              f"stokes = {np.round(s, 6)}")
    # the axis component never moves
    rng = np.random.default_rng(5)
    n = rng.standard_normal(3)
    n /= np.linalg.norm(n)
    v = jones_vector(*(rng.standard_normal(2) + 1j * rng.standard_normal(2)))
    before = float(n @ to_stokes(v))
    after = float(n @ to_stokes(apply(su2_rotation(n, 1.234), v)))
    print(f"component along a random axis: {before:+.6f} -> {after:+.6f}")


def drift_walk():
    print("\n== random-walk drift ==")
    rng = np.random.default_rng(7)
    u = np.eye(2, dtype=complex)
    h = linear(0.0)
    for k in range(1, 6):
        for _ in range(200):
            u = random_unitary_step(rng, 0.02) @ u
        axis, angle = su2_axis_angle(u)
        print(f"after {200 * k:4d} steps: accumulated angle = {angle:5.3f} rad, "
              f"|<H|U|H>|^2 = {abs(overlap(h, apply(u, h))) ** 2:.4f}")


if __name__ == "__main__":
    quarter_wave_tour()
    sphere_rotation()
    drift_walk()
