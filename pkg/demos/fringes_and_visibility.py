#!/usr/bin/env python3
"""Fringes on the output coupler and why visibility equals the overlap.

Two fields with the same power interfere with contrast |<j1|j2>|; polarisation
mismatch is exactly what eats the fringe.  The second half lets an arm's
birefringence random-walk and watches the visibility wander.

Run:
    python3 demos/fringes_and_visibility.py
"""

import math

import numpy as np

from fringelock import (
    ArmState,
    ChannelField,
    advance_birefringence,
    arm_unitary_at,
    combine_coupler,
    jones_vector,
    linear,
    output_mean_photons,
    overlap,
)


def sweep_visibility(j1, j2, power=1.0, n=4001):
    f1 = ChannelField(1546.12, j1, power, 0.0)
    out = np.empty(n)
    for i, phi in enumerate(np.linspace(0.0, 2.0 * math.pi, n)):
        f2 = ChannelField(1546.12, j2, power, float(phi))
        out[i] = combine_coupler(f1, f2)[0].power
    return (out.max() - out.min()) / (out.max() + out.min())


def matched_and_mismatched():
    print("== fringe contrast vs polarisation overlap ==")
    h = linear(0.0)
    for name, j2 in (
        ("matched", linear(0.0)),
        ("22.5 deg", linear(math.pi / 8.0)),
        ("45 deg", linear(math.pi / 4.0)),
        ("crossed", linear(math.pi / 2.0)),
    ):
        vis = sweep_visibility(h, j2)
        print(f"{name:>9s}: swept visibility = {vis:.4f}, "
              f"|overlap| = {abs(overlap(h, j2)):.4f}")


def closed_form_check():
    print("\n== closed-form port powers vs the coupler ==")
    rng = np.random.default_rng(3)
    j1 = jones_vector(*(rng.standard_normal(2) + 1j * rng.standard_normal(2)))
    j2 = jones_vector(*(rng.standard_normal(2) + 1j * rng.standard_normal(2)))
    f1 = ChannelField(1546.12, j1, 0.8, 0.3)
    f2 = ChannelField(1546.12, j2, 0.5, 1.7)
    o1, o2 = combine_coupler(f1, f2)
    print(f"port 1: coupler {o1.power:.10f}  closed form "
          f"{output_mean_photons(f1, f2, 1):.10f}")
    print(f"port 2: coupler {o2.power:.10f}  closed form "
          f"{output_mean_photons(f1, f2, 2):.10f}")


def drifting_arm():
    print("\n== visibility under birefringence drift (1 sample/s) ==")
    arm = ArmState(length_km=8.0, loss_db=3.0, sigma_pol_rad_sqrt_s=0.02)
    rng = np.random.default_rng(11)
    h = linear(0.0)
    for t in range(0, 301, 60):
        u = arm_unitary_at(arm, 1546.12)
        vis = abs(overlap(h, u @ h))
        print(f"t = {t:3d} s: |overlap| = {vis:.4f}")
        for _ in range(60):
            advance_birefringence(arm, 1.0, rng)


if __name__ == "__main__":
    matched_and_mismatched()
    closed_form_check()
    drifting_arm()
