"""Polarisation algebra: frozen cases and property loops."""

import math

import numpy as np
import pytest

from fringelock import (
    ContractViolation,
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

H = np.array([1.0, 0.0], dtype=complex)
D = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
R_CIRC = np.array([1.0, -1.0j], dtype=complex) / math.sqrt(2.0)


def test_half_wave_plate_at_zero():
    m = make_retarder(0.0, math.pi)
    expected = np.array([[-1.0j, 0.0], [0.0, 1.0j]])
    assert np.allclose(m, expected, atol=1e-15)


def test_half_wave_plate_at_45_flips_h_to_v():
    m = make_retarder(math.pi / 4.0, math.pi)
    out = apply(m, H)
    # Output is V up to a global phase.
    assert abs(out[0]) < 1e-15
    assert abs(abs(out[1]) - 1.0) < 1e-15


def test_zero_retardance_is_identity():
    for theta in (0.0, 0.3, -1.2, math.pi / 2):
        assert np.allclose(make_retarder(theta, 0.0), np.eye(2), atol=1e-15)


def test_retarder_unitary_det_one():
    rng = np.random.default_rng(11)
    for _ in range(500):
        theta = rng.uniform(-math.pi, math.pi)
        delta = rng.uniform(0.0, 2.0 * math.pi)
        m = make_retarder(theta, delta)
        assert np.abs(m @ m.conj().T - np.eye(2)).max() < 1e-14
        assert abs(np.linalg.det(m) - 1.0) < 1e-14


def test_apply_preserves_norm():
    rng = np.random.default_rng(12)
    for _ in range(200):
        m = haar_random_unitary(rng)
        v = jones_vector(*(rng.standard_normal(2) + 1j * rng.standard_normal(2)))
        assert abs(np.linalg.norm(apply(m, v)) - 1.0) < 1e-12


def test_overlap_requires_normalised_inputs():
    with pytest.raises(ContractViolation):
        overlap(np.array([1.0, 1.0]), H)
    with pytest.raises(ContractViolation):
        overlap(H, 1.001 * H)


def test_overlap_self_and_orthogonal():
    assert overlap(H, H) == pytest.approx(1.0, abs=1e-15)
    v = np.array([0.0, 1.0], dtype=complex)
    assert abs(overlap(H, v)) < 1e-15


def test_overlap_invariant_under_common_unitary():
    rng = np.random.default_rng(13)
    for _ in range(300):
        a = jones_vector(*(rng.standard_normal(2) + 1j * rng.standard_normal(2)))
        b = jones_vector(*(rng.standard_normal(2) + 1j * rng.standard_normal(2)))
        u = haar_random_unitary(rng)
        before = abs(overlap(a, b))
        after = abs(overlap(apply(u, a), apply(u, b)))
        assert after == pytest.approx(before, abs=1e-12)


def test_stokes_of_basis_states():
    assert np.allclose(to_stokes(H), [1.0, 0.0, 0.0], atol=1e-15)
    assert np.allclose(to_stokes(D), [0.0, 1.0, 0.0], atol=1e-15)
    assert np.allclose(to_stokes(R_CIRC), [0.0, 0.0, 1.0], atol=1e-15)


def test_stokes_unit_length():
    rng = np.random.default_rng(14)
    for _ in range(300):
        v = jones_vector(*(rng.standard_normal(2) + 1j * rng.standard_normal(2)))
        assert np.linalg.norm(to_stokes(v)) == pytest.approx(1.0, abs=1e-12)


def test_su2_axis_angle_round_trip():
    rng = np.random.default_rng(15)
    for _ in range(500):
        u = haar_random_unitary(rng)
        axis, angle = su2_axis_angle(u)
        assert 0.0 <= angle <= 2.0 * math.pi
        assert np.linalg.norm(axis) == pytest.approx(1.0, abs=1e-12)
        assert np.abs(su2_rotation(axis, angle) - u).max() < 1e-10


def test_su2_rotation_composes_on_fixed_axis():
    axis = np.array([1.0, 2.0, -0.5])
    axis /= np.linalg.norm(axis)
    a, b = 0.7, 1.9
    lhs = su2_rotation(axis, a) @ su2_rotation(axis, b)
    assert np.abs(lhs - su2_rotation(axis, a + b)).max() < 1e-12


def test_su2_rotation_moves_stokes_by_the_given_angle():
    # The rotation magnitude on the sphere equals the requested angle and the
    # axis component of the Stokes vector is untouched.
    rng = np.random.default_rng(16)
    for _ in range(100):
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(0.1, math.pi - 0.1)
        v = jones_vector(*(rng.standard_normal(2) + 1j * rng.standard_normal(2)))
        s0 = to_stokes(v)
        s1 = to_stokes(apply(su2_rotation(axis, angle), v))
        assert float(axis @ s1) == pytest.approx(float(axis @ s0), abs=1e-10)
        p0 = s0 - (axis @ s0) * axis
        p1 = s1 - (axis @ s1) * axis
        n0, n1 = np.linalg.norm(p0), np.linalg.norm(p1)
        if n0 < 1e-6:
            continue
        cos_rot = float(p0 @ p1) / (n0 * n1)
        assert math.acos(min(1.0, max(-1.0, cos_rot))) == pytest.approx(
            angle, abs=1e-6
        )


def test_random_step_zero_sigma_is_identity():
    rng = np.random.default_rng(17)
    assert np.array_equal(random_unitary_step(rng, 0.0), np.eye(2))


def test_random_step_mean_angle():
    # Half-normal step angle: E|N(0, sigma)| = sigma * sqrt(2/pi).
    rng = np.random.default_rng(18)
    sigma = 0.1
    angles = []
    for _ in range(20000):
        _, angle = su2_axis_angle(random_unitary_step(rng, sigma))
        angles.append(angle)
    expected = sigma * math.sqrt(2.0 / math.pi)  # 0.0797885 for sigma = 0.1
    assert np.mean(angles) == pytest.approx(expected, rel=0.05)


def test_random_step_negative_sigma_rejected():
    with pytest.raises(ContractViolation):
        random_unitary_step(np.random.default_rng(0), -0.1)


def test_jones_vector_normalises_and_rejects_zero():
    v = jones_vector(3.0, 4.0j)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ContractViolation):
        jones_vector(0.0, 0.0)


def test_linear_states():
    assert np.allclose(linear(0.0), H)
    assert np.allclose(linear(math.pi / 4.0), D)
