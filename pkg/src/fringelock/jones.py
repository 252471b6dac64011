"""Jones calculus for fully polarised fields.

States are 2-vectors of complex amplitudes ``(ex, ey)`` in the laboratory
H/V basis, elements are 2x2 complex matrices.  Everything is plain numpy;
no wrapper classes.  The corresponding Poincare picture maps a unit state
to the Stokes 3-vector returned by :func:`to_stokes`, and any det-1 element
to a rotation of that sphere via :func:`su2_axis_angle`.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ContractViolation

NORM_TOL = 1e-6


def jones_vector(ex: complex, ey: complex) -> np.ndarray:
    """Normalised Jones state from two amplitudes.

    Raises ContractViolation if both amplitudes are zero.
    """
    v = np.array([ex, ey], dtype=complex)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ContractViolation("jones_vector: zero state")
    return v / n


def linear(angle_rad: float) -> np.ndarray:
    """Linear polarisation at `angle_rad` from horizontal."""
    return np.array([math.cos(angle_rad), math.sin(angle_rad)], dtype=complex)


def require_normalized(state: np.ndarray, where: str = "state") -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.shape != (2,):
        raise ContractViolation(f"{where}: expected a 2-vector, got shape {state.shape}")
    if abs(np.linalg.norm(state) - 1.0) > NORM_TOL:
        raise ContractViolation(f"{where}: not normalised (|norm - 1| > {NORM_TOL})")
    return state


def make_retarder(axis_angle_rad: float, retardance_rad: float) -> np.ndarray:
    """Linear retarder: fast axis at `axis_angle_rad`, phase delay `retardance_rad`.

    Equal to R(theta) @ diag(exp(-i d/2), exp(+i d/2)) @ R(-theta) with R a
    rotation of the field basis, written out in closed form.  Unitary with
    determinant 1 for any arguments.
    """
    c = math.cos(retardance_rad / 2.0)
    s = math.sin(retardance_rad / 2.0)
    c2 = math.cos(2.0 * axis_angle_rad)
    s2 = math.sin(2.0 * axis_angle_rad)
    return np.array(
        [
            [c - 1j * s * c2, -1j * s * s2],
            [-1j * s * s2, c + 1j * s * c2],
        ],
        dtype=complex,
    )


def apply(element: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Propagate `state` through `element` (matrix-vector product)."""
    element = np.asarray(element, dtype=complex)
    state = np.asarray(state, dtype=complex)
    if element.shape != (2, 2) or state.shape != (2,):
        raise ContractViolation("apply: expected a 2x2 element and a 2-vector")
    return element @ state


def overlap(a: np.ndarray, b: np.ndarray) -> complex:
    """Inner product <a|b>; both states must be normalised.

    |overlap|^2 is the transmission of `b` through an analyser set to `a`.
    """
    a = require_normalized(a, "overlap: first state")
    b = require_normalized(b, "overlap: second state")
    return complex(np.vdot(a, b))


def to_stokes(state: np.ndarray) -> np.ndarray:
    """Stokes 3-vector (s1, s2, s3) of a normalised state.

    s1 = |ex|^2 - |ey|^2, s2 = 2 Re(ex* ey), s3 = -2 Im(ex* ey), so
    (1, -i)/sqrt(2) maps to s3 = +1.  The result has unit length.
    """
    state = require_normalized(state, "to_stokes: state")
    ex, ey = state
    cross = np.conj(ex) * ey
    return np.array(
        [abs(ex) ** 2 - abs(ey) ** 2, 2.0 * cross.real, -2.0 * cross.imag]
    )


def su2_rotation(axis: np.ndarray, angle_rad: float) -> np.ndarray:
    """Det-1 unitary rotating the Poincare sphere by `angle_rad` about `axis`.

    `axis` is a unit 3-vector in the frame of :func:`to_stokes`.  The closed
    form is cos(a/2) I - i sin(a/2) (n . tau) for the Pauli triple matched to
    that frame.
    """
    axis = np.asarray(axis, dtype=float)
    if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > NORM_TOL:
        raise ContractViolation("su2_rotation: axis must be a unit 3-vector")
    n1, n2, n3 = axis
    c = math.cos(angle_rad / 2.0)
    s = math.sin(angle_rad / 2.0)
    return np.array(
        [
            [c - 1j * s * n1, s * (n3 - 1j * n2)],
            [s * (-n3 - 1j * n2), c + 1j * s * n1],
        ],
        dtype=complex,
    )


def su2_axis_angle(element: np.ndarray) -> tuple[np.ndarray, float]:
    """Axis and angle such that su2_rotation(axis, angle) rebuilds `element`.

    `element` must be unitary with determinant 1.  The angle is in [0, 2*pi];
    for the identity (angle 0) the axis is arbitrary and (1, 0, 0) is returned.
    """
    u = np.asarray(element, dtype=complex)
    if u.shape != (2, 2):
        raise ContractViolation("su2_axis_angle: expected a 2x2 element")
    if abs(np.linalg.det(u) - 1.0) > 1e-7:
        raise ContractViolation("su2_axis_angle: determinant is not 1")
    c = 0.5 * (u[0, 0] + u[1, 1]).real
    c = min(1.0, max(-1.0, c))
    angle = 2.0 * math.acos(c)
    s = math.sin(angle / 2.0)
    if abs(s) < 1e-12:
        return np.array([1.0, 0.0, 0.0]), 0.0
    n1 = -u[0, 0].imag / s
    n2 = -u[0, 1].imag / s
    n3 = u[0, 1].real / s
    axis = np.array([n1, n2, n3])
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        return np.array([1.0, 0.0, 0.0]), 0.0
    return axis / norm, angle


def random_unitary_step(rng: np.random.Generator, sigma_rad: float) -> np.ndarray:
    """One increment of an isotropic rotational random walk on the sphere.

    Rotation angle |N(0, sigma_rad)| about an axis drawn uniformly on the
    sphere.  sigma_rad must be >= 0; sigma_rad = 0 gives the identity.
    """
    if sigma_rad < 0.0:
        raise ContractViolation("random_unitary_step: sigma_rad must be >= 0")
    if sigma_rad == 0.0:
        return np.eye(2, dtype=complex)
    axis = rng.standard_normal(3)
    norm = np.linalg.norm(axis)
    while norm < 1e-12:
        axis = rng.standard_normal(3)
        norm = np.linalg.norm(axis)
    angle = abs(rng.normal(0.0, sigma_rad))
    return su2_rotation(axis / norm, angle)


def haar_random_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform det-1 unitary, via a normalised Gaussian quaternion."""
    q = rng.standard_normal(4)
    norm = np.linalg.norm(q)
    while norm < 1e-12:
        q = rng.standard_normal(4)
        norm = np.linalg.norm(q)
    w, x, y, z = q / norm
    return np.array(
        [
            [w - 1j * x, -z - 1j * y],
            [z - 1j * y, w + 1j * x],
        ],
        dtype=complex,
    )
